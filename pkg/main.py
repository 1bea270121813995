"""
Entry point for the annulus solver
"""
import sys

from loewner.cli import main

if __name__ == "__main__":
    sys.exit(main())
