"""
Radial solutions of the sigma_k Loewner-Nirenberg problem on annuli
"""

__version__ = "1.0.0"
