"""
Configuration for the annulus solver

Defaults for every tolerance, grid size and output format. The run-level
tunables can be overridden through LOEWNER_* environment variables; the
values in effect are echoed into every report.
"""
import os
from typing import Tuple

# Quadrature
QUAD_TOL: float = float(os.getenv("LOEWNER_QUAD_TOL", "1e-10"))  # absolute tolerance of improper integrals
QUAD_EPSREL: float = 1e-13  # relative floor handed to QUADPACK
QUAD_LIMIT: int = 400  # max subintervals per adaptive integral
TAIL_SAFETY: float = 10.0  # cutoff chosen so the tail bound is below tol / TAIL_SAFETY
GAUSS_ORDER: int = 8  # fixed Gauss-Legendre order for per-cell profile times

# Root finding
ROOT_TOL: float = float(os.getenv("LOEWNER_ROOT_TOL", "1e-9"))  # residual tolerance of the defining identities
INFINITE_ROOT_TOL: float = 1e-12  # tighter p(T) solve for blow-up boundary data
BRACKET_LIMIT: float = 100.0  # |p| beyond which bracket expansion gives up
MAX_ROOT_ITER: int = 500

# Classification
CLASSIFY_TOL: float = float(os.getenv("LOEWNER_CLASSIFY_TOL", "1e-9"))  # tau_c: |ln(b/a) - 2 T_bc| below this is a tie
EQUAL_HEIGHT_TOL: float = 1e-12  # p_a, p_b this close count as equal heights

# Profile grid
BRANCH_POINTS: int = int(os.getenv("LOEWNER_BRANCH_POINTS", "2001"))  # samples per branch
GEOMETRIC_FRACTION: float = 0.5  # share of samples clustered toward the fold
FOLD_OFFSET_MIN: float = 1e-12  # smallest clustered time offset from the fold
XI_FLOOR: float = -20.0  # blow-up truncation: xi_min = min(XI_FLOOR, p - XI_FLOOR_MARGIN)
XI_FLOOR_MARGIN: float = 20.0
ENDPOINT_TIME_TOL: float = 1e-6  # allowed mismatch between tabulated and solved branch length

# Ambient finite-difference oracle
ORACLE_REL_STEP: float = 1e-4  # h = r * ORACLE_REL_STEP
ORACLE_COARSE_RATIO: float = 1e-2  # h > r * ratio raises the precision flag

# Verification
RESIDUAL_REL_TOL: float = 1e-6
DRIFT_TOL: float = 1e-8
SINGULAR_GUARD: float = 0.01  # residual rows must be this far from t_m and +-T
JUMP_REL_TOL: float = 1e-6
JUMP_FIT_DEGREE: int = 5
JUMP_FIT_SPAN: float = 5.0  # rows with w up to JUMP_FIT_SPAN * smallest w enter the fit
HOLDER_WINDOW: Tuple[float, float] = (1e-6, 1e-3)
HOLDER_MIN_SAMPLES: int = 10
HOLDER_REL_TOL: float = 0.05
WITNESS_DELTA: float = 1e-4
WITNESS_HALVINGS: int = 3
WITNESS_SLACK: float = 0.02
BOUNDARY_SLOPE_REL_TOL: float = 0.01
BOUNDARY_STABILITY_TOL: float = 0.01
CERTIFICATE_SLOPE_FRACTIONS: Tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
CERTIFICATE_CURVATURES: Tuple[float, ...] = (-5.0, 0.0, 5.0)

# Phase-plane export (defaults reproduce the k = 2, n = 7 picture)
CONTOUR_N: int = 7
CONTOUR_K: int = 2
CONTOUR_XI_RANGE: Tuple[float, float] = (-1.5, 1.5)
CONTOUR_Q_RANGE: Tuple[float, float] = (-3.0, 3.0)
CONTOUR_RESOLUTION: int = 301
MAX_CONTOUR_POINTS: int = 4096 * 4096

# Sweeps
SWEEP_SIZE: int = 20
SWEEP_C_RANGE: Tuple[float, float] = (1e-4, 1.0)

# Persistence
CSV_HEADER: Tuple[str, ...] = ("t", "r", "xi", "xi_p", "u", "dlnu_dr", "branch")
FLOAT_FORMAT: str = ".17g"
PROFILE_FILENAME: str = "profile.csv"
REPORT_FILENAME: str = "report.json"

# CLI exit codes
EXIT_OK: int = 0
EXIT_AUDIT_FAIL: int = 1
EXIT_USAGE: int = 2
EXIT_INCONSISTENT: int = 3
EXIT_IO: int = 4
EXIT_INTERNAL: int = 5  # numerical failure inside the solver
