"""
Scalar root problems that pin down the level of a solution

- solve_p_for_T: fold height p with T(p) = T (blow-up boundary data)
- solve_qa: level of the smooth solution when ln(b/a) < 2 T_bc
- solve_p_case4: fold height of the jump solution when ln(b/a) > 2 T_bc

All residuals are monotone, so every solve brackets first and then runs
a bracketing method from scipy.optimize.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

from scipy.optimize import bisect, brentq

from loewner import config
from loewner.errors import ArgumentError, RegimeError, UnboundedBracketError
from loewner.models import ProblemSpec
from loewner.quadrature import T_bc, T_of_p, half_time_between, level_time

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bracket:
    """Interval [lo, hi] with a sign change of f"""
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ArgumentError(f"empty bracket [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0.0:
            raise ArgumentError(f"no sign change on [{self.lo}, {self.hi}]")


def expand_bracket(f: Callable[[float], float], start: float, step: float = 1.0,
                   limit: float = config.BRACKET_LIMIT) -> Bracket:
    """
    Bracket the root of an increasing function by geometric steps from start

    Raises:
        UnboundedBracketError: no sign change with |x| <= limit
    """
    f_start = f(start)
    if f_start == 0.0:
        return Bracket(start, start + step, f_start, f(start + step))
    direction = 1.0 if f_start < 0.0 else -1.0
    near, f_near = start, f_start
    while True:
        far = near + direction * step
        if abs(far) > limit:
            raise UnboundedBracketError(f"no sign change within |x| <= {limit}")
        f_far = f(far)
        if f_far * f_start <= 0.0:
            if direction > 0:
                return Bracket(near, far, f_near, f_far)
            return Bracket(far, near, f_far, f_near)
        near, f_near = far, f_far
        step *= 2.0


def solve_p_for_T(T: float, n: int, k: int, tol: float = config.ROOT_TOL) -> float:
    """Fold height p with T_of_p(p) = T"""
    if not (T > 0.0 and math.isfinite(T)):
        raise ArgumentError(f"T must be positive and finite, got {T}")
    quad_tol = 0.1 * tol

    def residual(p: float) -> float:
        return T_of_p(p, n, k, quad_tol).value - T

    bracket = expand_bracket(residual, 0.0)
    p = brentq(residual, bracket.lo, bracket.hi, xtol=0.1 * tol, rtol=4.0 * 2.0 ** -52,
               maxiter=config.MAX_ROOT_ITER)
    logger.debug(f"p(T={T:.6g}) = {p:.15g}")
    return p


def q_from_s(s: float, p_a: float, n: int, k: int) -> float:
    """Inner-boundary slope q_a on the level s through height p_a"""
    excess = (s + math.exp(-n * p_a)) * math.exp((n - 2 * k) * p_a)
    return -math.sqrt(1.0 + max(excess, 0.0) ** (1.0 / k))


def solve_qa_levels(p_a: float, p_b: float, n: int, k: int, T: float,
                    tol: float = config.ROOT_TOL) -> Tuple[float, float]:
    """
    Level of the smooth solution falling from p_a to p_b in time 2T

    Requires p_a >= p_b. The signed level s ranges over
    (-e^{-n p_a}, infinity), where the half-travel-time decreases from
    T_bc to 0.

    Returns:
        (q_a, H) with q_a = xi'(-T) and H = (-1)^k s
    """
    if p_a < p_b:
        raise ArgumentError("solve_qa_levels needs p_a >= p_b")
    quad_tol = 0.1 * tol
    scale = math.exp(-n * p_a)
    s_min = -scale

    def residual(s: float) -> float:
        return 0.5 * level_time(p_b, p_a, s, n, k, quad_tol).value - T

    f_lo = residual(s_min)
    if f_lo <= 0.0:
        raise RegimeError(f"T={T} is not below T_bc={f_lo + T}: no smooth solution")
    s_hi, f_hi = s_min, f_lo
    for j in range(config.MAX_ROOT_ITER):
        s_hi = s_min + scale * 4.0 ** j
        f_hi = residual(s_hi)
        if f_hi < 0.0:
            break
    else:
        raise UnboundedBracketError("no sign change in the level variable")
    bracket = Bracket(s_min, s_hi, f_lo, f_hi)
    s = brentq(residual, bracket.lo, bracket.hi, xtol=1e-15 * scale, rtol=1e-14,
               maxiter=config.MAX_ROOT_ITER)
    miss = abs(residual(s))
    if miss > 10.0 * tol:
        logger.warning(f"smooth-level residual {miss:.3e} above tolerance {tol:.1e}")
    return q_from_s(s, p_a, n, k), ((-1) ** k) * s


def solve_qa(spec: ProblemSpec, tol: float = config.ROOT_TOL) -> Tuple[float, float]:
    """
    (q_a, H) of the smooth solution for finite data with ln(b/a) < 2 T_bc

    q_a is the slope at the boundary with the larger height; when
    p_a < p_b this is the outer boundary, read in reflected time.
    """
    if spec.infinite:
        raise RegimeError("solve_qa needs finite boundary data")
    high, low = max(spec.p_a, spec.p_b), min(spec.p_a, spec.p_b)
    critical = T_bc(spec, 0.1 * tol).value
    if spec.T >= critical:
        raise RegimeError(f"T={spec.T:.6g} >= T_bc={critical:.6g}: no smooth solution")
    return solve_qa_levels(high, low, spec.n, spec.k, spec.T, tol)


def case4_times(p: float, p_a: float, p_b: float, n: int, k: int,
                tol: float = config.QUAD_TOL) -> Tuple[float, float]:
    """(T_a, T_b): half-times from the fold at p down to p_a and to p_b"""
    t_a = half_time_between(p_a, p, p, n, k, tol).value
    t_b = half_time_between(p_b, p, p, n, k, tol).value
    return t_a, t_b


def case4_balance(p: float, p_a: float, p_b: float, n: int, k: int, T: float,
                  tol: float = config.QUAD_TOL) -> float:
    """T_a(p) + T_b(p) - T; its zero is the fold height of the jump solution"""
    t_a, t_b = case4_times(p, p_a, p_b, n, k, tol)
    return t_a + t_b - T


def solve_p_case4(spec: ProblemSpec, tol: float = config.ROOT_TOL) -> float:
    """
    Fold height of the solution with an interior gradient jump

    For blow-up data this is the fold height with T_of_p(p) = T. For finite
    data the balance is negative at p = max(p_a, p_b) and grows without
    bound; the first sign change found by outward geometric scanning is
    refined by bisection.
    """
    if spec.infinite:
        return solve_p_for_T(spec.T, spec.n, spec.k, min(tol, config.INFINITE_ROOT_TOL))
    n, k, T = spec.n, spec.k, spec.T
    p_a, p_b = spec.p_a, spec.p_b
    quad_tol = 0.1 * tol

    def residual(p: float) -> float:
        return case4_balance(p, p_a, p_b, n, k, T, quad_tol)

    lo = max(p_a, p_b)
    f_lo = residual(lo)
    if f_lo >= 0.0:
        raise RegimeError(f"T={T:.6g} <= T_bc={f_lo + T:.6g}: no interior jump")
    step = 1.0
    while True:
        hi = lo + step
        if hi - max(p_a, p_b) > 2.0 * config.BRACKET_LIMIT:
            raise UnboundedBracketError("no sign change for the jump balance")
        f_hi = residual(hi)
        if f_hi >= 0.0:
            break
        lo, f_lo = hi, f_hi
        step *= 2.0
    bracket = Bracket(lo, hi, f_lo, f_hi)
    return bisect(residual, bracket.lo, bracket.hi, xtol=0.1 * tol, maxiter=config.MAX_ROOT_ITER)


def glue_time(p: float, spec: ProblemSpec, tol: float = config.QUAD_TOL) -> float:
    """Time t_m = T_a - T_b of the fold; 0 for blow-up data"""
    if spec.infinite:
        return 0.0
    t_a, t_b = case4_times(p, spec.p_a, spec.p_b, spec.n, spec.k, tol)
    return t_a - t_b


def matching_radius(p: float, spec: ProblemSpec, tol: float = config.QUAD_TOL) -> float:
    """Radius m = sqrt(ab) * exp(T_a - T_b) of the gradient jump"""
    return spec.sqrt_ab * math.exp(glue_time(p, spec, tol))
