"""
Travel-time integrals along level sets of the first integral

On a level with a fold at height P the time spent between two heights is
an integral of

    K(eta; P) = {1 + e^{-2 eta - 2P} [1 - e^{n eta}]^{1/k}}^{-1/2},  eta = xi - P <= 0,

whose behaviour at eta = 0 is a (-eta)^{1/k} corner. Near the fold the
integrals substitute eta = -w^k, which makes the integrand smooth; the
semi-infinite tails are cut off where an analytic bound falls below the
tolerance.
"""
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from loewner import config
from loewner.cylinder import LevelSet
from loewner.errors import ArgumentError, DomainError, QuadratureBudgetError, RegimeError
from loewner.models import ProblemSpec

_GL_NODES, _GL_WEIGHTS = roots_legendre(config.GAUSS_ORDER)

# Heights above the fold by at most this much (relative) are treated as the fold
_FOLD_SLACK = 1e-12


@dataclass(frozen=True)
class QuadResult:
    """Integral value with its error accounting"""
    value: float
    abs_error: float
    tail_bound: float = 0.0
    evaluations: int = 0

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(
            value=self.value + other.value,
            abs_error=self.abs_error + other.abs_error,
            tail_bound=self.tail_bound + other.tail_bound,
            evaluations=self.evaluations + other.evaluations,
        )

    def scaled(self, factor: float) -> "QuadResult":
        f = abs(factor)
        return replace(self, value=factor * self.value, abs_error=f * self.abs_error,
                       tail_bound=f * self.tail_bound)


ZERO = QuadResult(0.0, 0.0)


def time_kernel(eta, p: float, n: int, k: int):
    """
    K(eta; p), vectorised, for eta <= 0

    Evaluated as e^x / sqrt(e^{2x} + c) for x = eta + p < 0 so that very
    negative eta neither overflows nor loses the e^x decay.
    """
    eta = np.asarray(eta, dtype=float)
    if np.any(eta > 0.0):
        raise DomainError("time kernel is defined for eta <= 0")
    c = np.power(-np.expm1(n * eta), 1.0 / k)
    x = eta + p
    e = np.exp(-np.abs(x))
    value = np.where(x >= 0.0, 1.0 / np.sqrt(1.0 + e * e * c), e / np.sqrt(e * e + c))
    return float(value) if value.ndim == 0 else value


def _kernel_scalar(eta: float, p: float, n: int, k: int) -> float:
    c = (-math.expm1(n * eta)) ** (1.0 / k) if eta < 0.0 else 0.0
    x = eta + p
    e = math.exp(-abs(x))
    if x >= 0.0:
        return 1.0 / math.sqrt(1.0 + e * e * c)
    return e / math.sqrt(e * e + c)


def xi_kernel(xi, s: float, n: int, k: int):
    """{1 + e^{-2 xi}(1 + s e^{n xi})^{1/k}}^{-1/2} on the level with signed value s"""
    xi = np.asarray(xi, dtype=float)
    bracket = np.maximum(1.0 + s * np.exp(n * xi), 0.0)
    value = 1.0 / np.sqrt(1.0 + np.exp(-2.0 * xi) * bracket ** (1.0 / k))
    return float(value) if value.ndim == 0 else value


def _xi_kernel_scalar(xi: float, s: float, n: int, k: int) -> float:
    bracket = max(1.0 + s * math.exp(n * xi), 0.0)
    return 1.0 / math.sqrt(1.0 + math.exp(-2.0 * xi) * bracket ** (1.0 / k))


def _adaptive(func: Callable[[float], float], lo: float, hi: float, tol: float, what: str) -> QuadResult:
    if hi <= lo:
        return ZERO
    out = quad(func, lo, hi, epsabs=tol, epsrel=config.QUAD_EPSREL,
               limit=config.QUAD_LIMIT, full_output=1)
    value, err, info = out[0], out[1], out[2]
    # QUADPACK's own stopping test
    accepted = max(tol, config.QUAD_EPSREL * abs(value))
    if len(out) > 3 and err > accepted:
        raise QuadratureBudgetError(f"{what}: {out[3].strip()}", best=value, abs_error=err)
    if err > accepted:
        raise QuadratureBudgetError(f"{what}: error estimate {err:.3e} above {accepted:.3e}",
                                    best=value, abs_error=err)
    return QuadResult(value=value, abs_error=err, evaluations=int(info.get("neval", 0)))


def _integrate_eta(lo: float, hi: float, p: float, n: int, k: int, tol: float) -> QuadResult:
    """Integral of K(eta; p) over lo <= eta <= hi <= 0"""
    if hi <= lo:
        return ZERO
    result = ZERO
    if hi > -1.0:
        w_lo = (-hi) ** (1.0 / k)
        w_hi = (-max(lo, -1.0)) ** (1.0 / k)

        def folded(w: float) -> float:
            return k * w ** (k - 1) * _kernel_scalar(-w ** k, p, n, k)

        result = result + _adaptive(folded, w_lo, w_hi, 0.5 * tol, "fold segment")
    if lo < -1.0:
        far_hi = min(hi, -1.0)
        result = result + _adaptive(lambda eta: _kernel_scalar(eta, p, n, k),
                                    lo, far_hi, 0.5 * tol, "far segment")
    return result


def tail_cutoff(p: float, tol: float) -> float:
    """Cutoff Lambda whose tail bound is below tol / TAIL_SAFETY"""
    return max(p + math.log(config.TAIL_SAFETY / tol), 1.0)


def tail_bound(cutoff: float, p: float, n: int, k: int) -> float:
    """Upper bound of the integral of K(eta; p) over eta < -cutoff"""
    return math.exp(p - cutoff) / (-math.expm1(-n * cutoff)) ** (1.0 / (2 * k))


def T_of_p(p: float, n: int, k: int, tol: float = config.QUAD_TOL,
           cutoff: Optional[float] = None) -> QuadResult:
    """
    Time a fold level at height p needs to fall to -infinity

    T(p) = integral of K(eta; p) over eta < 0, the length of one branch of
    a blow-up solution. Increasing in p, T -> 0 as p -> -infinity and
    T -> infinity as p -> infinity.
    """
    if not (math.isfinite(p) and tol > 0.0):
        raise ArgumentError(f"bad arguments p={p}, tol={tol}")
    lam = tail_cutoff(p, tol) if cutoff is None else cutoff
    body = _integrate_eta(-lam, 0.0, p, n, k, tol * (1.0 - 1.0 / config.TAIL_SAFETY))
    bound = tail_bound(lam, p, n, k)
    return QuadResult(value=body.value, abs_error=body.abs_error + bound,
                      tail_bound=bound, evaluations=body.evaluations)


def half_time_between(p_low: float, p_high: float, peak: float, n: int, k: int,
                      tol: float = config.QUAD_TOL) -> QuadResult:
    """0.5 * integral of K over p_low - peak <= eta <= p_high - peak"""
    lo, hi = p_low - peak, _clamp_to_fold(p_high - peak, peak)
    return _integrate_eta(lo, hi, peak, n, k, 2.0 * tol).scaled(0.5)


def T_bc(spec: ProblemSpec, tol: float = config.QUAD_TOL) -> QuadResult:
    """
    Critical half-length for finite boundary data

    0.5 * integral of K(eta; max(p_a, p_b)) over -|p_a - p_b| <= eta <= 0:
    the half-time a fold level peaking at the larger boundary height needs
    to reach the smaller one.
    """
    if spec.infinite:
        raise RegimeError("T_bc is defined for finite boundary data only")
    p_a, p_b = spec.p_a, spec.p_b
    high, low = max(p_a, p_b), min(p_a, p_b)
    return half_time_between(low, high, high, spec.n, spec.k, tol)


def _clamp_to_fold(eta: float, peak: float) -> float:
    if eta > 0.0:
        if eta > _FOLD_SLACK * max(1.0, abs(peak)):
            raise DomainError(f"height lies {eta:.3e} above the fold")
        return 0.0
    return eta


def time_between_levels(xi_from: float, xi_to: float, level: LevelSet,
                        tol: float = config.QUAD_TOL) -> QuadResult:
    """
    Time to travel from height xi_from up to xi_to <= peak on a fold level

    xi_from may be -infinity; the tail is then cut off and its bound added
    to the error estimate.
    """
    if not level.has_fold:
        raise DomainError(f"level H={level.H} has no fold")
    if xi_from > xi_to:
        raise ArgumentError(f"xi_from={xi_from} above xi_to={xi_to}")
    peak = level.peak_xi
    hi = _clamp_to_fold(xi_to - peak, peak)
    if math.isfinite(xi_from):
        return _integrate_eta(xi_from - peak, hi, peak, level.n, level.k, tol)
    lam = max(tail_cutoff(peak, tol), 1.0 - hi)
    body = _integrate_eta(-lam, hi, peak, level.n, level.k, tol * (1.0 - 1.0 / config.TAIL_SAFETY))
    bound = tail_bound(lam, peak, level.n, level.k)
    return QuadResult(value=body.value, abs_error=body.abs_error + bound,
                      tail_bound=bound, evaluations=body.evaluations)


def level_time(xi_lo: float, xi_hi: float, s: float, n: int, k: int,
               tol: float = config.QUAD_TOL) -> QuadResult:
    """Time between heights xi_lo <= xi_hi on the level with signed value s"""
    if s < 0.0:
        level = LevelSet(((-1) ** k) * s, n, k)
        return time_between_levels(xi_lo, xi_hi, level, tol)
    return _adaptive(lambda xi: _xi_kernel_scalar(xi, s, n, k), xi_lo, xi_hi, tol, "level segment")


def boundary_tail_time(xi: float, level: LevelSet, rel_tol: float = 1e-12) -> float:
    """
    Time from height xi down to -infinity, to relative accuracy

    In y = e^xi the integral is over 0 < y < e^xi of dy / sqrt(y^2 + c(y)),
    which stays accurate when the answer is of order e^xi << 1.
    """
    if not level.has_fold:
        raise DomainError(f"level H={level.H} has no fold")
    peak = level.peak_xi
    if xi >= peak:
        raise DomainError("tail time needs a height strictly below the fold")
    n, k = level.n, level.k

    def integrand(y: float) -> float:
        c = (-math.expm1(n * (math.log(y) - peak))) ** (1.0 / k) if y > 0.0 else 1.0
        return 1.0 / math.sqrt(y * y + c)

    value, _ = quad(integrand, 0.0, math.exp(xi), epsabs=0.0, epsrel=rel_tol, limit=config.QUAD_LIMIT)
    return value


def cell_integrals(func: Callable[[np.ndarray], np.ndarray], edges: np.ndarray) -> np.ndarray:
    """Fixed-order Gauss-Legendre integral of a vectorised func over each cell"""
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return half * (func(nodes) @ _GL_WEIGHTS)


def fold_segment_times(w_nodes: np.ndarray, level: LevelSet) -> np.ndarray:
    """Times between consecutive nodes w, where xi = peak - w^k"""
    n, k, peak = level.n, level.k, level.peak_xi

    def integrand(w):
        return k * w ** (k - 1) * time_kernel(-w ** k, peak, n, k)

    return cell_integrals(integrand, w_nodes)


def xi_segment_times(xi_nodes: np.ndarray, s: float, n: int, k: int) -> np.ndarray:
    """Times between consecutive decreasing heights on a level without fold"""
    nodes = np.asarray(xi_nodes, dtype=float)
    return -cell_integrals(lambda xi: xi_kernel(xi, s, n, k), nodes)
