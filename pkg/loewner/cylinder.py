"""
Cylinder variables for radial conformal factors

With t = ln r - 0.5 ln(ab) and xi = -(2/(n-2)) ln u - ln r, a radial
solution of sigma_k(-A_u) = 2^{-k} C(n,k) becomes an autonomous second
order ODE for xi(t). This module converts between the two pictures,
evaluates the cylinder form of sigma_k, the first integral H, the
speed law on a level set of H, and an independent finite-difference
oracle that assembles the full n x n Schouten-type matrix.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import comb

from loewner import config
from loewner.errors import ArgumentError, DomainError
from loewner.models import ProblemSpec
from loewner.symfuncs import sigma


@dataclass(frozen=True)
class CylinderState:
    """Point of a cylinder profile: time, height, slope and optional curvature"""
    t: float
    xi: float
    xi_p: float
    xi_pp: Optional[float] = None


@dataclass(frozen=True)
class LevelSet:
    """
    Level {H = const} of the first integral for fixed (n, k)

    The signed level s = (-1)^k H decides the shape: s < 0 gives a closed
    arc with a fold at height peak_xi where |xi'| = 1, s >= 0 gives curves
    with |xi'| > 1 everywhere.
    """
    H: float
    n: int
    k: int

    @classmethod
    def through(cls, xi: float, xi_p: float, n: int, k: int) -> "LevelSet":
        return cls(float(first_integral(xi, xi_p, n, k)), n, k)

    @classmethod
    def from_peak(cls, p: float, n: int, k: int) -> "LevelSet":
        """Level whose fold sits at height p"""
        return cls(-((-1) ** k) * math.exp(-n * p), n, k)

    @property
    def s(self) -> float:
        return ((-1) ** self.k) * self.H

    @property
    def has_fold(self) -> bool:
        return self.s < 0.0

    @property
    def peak_xi(self) -> float:
        if not self.has_fold:
            raise DomainError(f"level H={self.H} has no fold")
        return -math.log(abs(self.H)) / self.n


def to_cylinder(r: float, u: float, spec: ProblemSpec) -> Tuple[float, float]:
    """(r, u) -> (t, xi); r must lie strictly inside (a, b) and u > 0"""
    if not spec.a < r < spec.b:
        raise DomainError(f"r={r} outside ({spec.a}, {spec.b})")
    if not u > 0.0:
        raise DomainError(f"u={u} is not positive")
    log_r = math.log(r)
    t = log_r - spec.log_center
    xi = -(2.0 / (spec.n - 2)) * math.log(u) - log_r
    return t, xi


def from_cylinder(t, xi, spec: ProblemSpec):
    """(t, xi) -> (r, u), elementwise for arrays"""
    log_r = np.asarray(t, dtype=float) + spec.log_center
    r = np.exp(log_r)
    u = np.exp(-0.5 * (spec.n - 2) * (np.asarray(xi, dtype=float) + log_r))
    if np.ndim(r) == 0:
        return float(r), float(u)
    return r, u


def dlnu_dr_from_slope(xi_p, r, n: int):
    """d(ln u)/dr = -(n-2)(xi' + 1) / (2r)"""
    return -(n - 2) * (np.asarray(xi_p, dtype=float) + 1.0) / (2.0 * np.asarray(r, dtype=float))


def slope_from_dlnu_dr(dlnu, r, n: int):
    """Inverse of dlnu_dr_from_slope"""
    return -(2.0 / (n - 2)) * np.asarray(r, dtype=float) * np.asarray(dlnu, dtype=float) - 1.0


def target_sigma(n: int, k: int) -> float:
    """Right-hand side 2^{-k} C(n, k)"""
    return comb(n, k, exact=True) / 2.0 ** k


def sigma_k_cylinder(xi, xi_p, xi_pp, n: int, k: int):
    """Cylinder form of sigma_k(-A_u), vectorised"""
    xi = np.asarray(xi, dtype=float)
    xi_p = np.asarray(xi_p, dtype=float)
    xi_pp = np.asarray(xi_pp, dtype=float)
    one_minus = 1.0 - xi_p * xi_p
    prefactor = ((-1) ** k) * 2.0 ** (1 - k) * comb(n - 1, k - 1, exact=True)
    with np.errstate(over='ignore', invalid='ignore'):
        return prefactor * np.exp(2 * k * xi) * one_minus ** (k - 1) * (
            xi_pp + (n - 2 * k) / (2.0 * k) * one_minus)


def sigma_k_radial(state: CylinderState, n: int, k: int) -> float:
    """sigma_k(-A_u) at one cylinder state; needs xi''"""
    if state.xi_pp is None:
        raise ArgumentError("sigma_k needs the second derivative xi''")
    return float(sigma_k_cylinder(state.xi, state.xi_p, state.xi_pp, n, k))


def first_integral(xi, xi_p, n: int, k: int):
    """H = e^{(2k-n) xi} (1 - xi'^2)^k - (-1)^k e^{-n xi}"""
    xi = np.asarray(xi, dtype=float)
    xi_p = np.asarray(xi_p, dtype=float)
    value = np.exp((2 * k - n) * xi) * (1.0 - xi_p * xi_p) ** k - ((-1) ** k) * np.exp(-n * xi)
    return float(value) if value.ndim == 0 else value


def scaled_first_integral(xi, xi_p, n: int, k: int):
    """H e^{n xi}, the form compared row by row in drift checks"""
    xi = np.asarray(xi, dtype=float)
    xi_p = np.asarray(xi_p, dtype=float)
    return np.exp(2 * k * xi) * (1.0 - xi_p * xi_p) ** k - ((-1) ** k)


def _level_bracket(xi, level: LevelSet) -> Tuple[np.ndarray, np.ndarray]:
    """1 + s e^{n xi} and its xi-derivative, clipped at the fold"""
    xi = np.asarray(xi, dtype=float)
    n = level.n
    if level.has_fold:
        shifted = n * (xi - level.peak_xi)
        bracket = -np.expm1(shifted)
        d_bracket = -n * np.exp(shifted)
    else:
        grow = level.s * np.exp(n * xi)
        bracket = 1.0 + grow
        d_bracket = n * grow
    return np.maximum(bracket, 0.0), d_bracket


def speed_squared_excess(xi, level: LevelSet) -> np.ndarray:
    """G(xi) = xi'^2 - 1 = e^{-2 xi} (1 + s e^{n xi})^{1/k} on the level"""
    bracket, _ = _level_bracket(xi, level)
    return np.exp(-2.0 * np.asarray(xi, dtype=float)) * bracket ** (1.0 / level.k)


def slope_on_level(xi, level: LevelSet, sign: float = -1.0):
    """xi' = sign * sqrt(1 + G(xi))"""
    value = sign * np.sqrt(1.0 + speed_squared_excess(xi, level))
    return float(value) if np.ndim(value) == 0 else value


def second_derivative_on_level(xi, level: LevelSet):
    """
    xi'' = G'(xi) / 2 along the level, independent of the branch sign

    Diverges to -infinity at the fold.
    """
    xi = np.asarray(xi, dtype=float)
    k = level.k
    bracket, d_bracket = _level_bracket(xi, level)
    decay = np.exp(-2.0 * xi)
    with np.errstate(divide='ignore', invalid='ignore'):
        g = decay * bracket ** (1.0 / k)
        dg = -2.0 * g + decay * (1.0 / k) * bracket ** (1.0 / k - 1.0) * d_bracket
    value = 0.5 * dg
    return float(value) if value.ndim == 0 else value


def curvature_term_on_level(xi, level: LevelSet):
    """
    xi'' + (n-2k)/(2k) (1 - xi'^2) along the level, without cancellation

    Both summands grow like e^{-2 xi}; on the level their sum collapses to
    -(n/2k) e^{-2 xi} (1 + s e^{n xi})^{1/k - 1}.
    """
    xi = np.asarray(xi, dtype=float)
    n, k = level.n, level.k
    bracket, _ = _level_bracket(xi, level)
    with np.errstate(divide='ignore', over='ignore'):
        value = -(n / (2.0 * k)) * np.exp(-2.0 * xi) * bracket ** (1.0 / k - 1.0)
    return float(value) if value.ndim == 0 else value


def sigma_k_on_level(xi, xi_p, level: LevelSet):
    """
    sigma_k(-A_u) of tabulated rows (xi, xi') on a level of H

    The slope enters through (1 - xi'^2)^{k-1}; the curvature bracket comes
    from curvature_term_on_level, so steep rows keep full precision.
    """
    n, k = level.n, level.k
    xi = np.asarray(xi, dtype=float)
    xi_p = np.asarray(xi_p, dtype=float)
    one_minus = 1.0 - xi_p * xi_p
    prefactor = ((-1) ** k) * 2.0 ** (1 - k) * comb(n - 1, k - 1, exact=True)
    with np.errstate(over='ignore', invalid='ignore'):
        return prefactor * np.exp(2 * k * xi) * one_minus ** (k - 1) * curvature_term_on_level(xi, level)


def profile_from_state(state: CylinderState, n: int, log_center: float) -> Callable:
    """
    Radial function whose cylinder picture is the quadratic through state

    xi(t) = xi0 + xi'(t - t0) + 0.5 xi''(t - t0)^2. Returns u(r) accepting
    scalars or arrays.
    """
    curvature = 0.0 if state.xi_pp is None else state.xi_pp

    def u_of_r(r):
        log_r = np.log(np.asarray(r, dtype=float))
        dt = log_r - log_center - state.t
        xi = state.xi + state.xi_p * dt + 0.5 * curvature * dt * dt
        return np.exp(-0.5 * (n - 2) * (xi + log_r))

    return u_of_r


@dataclass(frozen=True)
class AmbientSample:
    """Radial conformal factor u sampled around radius r with step h"""
    r: float
    u: Callable
    h: float

    def __post_init__(self):
        if not self.r > 0.0 or not self.h > 0.0 or self.h >= self.r:
            raise ArgumentError(f"need 0 < h < r, got r={self.r}, h={self.h}")
        if not float(self.u(self.r)) > 0.0:
            raise DomainError("conformal factor is not positive at r")


@dataclass(frozen=True)
class OracleResult:
    sigma_k: float
    eigenvalues: np.ndarray
    h: float
    coarse: bool  # h exceeds r * ORACLE_COARSE_RATIO


def _log_derivatives(u, r: float, h: float) -> np.ndarray:
    """v'(r), v''(r) and the tangential second derivative v'(r)/r of v = ln u by differences"""
    v0 = math.log(float(u(r)))
    vp = math.log(float(u(r + h)))
    vm = math.log(float(u(r - h)))
    # v at (r, h, 0, ..., 0)
    vt = math.log(float(u(math.hypot(r, h))))
    return np.array([
        (vp - vm) / (2.0 * h),
        (vp - 2.0 * v0 + vm) / (h * h),
        2.0 * (vt - v0) / (h * h),
    ])


def ambient_matrix(u0: float, dv: float, d2_radial: float, d2_tangential: float, n: int) -> np.ndarray:
    """
    A_u at (r, 0, ..., 0) assembled from derivatives of v = ln u

    A_u = u^{-4/(n-2)} [-(2/(n-2)) D^2 v + (4/(n-2)^2) dv (x) dv - (2/(n-2)^2) |dv|^2 I]
    """
    grad = np.zeros(n)
    grad[0] = dv
    hess = np.diag([d2_radial] + [d2_tangential] * (n - 1))
    weight = 1.0 / (n - 2) ** 2
    bracket = (-(2.0 / (n - 2)) * hess
               + 4.0 * weight * np.outer(grad, grad)
               - 2.0 * weight * float(grad @ grad) * np.eye(n))
    return u0 ** (-4.0 / (n - 2)) * bracket


def ambient_oracle_sigma_k(sample: AmbientSample, n: int, k: int, richardson: bool = True) -> OracleResult:
    """
    sigma_k(-A_u) at (r, 0, ..., 0) from finite differences of ln u

    Central differences of step h, combined over {h, h/2} by Richardson
    extrapolation unless disabled.
    """
    r, h = sample.r, sample.h
    coarse = h > r * config.ORACLE_COARSE_RATIO
    derivs = _log_derivatives(sample.u, r, h)
    if richardson:
        fine = _log_derivatives(sample.u, r, 0.5 * h)
        derivs = (4.0 * fine - derivs) / 3.0
    u0 = float(sample.u(r))
    matrix = ambient_matrix(u0, derivs[0], derivs[1], derivs[2], n)
    eigs = np.linalg.eigvalsh(-matrix)
    return OracleResult(sigma_k=sigma(eigs, k), eigenvalues=eigs, h=h, coarse=coarse)


def first_integral_drift(xi, xi_p, H: float, n: int, k: int) -> np.ndarray:
    """
    |H(xi, xi') - H| / max(1, |H|, e^{-n xi}) per row

    Both terms of H grow like e^{-n xi} toward the boundary, so the drift is
    measured relative to that size, through the scaled form H e^{n xi}.
    """
    xi = np.asarray(xi, dtype=float)
    with np.errstate(over='ignore', invalid='ignore'):
        growth = np.exp(n * xi)
        scaled = scaled_first_integral(xi, xi_p, n, k)
        return np.abs(scaled - H * growth) / np.maximum(growth * max(1.0, abs(H)), 1.0)
