"""
Classification and construction of radial solutions

classify decides which of the five solution shapes the data admit,
build_profile tabulates xi(t) on [-T, T] and reconstruct_u maps the table
back to (r, u). Profiles are built for the orientation p_a >= p_b and
reflected under t -> -t otherwise.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from loewner import config
from loewner.cylinder import (
    AmbientSample,
    CylinderState,
    LevelSet,
    ambient_oracle_sigma_k,
    dlnu_dr_from_slope,
    from_cylinder,
    profile_from_state,
    slope_from_dlnu_dr,
    slope_on_level,
    speed_squared_excess,
)
from loewner.errors import (
    ArgumentError,
    CertificationError,
    ConsistencyError,
    InconsistentDataError,
    InsufficientResolutionError,
)
from loewner.models import GridControl, ProblemSpec
from loewner.quadrature import (
    T_bc,
    boundary_tail_time,
    fold_segment_times,
    half_time_between,
    level_time,
    xi_segment_times,
)
from loewner.rootfind import glue_time, solve_p_case4, solve_qa
from loewner.symfuncs import in_gamma_k

logger = logging.getLogger(__name__)

SWAP_LABEL = {"L": "R", "R": "L", "S": "S"}


class RegimeTag(Enum):
    CASE1_SMOOTH = "Case1Smooth"
    CASE2_LEFT_SINGULAR = "Case2LeftSingular"
    CASE3_RIGHT_SINGULAR = "Case3RightSingular"
    CASE4_INTERIOR_JUMP = "Case4InteriorJump"
    INFINITE_BC = "InfiniteBC"


@dataclass(frozen=True)
class Regime:
    """
    Outcome of classification

    Attributes:
        tag: Solution shape
        H: Level of the first integral carrying the solution
        p: Fold height, absent for smooth solutions
        t_m: Time of the gradient jump, present for Case 4 and blow-up data
        T_bc: Critical half-length, finite data only
        q_a: Slope at the boundary with the larger height, smooth solutions only
        borderline: Classification fell within tolerance of the frontier
        normalized_flip: p_a < p_b, profile built reflected under t -> -t
    """
    tag: RegimeTag
    H: float
    p: Optional[float] = None
    t_m: Optional[float] = None
    T_bc: Optional[float] = None
    q_a: Optional[float] = None
    borderline: bool = False
    normalized_flip: bool = False

    @property
    def has_jump(self) -> bool:
        return self.tag in (RegimeTag.CASE4_INTERIOR_JUMP, RegimeTag.INFINITE_BC)

    @property
    def singular_end(self) -> Optional[str]:
        """Boundary sphere where the profile reaches |xi'| = 1"""
        if self.tag is RegimeTag.CASE3_RIGHT_SINGULAR:
            return "inner"
        if self.tag is RegimeTag.CASE2_LEFT_SINGULAR:
            return "outer"
        return None

    def to_dict(self) -> dict:
        return {
            "regime": self.tag.value,
            "H": self.H,
            "p": self.p,
            "t_m": self.t_m,
            "T_bc": self.T_bc,
            "q_a": self.q_a,
            "borderline": self.borderline,
            "normalized_flip": self.normalized_flip,
            "singular_end": self.singular_end,
        }


def classify(spec: ProblemSpec, tol: float = config.CLASSIFY_TOL,
             root_tol: float = config.ROOT_TOL, quad_tol: float = config.QUAD_TOL) -> Regime:
    """
    Decide the solution shape by comparing ln(b/a) with 2 T_bc

    Ties within tol go to the singular-endpoint shapes with the borderline
    flag set; a tie with p_a = p_b has no solution.

    Raises:
        InconsistentDataError: tie with equal heights
    """
    n, k = spec.n, spec.k
    if spec.infinite:
        p = solve_p_case4(spec, root_tol)
        logger.info(f"blow-up data: fold height p={p:.12g}")
        return Regime(RegimeTag.INFINITE_BC, LevelSet.from_peak(p, n, k).H, p=p, t_m=0.0)

    p_a, p_b = spec.p_a, spec.p_b
    flip = p_a < p_b
    critical = T_bc(spec, quad_tol).value
    gap = 2.0 * spec.T - 2.0 * critical
    if abs(gap) <= tol:
        if spec.symmetric:
            raise InconsistentDataError("ln(b/a) = 2 T_bc with p_a = p_b")
        high = max(p_a, p_b)
        tag = RegimeTag.CASE3_RIGHT_SINGULAR if p_a > p_b else RegimeTag.CASE2_LEFT_SINGULAR
        logger.warning(f"borderline data (gap {gap:.3e}): classified as {tag.value}")
        return Regime(tag, LevelSet.from_peak(high, n, k).H, p=high, T_bc=critical,
                      borderline=True, normalized_flip=flip)
    if gap < 0.0:
        q_a, H = solve_qa(spec, root_tol)
        return Regime(RegimeTag.CASE1_SMOOTH, H, T_bc=critical, q_a=q_a, normalized_flip=flip)
    p = solve_p_case4(spec, root_tol)
    t_m = glue_time(p, spec, 0.1 * root_tol)
    return Regime(RegimeTag.CASE4_INTERIOR_JUMP, LevelSet.from_peak(p, n, k).H,
                  p=p, t_m=t_m, T_bc=critical, normalized_flip=flip)


def borderline_spec(n: int, k: int, a: float, p_a: float, p_b: float,
                    tol: float = config.QUAD_TOL) -> ProblemSpec:
    """Finite data on the frontier ln(b/a) = 2 T_bc with heights p_a != p_b"""
    if p_a == p_b:
        raise ArgumentError("the frontier needs p_a != p_b")
    high, low = max(p_a, p_b), min(p_a, p_b)
    half = half_time_between(low, high, high, n, k, tol).value
    return ProblemSpec.from_levels(n, k, a, a * math.exp(2.0 * half), p_a, p_b)


@dataclass(frozen=True, eq=False)
class CylinderProfile:
    """
    Tabulated xi(t) on [-T, T]

    Rows are ordered by t. A gradient jump is stored as two rows sharing
    t_m: the last 'L' row with xi' = +1 and the first 'R' row with
    xi' = -1. Smooth and singular-endpoint profiles use the label 'S'.
    """
    t: np.ndarray
    xi: np.ndarray
    xi_p: np.ndarray
    branch: np.ndarray
    regime: Regime
    spec: ProblemSpec
    tau: Optional[np.ndarray] = None  # time to the nearer boundary, blow-up data
    durations: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        size = self.t.shape
        for name in ("xi", "xi_p", "branch"):
            if getattr(self, name).shape != size:
                raise ConsistencyError(f"column {name} has shape {getattr(self, name).shape}, expected {size}")
        if self.tau is not None and self.tau.shape != size:
            raise ConsistencyError("tau column has the wrong shape")
        if self.t.size < 2:
            raise ConsistencyError("profile needs at least two rows")
        steps = np.diff(self.t)
        if np.any(steps < 0.0):
            raise ConsistencyError("t is not nondecreasing", index=int(np.argmax(steps < 0.0)) + 1)
        ties = np.flatnonzero(steps == 0.0)
        for i in ties:
            if not (self.branch[i] == "L" and self.branch[i + 1] == "R"):
                raise ConsistencyError(f"repeated t at rows {i}, {i + 1} outside a jump", index=int(i) + 1)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def T(self) -> float:
        return self.spec.T

    @property
    def level(self) -> LevelSet:
        return LevelSet(self.regime.H, self.n, self.k)

    @property
    def singular_mask(self) -> np.ndarray:
        """Rows with |xi'| = 1: the jump rows and a singular endpoint"""
        return np.abs(self.xi_p) == 1.0

    def fold_indices(self) -> Optional[Tuple[int, int]]:
        """(last 'L' row, first 'R' row) of the jump, if any"""
        left = np.flatnonzero(self.branch == "L")
        right = np.flatnonzero(self.branch == "R")
        if left.size == 0 or right.size == 0:
            return None
        return int(left[-1]), int(right[0])

    @property
    def t_m(self) -> Optional[float]:
        folds = self.fold_indices()
        return None if folds is None else float(self.t[folds[0]])

    def singular_endpoint(self) -> Optional[int]:
        """Row index of an endpoint with |xi'| = 1"""
        for i in (0, self.t.size - 1):
            if self.branch[i] == "S" and abs(self.xi_p[i]) == 1.0:
                return i
        return None

    def evaluate(self, t) -> np.ndarray:
        """Linear interpolation of xi at t"""
        return np.interp(t, self.t, self.xi)

    def reflected(self) -> "CylinderProfile":
        """The profile under t -> -t"""
        return CylinderProfile(
            t=-self.t[::-1],
            xi=self.xi[::-1].copy(),
            xi_p=-self.xi_p[::-1],
            branch=np.array([SWAP_LABEL[b] for b in self.branch[::-1]]),
            regime=self.regime,
            spec=self.spec,
            tau=None if self.tau is None else self.tau[::-1].copy(),
            durations={SWAP_LABEL[key]: value for key, value in self.durations.items()},
        )

    def with_slopes(self, xi_p: np.ndarray) -> "CylinderProfile":
        return replace(self, xi_p=np.asarray(xi_p, dtype=float))


@dataclass(frozen=True)
class _Branch:
    """Samples of one monotone branch, first node at the top"""
    xi: np.ndarray
    speed: np.ndarray  # |xi'|
    cells: np.ndarray  # time spent in each cell

    @property
    def elapsed(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.cells)))

    @property
    def remaining(self) -> np.ndarray:
        return np.concatenate((np.cumsum(self.cells[::-1])[::-1], [0.0]))


def _fold_nodes(w_end: float, grid: GridControl, k: int) -> np.ndarray:
    """Uniform nodes on [0, w_end] merged with geometric nodes clustered at 0"""
    n_geo = int(round(grid.points_per_branch * grid.geometric_fraction))
    n_uni = grid.points_per_branch - n_geo
    parts = [np.linspace(0.0, w_end, n_uni)]
    w_min = grid.fold_offset_min ** (1.0 / k)
    if n_geo > 1 and w_min < w_end:
        parts.append(np.geomspace(w_min, w_end, n_geo))
    nodes = np.unique(np.concatenate(parts))
    nodes = nodes[np.concatenate(([True], np.diff(nodes) > 1e-14 * w_end))]
    nodes[-1] = w_end
    return nodes


def _w_branch(level: LevelSet, w: np.ndarray, xi_top: float, xi_bottom: float) -> _Branch:
    """Branch sampled at xi = peak - w^k"""
    xi = level.peak_xi - w ** level.k
    xi[0], xi[-1] = xi_top, xi_bottom
    speed = np.sqrt(1.0 + speed_squared_excess(xi, level))
    return _Branch(xi=xi, speed=speed, cells=fold_segment_times(w, level))


def _fold_branch(level: LevelSet, xi_end: float, grid: GridControl) -> _Branch:
    """From the fold down to xi_end, clustered toward the fold"""
    peak = level.peak_xi
    w = _fold_nodes((peak - xi_end) ** (1.0 / level.k), grid, level.k)
    return _w_branch(level, w, peak, xi_end)


def _smooth_branch(level: LevelSet, xi_top: float, xi_bottom: float, grid: GridControl) -> _Branch:
    """From xi_top down to xi_bottom on a level that does not fold in between"""
    count = grid.points_per_branch
    if level.has_fold:
        peak, k = level.peak_xi, level.k
        w_top = max(peak - xi_top, 0.0) ** (1.0 / k)
        w_bottom = (peak - xi_bottom) ** (1.0 / k)
        return _w_branch(level, np.linspace(w_top, w_bottom, count), xi_top, xi_bottom)
    xi = np.linspace(xi_top, xi_bottom, count)
    speed = np.sqrt(1.0 + speed_squared_excess(xi, level))
    return _Branch(xi=xi, speed=speed, cells=xi_segment_times(xi, level.s, level.n, level.k))


def _check_length(actual: float, expected: float, what: str) -> None:
    if abs(actual - expected) > config.ENDPOINT_TIME_TOL:
        raise ConsistencyError(f"{what}: tabulated length {actual:.12g} differs from {expected:.12g}")


def build_profile(spec: ProblemSpec, regime: Regime, grid: Optional[GridControl] = None) -> CylinderProfile:
    """
    Tabulate the cylinder profile of the solution classified by regime

    Args:
        spec: Problem data
        regime: Result of classify(spec)
        grid: Sampling controls

    Returns:
        CylinderProfile on [-T, T], or on [-T + tau_end, T - tau_end] for
        blow-up data truncated at height min(xi_floor, p - margin)
    """
    grid = grid or GridControl()
    level = LevelSet(regime.H, spec.n, spec.k)
    T = spec.T
    flip = regime.normalized_flip
    tag = regime.tag

    if tag in (RegimeTag.CASE1_SMOOTH, RegimeTag.CASE2_LEFT_SINGULAR, RegimeTag.CASE3_RIGHT_SINGULAR):
        high, low = max(spec.p_a, spec.p_b), min(spec.p_a, spec.p_b)
        if tag is RegimeTag.CASE1_SMOOTH:
            branch = _smooth_branch(level, high, low, grid)
        else:
            branch = _fold_branch(level, low, grid)
        elapsed = branch.elapsed
        _check_length(elapsed[-1], 2.0 * T, tag.value)
        t = -T + elapsed
        t[-1] = T
        profile = CylinderProfile(
            t=t, xi=branch.xi, xi_p=-branch.speed,
            branch=np.full(t.size, "S"), regime=regime, spec=spec,
            durations={"S": float(elapsed[-1])},
        )
        return profile.reflected() if flip else profile

    if tag is RegimeTag.INFINITE_BC:
        xi_end = min(grid.xi_floor, regime.p - grid.xi_floor_margin)
        right = _fold_branch(level, xi_end, grid)
        left = right
        t_m = 0.0
        tail = boundary_tail_time(xi_end, level)
        _check_length(right.elapsed[-1] + tail, T, "blow-up branch")
    else:
        high, low = max(spec.p_a, spec.p_b), min(spec.p_a, spec.p_b)
        right = _fold_branch(level, low, grid)
        left = right if spec.symmetric else _fold_branch(level, high, grid)
        t_m = -regime.t_m if flip else regime.t_m
        _check_length(right.elapsed[-1], T - t_m, "outer branch")
        _check_length(left.elapsed[-1], T + t_m, "inner branch")

    t_left = (t_m - left.elapsed)[::-1]
    t_right = t_m + right.elapsed
    if not spec.infinite:
        t_left[0], t_right[-1] = -T, T
    tau = None
    if spec.infinite:
        tau_right = tail + right.remaining
        tau = np.concatenate((tau_right[::-1], tau_right))
    profile = CylinderProfile(
        t=np.concatenate((t_left, t_right)),
        xi=np.concatenate((left.xi[::-1], right.xi)),
        xi_p=np.concatenate((left.speed[::-1], -right.speed)),
        branch=np.array(["L"] * left.xi.size + ["R"] * right.xi.size),
        regime=regime,
        spec=spec,
        tau=tau,
        durations={"L": float(left.elapsed[-1]), "R": float(right.elapsed[-1])},
    )
    return profile.reflected() if flip else profile


@dataclass(frozen=True)
class BoundaryAsymptote:
    """Fit of log u against log d over the last resolved decade of d"""
    side: str
    slope: float
    coefficient: float  # median of u * d^{(n-2)/2}
    variation: float  # relative spread of that product
    samples: int


def fit_boundary_asymptote(d: np.ndarray, u: np.ndarray, n: int, side: str) -> BoundaryAsymptote:
    """u ~ C d^{-(n-2)/2} as the distance d to the boundary goes to 0"""
    d = np.asarray(d, dtype=float)
    u = np.asarray(u, dtype=float)
    mask = (d > 0.0) & (d <= 10.0 * np.min(d[d > 0.0]))
    if np.count_nonzero(mask) < 3:
        raise InsufficientResolutionError(f"{side}: fewer than 3 samples in the last decade")
    slope = float(np.polyfit(np.log(d[mask]), np.log(u[mask]), 1)[0])
    product = u[mask] * d[mask] ** (0.5 * (n - 2))
    median = float(np.median(product))
    variation = float((product.max() - product.min()) / median)
    return BoundaryAsymptote(side, slope, median, variation, int(np.count_nonzero(mask)))


@dataclass(frozen=True, eq=False)
class RadialSolution:
    """
    u(r) and d(ln u)/dr on the annulus

    At a jump radius m the one-sided log-derivatives are -(n-2)/m from
    inside and 0 from outside.
    """
    r: np.ndarray
    u: np.ndarray
    dlnu_dr: np.ndarray
    branch: np.ndarray
    regime: Regime
    m: Optional[float] = None
    dlnu_left: Optional[float] = None
    dlnu_right: Optional[float] = None
    boundary_distance: Optional[np.ndarray] = None
    asymptotes: Tuple[BoundaryAsymptote, ...] = ()


def boundary_distances(profile: CylinderProfile) -> np.ndarray:
    """Distance to the nearer boundary sphere, rows of the jump branches"""
    spec = profile.spec
    left = profile.branch == "L"
    if profile.tau is not None:
        return np.where(left, spec.a * np.expm1(profile.tau), -spec.b * np.expm1(-profile.tau))
    return np.where(left, spec.a * np.expm1(profile.t + spec.T), -spec.b * np.expm1(profile.t - spec.T))


def reconstruct_u(profile: CylinderProfile) -> RadialSolution:
    """Map a cylinder profile back to (r, u, d ln u / dr)"""
    spec = profile.spec
    r, _ = from_cylinder(profile.t, profile.xi, spec)
    r = np.atleast_1d(r).copy()
    if not spec.infinite:
        r[0], r[-1] = spec.a, spec.b
    u = np.exp(-0.5 * (spec.n - 2) * (profile.xi + np.log(r)))
    dlnu = dlnu_dr_from_slope(profile.xi_p, r, spec.n)

    m = dlnu_left = dlnu_right = None
    folds = profile.fold_indices()
    if folds is not None:
        i_left, i_right = folds
        m = float(r[i_left])
        dlnu_left, dlnu_right = float(dlnu[i_left]), float(dlnu[i_right])

    distance = None
    asymptotes: List[BoundaryAsymptote] = []
    if spec.infinite:
        distance = boundary_distances(profile)
        for label, side in (("L", "inner"), ("R", "outer")):
            mask = profile.branch == label
            asymptotes.append(fit_boundary_asymptote(distance[mask], u[mask], spec.n, side))

    return RadialSolution(
        r=r, u=u, dlnu_dr=dlnu, branch=profile.branch, regime=profile.regime,
        m=m, dlnu_left=dlnu_left, dlnu_right=dlnu_right,
        boundary_distance=distance, asymptotes=tuple(asymptotes),
    )


@dataclass(frozen=True)
class RebuildResult:
    H: float
    max_time_error: float
    max_slope_error: float
    samples: int


def rebuild_from_state(profile: CylinderProfile, index: int, samples: int = 20,
                       tol: float = 1e-12) -> RebuildResult:
    """
    Regrow a branch from the state (xi, xi') at one row and compare

    The level through the row fixes every other state on its branch: the
    time to each sampled row and the slope there.
    """
    if not 0 <= index < profile.t.size:
        raise ArgumentError(f"row {index} outside the profile")
    n, k = profile.n, profile.k
    xi0, slope0, t0 = profile.xi[index], profile.xi_p[index], profile.t[index]
    level = LevelSet.through(xi0, slope0, n, k)
    rows = np.flatnonzero((profile.branch == profile.branch[index]) & ~profile.singular_mask)
    picks = rows[np.unique(np.linspace(0, rows.size - 1, samples).astype(int))]
    time_err = slope_err = 0.0
    for j in picks:
        lo, hi = sorted((profile.xi[j], xi0))
        elapsed = level_time(lo, hi, level.s, n, k, tol).value
        time_err = max(time_err, abs(abs(profile.t[j] - t0) - elapsed))
        sign = math.copysign(1.0, profile.xi_p[j])
        slope_err = max(slope_err, abs(slope_on_level(profile.xi[j], level, sign) - profile.xi_p[j])
                        / abs(profile.xi_p[j]))
    return RebuildResult(level.H, time_err, slope_err, int(picks.size))


@dataclass(frozen=True)
class TouchingCertificate:
    """
    Evidence that no C^2 function touches u from below at the jump

    Any such test function has d(ln phi)/dr strictly between the one-sided
    values, i.e. |xi'| < 1 in cylinder form, which puts its eigenvalues
    outside Gamma_k whatever its curvature.
    """
    has_jump: bool
    passed: bool
    m: Optional[float] = None
    dlnu_left: Optional[float] = None
    dlnu_right: Optional[float] = None
    gap: Optional[float] = None
    slope_endpoints: Optional[Tuple[float, float]] = None
    excluded: int = 0
    sampled: int = 0

    def to_dict(self) -> dict:
        return {
            "has_jump": self.has_jump,
            "passed": self.passed,
            "m": self.m,
            "dlnu_left": self.dlnu_left,
            "dlnu_right": self.dlnu_right,
            "gap": self.gap,
            "slope_endpoints": None if self.slope_endpoints is None else list(self.slope_endpoints),
            "excluded": self.excluded,
            "sampled": self.sampled,
        }


def touching_certificate(profile: CylinderProfile) -> TouchingCertificate:
    """
    Certify the jump of a Case 4 or blow-up profile

    Vacuous (passed, has_jump False) without a jump.

    Raises:
        CertificationError: one-sided derivatives do not leave a strict gap
    """
    folds = profile.fold_indices()
    if folds is None:
        return TouchingCertificate(has_jump=False, passed=True)
    spec = profile.spec
    n, k = spec.n, spec.k
    i_left, i_right = folds
    t_m = float(profile.t[i_left])
    m = math.exp(t_m + spec.log_center)
    left = float(dlnu_dr_from_slope(profile.xi_p[i_left], m, n))
    right = float(dlnu_dr_from_slope(profile.xi_p[i_right], m, n))
    gap = right - left
    if not gap > 0.0:
        raise CertificationError(f"one-sided derivatives {left:.6g}, {right:.6g} leave no gap")
    endpoints = (float(slope_from_dlnu_dr(left, m, n)), float(slope_from_dlnu_dr(right, m, n)))

    excluded = sampled = 0
    for fraction in config.CERTIFICATE_SLOPE_FRACTIONS:
        slope = float(slope_from_dlnu_dr(left + fraction * gap, m, n))
        for curvature in config.CERTIFICATE_CURVATURES:
            state = CylinderState(t_m, float(profile.xi[i_left]), slope, curvature)
            sample = AmbientSample(m, profile_from_state(state, n, spec.log_center), m * config.ORACLE_REL_STEP)
            result = ambient_oracle_sigma_k(sample, n, k)
            sampled += 1
            if not in_gamma_k(result.eigenvalues, k):
                excluded += 1
    return TouchingCertificate(
        has_jump=True, passed=excluded == sampled, m=m,
        dlnu_left=left, dlnu_right=right, gap=gap,
        slope_endpoints=endpoints, excluded=excluded, sampled=sampled,
    )


def solve(spec: ProblemSpec, grid: Optional[GridControl] = None,
          classify_tol: float = config.CLASSIFY_TOL) -> Tuple[Regime, CylinderProfile, RadialSolution]:
    """Classify, build and reconstruct in one call"""
    grid = grid or GridControl()
    regime = classify(spec, classify_tol, grid.root_tol, grid.quad_tol)
    profile = build_profile(spec, regime, grid)
    return regime, profile, reconstruct_u(profile)
