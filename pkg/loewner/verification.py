"""
Independent audit of constructed profiles

Checks a profile against the PDE on every resolved row, the constancy of
the first integral, the cone condition, the Hoelder exponent at singular
anchors, the one-sided derivatives at a jump, the blow-up rate at the
boundary for infinite data, and the touching certificate.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from loewner import config
from loewner.cylinder import (
    LevelSet,
    dlnu_dr_from_slope,
    first_integral_drift,
    sigma_k_on_level,
    slope_on_level,
    target_sigma,
)
from loewner.errors import (
    ArgumentError,
    InsufficientResolutionError,
    LoewnerError,
    NoSingularAnchorError,
)
from loewner.logger import AuditLogger
from loewner.models import GridControl, ProblemSpec
from loewner.solver import (
    BoundaryAsymptote,
    CylinderProfile,
    RadialSolution,
    build_profile,
    classify,
    reconstruct_u,
    touching_certificate,
)

logger = logging.getLogger(__name__)
audit_log = AuditLogger()

FAULT_KINDS = ("clamp_slope", "perturb_level", "flip_sign")


class CertificateReport(BaseModel):
    has_jump: bool
    passed: bool
    m: Optional[float] = None
    gap: Optional[float] = None
    dlnu_left: Optional[float] = None
    dlnu_right: Optional[float] = None
    slope_endpoints: Optional[List[float]] = None
    excluded: int = 0
    sampled: int = 0


class VerificationReport(BaseModel):
    """Outcome of auditing one profile"""
    spec: Dict = Field(default_factory=dict)
    regime: str = ""
    borderline: bool = False
    passed: bool = False
    pde_residual_rel: Optional[float] = None
    residual_rows: int = 0
    residual_ok: Optional[bool] = None
    h_drift: Optional[float] = None
    drift_ok: Optional[bool] = None
    cone_violations: Optional[int] = None
    cone_ok: Optional[bool] = None
    holder_exponent: Optional[float] = None
    holder_stderr: Optional[float] = None
    holder_ok: Optional[bool] = None
    jump_radius: Optional[float] = None
    jump_left: Optional[float] = None
    jump_right: Optional[float] = None
    jump_ok: Optional[bool] = None
    boundary_slope: Optional[float] = None
    boundary_coefficient: Optional[float] = None
    boundary_variation: Optional[float] = None
    boundary_ok: Optional[bool] = None
    certificate: Optional[CertificateReport] = None
    checks: Dict[str, bool] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)


@dataclass(frozen=True)
class HolderFit:
    exponent: float
    stderr: float
    samples: int
    anchor: float
    side: str


@dataclass(frozen=True)
class SharpnessWitness:
    """Hoelder quotients at dyadic distances from an anchor"""
    gamma: float
    offsets: Tuple[float, ...]
    quotients: Tuple[float, ...]
    growth: Tuple[float, ...]  # quotient growth per exact halving
    found: bool


@dataclass(frozen=True)
class JumpEstimate:
    m: float
    left: float
    right: float
    expected_left: float
    expected_right: float

    def within(self, rel_tol: float) -> bool:
        scale = abs(self.expected_left)
        return (abs(self.left - self.expected_left) <= rel_tol * scale
                and abs(self.right - self.expected_right) <= rel_tol * scale)


def _anchor(profile: CylinderProfile, side: Optional[str]) -> Tuple[float, str]:
    """Anchor time and the side of it to sample"""
    folds = profile.fold_indices()
    if folds is not None:
        return float(profile.t[folds[0]]), side or "right"
    end = profile.singular_endpoint()
    if end is None:
        raise NoSingularAnchorError("profile has neither a jump nor a singular endpoint")
    return float(profile.t[end]), "right" if end == 0 else "left"


def _side_rows(profile: CylinderProfile, anchor: float, side: str) -> np.ndarray:
    if side not in ("left", "right"):
        raise ArgumentError(f"side must be 'left' or 'right', got {side!r}")
    open_rows = ~profile.singular_mask
    if side == "right":
        return np.flatnonzero(open_rows & (profile.t > anchor))
    return np.flatnonzero(open_rows & (profile.t < anchor))


def fit_holder_exponent(profile: CylinderProfile, side: Optional[str] = None,
                        window: Tuple[float, float] = config.HOLDER_WINDOW,
                        min_samples: int = config.HOLDER_MIN_SAMPLES) -> HolderFit:
    """
    Exponent of xi'^2 - 1 ~ |t - anchor|^gamma near a singular anchor

    Regresses log(xi'^2 - 1) on log|t - anchor| together with xi'^2 - 1
    itself, which absorbs the leading correction to the power law.

    Raises:
        NoSingularAnchorError: smooth profile
        InsufficientResolutionError: fewer than min_samples rows in window
    """
    anchor, side = _anchor(profile, side)
    rows = _side_rows(profile, anchor, side)
    delta = np.abs(profile.t[rows] - anchor)
    excess = profile.xi_p[rows] ** 2 - 1.0
    keep = (delta >= window[0]) & (delta <= window[1]) & (excess > 0.0)
    if np.count_nonzero(keep) < min_samples:
        raise InsufficientResolutionError(
            f"{np.count_nonzero(keep)} samples in [{window[0]:g}, {window[1]:g}], need {min_samples}")
    delta, excess = delta[keep], excess[keep]
    design = np.column_stack((np.log(delta), excess, np.ones_like(delta)))
    target = np.log(excess)
    coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    dof = max(delta.size - design.shape[1], 1)
    cov = np.linalg.pinv(design.T @ design) * float(resid @ resid) / dof
    return HolderFit(float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), int(delta.size), anchor, side)


def sharpness_witness(profile: CylinderProfile, gamma: float, side: Optional[str] = None,
                      delta0: float = config.WITNESS_DELTA, halvings: int = config.WITNESS_HALVINGS,
                      slack: float = config.WITNESS_SLACK) -> SharpnessWitness:
    """
    Look for growth of the gamma-Hoelder quotient of xi' near the anchor

    The quotient is evaluated at the rows nearest delta0 / 2^j. A witness
    needs every per-halving growth to be at least 2^{gamma - 1/k - slack}
    and above 2^{slack}; for gamma <= 1/k the quotients stay bounded and
    no witness is found.
    """
    anchor, side = _anchor(profile, side)
    rows = _side_rows(profile, anchor, side)
    delta_rows = np.abs(profile.t[rows] - anchor)
    offsets, quotients = [], []
    for j in range(halvings + 1):
        target = delta0 / 2.0 ** j
        i = rows[int(np.argmin(np.abs(np.log(delta_rows / target))))]
        delta = abs(profile.t[i] - anchor)
        offsets.append(delta)
        quotients.append((abs(profile.xi_p[i]) - 1.0) / delta ** gamma)
    growth = tuple(
        (quotients[j + 1] / quotients[j]) ** (1.0 / math.log2(offsets[j] / offsets[j + 1]))
        for j in range(halvings)
    )
    expected = 2.0 ** (gamma - 1.0 / profile.k - slack)
    found = all(g >= expected and g > 2.0 ** slack for g in growth)
    return SharpnessWitness(gamma, tuple(offsets), tuple(quotients), growth, found)


def extrapolate_jump(profile: CylinderProfile, degree: int = config.JUMP_FIT_DEGREE,
                     span: float = config.JUMP_FIT_SPAN) -> JumpEstimate:
    """
    One-sided limits of d(ln u)/dr at the jump

    Near the fold d(ln u)/dr is a smooth function of w = (xi_m - xi)^{1/k};
    a polynomial in w fitted on the rows closest to the fold is evaluated
    at w = 0.
    """
    folds = profile.fold_indices()
    if folds is None:
        raise NoSingularAnchorError("profile has no jump")
    spec = profile.spec
    n, k = spec.n, spec.k
    i_left, i_right = folds
    xi_m = profile.xi[i_left]
    m = math.exp(profile.t[i_left] + spec.log_center)

    def limit(rows: np.ndarray) -> float:
        w = np.maximum(xi_m - profile.xi[rows], 0.0) ** (1.0 / k)
        positive = w > 0.0
        rows, w = rows[positive], w[positive]
        near = w <= span * w.min()
        if np.count_nonzero(near) < degree + 3:
            raise InsufficientResolutionError("too few rows near the jump to extrapolate")
        r = np.exp(profile.t[rows[near]] + spec.log_center)
        values = dlnu_dr_from_slope(profile.xi_p[rows[near]], r, n)
        scale = w[near].max()
        return float(np.polyfit(w[near] / scale, values, degree)[-1])

    left = limit(np.flatnonzero(profile.branch == "L")[:-1][::-1])
    right = limit(np.flatnonzero(profile.branch == "R")[1:])
    return JumpEstimate(m, left, right, -(n - 2) / m, 0.0)


def _residual_rows(profile: CylinderProfile) -> np.ndarray:
    """Open rows at least SINGULAR_GUARD away from every singular anchor"""
    guard = config.SINGULAR_GUARD
    t, T = profile.t, profile.T
    mask = ~profile.singular_mask
    t_m = profile.t_m
    if t_m is not None:
        mask &= np.abs(t - t_m) > guard
    if profile.spec.infinite:
        mask &= np.abs(np.abs(t) - T) > guard
    end = profile.singular_endpoint()
    if end is not None:
        mask &= np.abs(t - t[end]) > guard
    return mask


def _orientation_violations(profile: CylinderProfile) -> np.ndarray:
    """Open rows whose slope sign disagrees with the tabulated direction of xi"""
    bad = np.zeros(profile.t.size, dtype=bool)
    for label in np.unique(profile.branch):
        rows = np.flatnonzero(profile.branch == label)
        if rows.size < 2:
            continue
        ahead = np.concatenate((rows[1:], rows[-1:]))
        behind = np.concatenate((rows[:1], rows[:-1]))
        direction = np.sign(profile.xi[ahead] - profile.xi[behind]) * np.sign(
            profile.t[ahead] - profile.t[behind])
        disagree = (direction != 0.0) & (np.sign(profile.xi_p[rows]) != direction)
        bad[rows] = disagree
    return bad & ~profile.singular_mask


def audit(profile: CylinderProfile, solution: Optional[RadialSolution] = None) -> VerificationReport:
    """Run every applicable check on a profile"""
    spec = profile.spec
    n, k = spec.n, spec.k
    level = LevelSet(profile.regime.H, n, k)
    report = VerificationReport(spec=spec.describe(), regime=profile.regime.tag.value,
                                borderline=profile.regime.borderline)
    checks: Dict[str, bool] = {}

    xi, xi_p = profile.xi, profile.xi_p
    open_rows = ~profile.singular_mask
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        sigma = sigma_k_on_level(xi, xi_p, level)
    target = target_sigma(n, k)

    rows = _residual_rows(profile)
    report.residual_rows = int(np.count_nonzero(rows))
    if report.residual_rows:
        rel = np.abs(sigma[rows] - target) / target
        report.pde_residual_rel = float(np.nanmax(rel)) if not np.any(np.isnan(rel)) else math.inf
        report.residual_ok = report.pde_residual_rel <= config.RESIDUAL_REL_TOL
        checks["residual"] = report.residual_ok
        audit_log.verdict("residual", report.residual_ok, f"{report.pde_residual_rel:.3e}")

    drift = first_integral_drift(xi, xi_p, level.H, n, k)
    report.h_drift = float(np.max(drift)) if not np.any(np.isnan(drift)) else math.inf
    report.drift_ok = report.h_drift <= config.DRIFT_TOL
    checks["drift"] = report.drift_ok
    audit_log.verdict("drift", report.drift_ok, f"{report.h_drift:.3e}")

    with np.errstate(invalid='ignore'):
        violations = open_rows & ~((np.abs(xi_p) > 1.0) & (sigma > 0.0))
    violations |= _orientation_violations(profile)
    report.cone_violations = int(np.count_nonzero(violations))
    report.cone_ok = report.cone_violations == 0
    checks["cone"] = report.cone_ok
    audit_log.verdict("cone", report.cone_ok, f"{report.cone_violations} rows")

    folds = profile.fold_indices()
    if folds is not None or profile.singular_endpoint() is not None:
        try:
            sides = ("left", "right") if folds is not None else (None,)
            fits = [fit_holder_exponent(profile, side) for side in sides]
            report.holder_exponent = fits[-1].exponent
            report.holder_stderr = fits[-1].stderr
            report.holder_ok = all(
                abs(fit.exponent - 1.0 / k) <= config.HOLDER_REL_TOL / k for fit in fits)
        except InsufficientResolutionError as e:
            report.holder_ok = False
            report.notes.append(f"holder: {e}")
        checks["holder"] = report.holder_ok
        audit_log.verdict("holder", report.holder_ok, f"{report.holder_exponent}")
    else:
        audit_log.skipped("holder", "no singular anchor")

    if folds is not None:
        try:
            jump = extrapolate_jump(profile)
            report.jump_radius, report.jump_left, report.jump_right = jump.m, jump.left, jump.right
            report.jump_ok = jump.within(config.JUMP_REL_TOL)
        except InsufficientResolutionError as e:
            report.jump_ok = False
            report.notes.append(f"jump: {e}")
        checks["jump"] = report.jump_ok
        audit_log.verdict("jump", report.jump_ok, f"left={report.jump_left} right={report.jump_right}")

        try:
            cert = touching_certificate(profile)
            report.certificate = CertificateReport(**cert.to_dict())
            checks["certificate"] = cert.passed
        except LoewnerError as e:
            report.certificate = CertificateReport(has_jump=True, passed=False)
            report.notes.append(f"certificate: {e}")
            checks["certificate"] = False
        audit_log.verdict("certificate", checks["certificate"])

    if spec.infinite:
        try:
            solution = solution or reconstruct_u(profile)
            ok = True
            for fit, fit_ok in boundary_fit(solution, n):
                ok = ok and fit_ok
                report.boundary_slope = fit.slope
                report.boundary_coefficient = fit.coefficient
                report.boundary_variation = max(report.boundary_variation or 0.0, fit.variation)
            report.boundary_ok = ok
        except LoewnerError as e:
            report.boundary_ok = False
            report.notes.append(f"boundary: {e}")
        checks["boundary"] = report.boundary_ok
        audit_log.verdict("boundary", report.boundary_ok, f"slope={report.boundary_slope}")

    report.checks = checks
    report.passed = all(checks.values())
    return report


def boundary_fit(solution: RadialSolution, n: int) -> List[Tuple[BoundaryAsymptote, bool]]:
    """
    Judge the blow-up rate at each boundary sphere

    The slope of log u against log d must be within BOUNDARY_SLOPE_REL_TOL
    of -(n-2)/2 and u d^{(n-2)/2} must vary by less than
    BOUNDARY_STABILITY_TOL over the last decade. The coefficient itself is
    reported only.
    """
    if not solution.asymptotes:
        raise ArgumentError("solution carries no boundary asymptotes")
    expected = -0.5 * (n - 2)
    results = []
    for fit in solution.asymptotes:
        ok = (abs(fit.slope - expected) <= config.BOUNDARY_SLOPE_REL_TOL * abs(expected)
              and fit.variation <= config.BOUNDARY_STABILITY_TOL)
        results.append((fit, ok))
    return results


def inject_fault(profile: CylinderProfile, kind: str) -> CylinderProfile:
    """
    Corrupt a profile in a way the audit must catch

    clamp_slope: |xi'| = 0.5 on a stretch of the first branch
    perturb_level: slopes of the first branch recomputed on H * (1 - 1e-3)
    flip_sign: the slope of one interior row changes sign
    """
    if kind not in FAULT_KINDS:
        raise ArgumentError(f"unknown fault {kind!r}, expected one of {FAULT_KINDS}")
    xi_p = profile.xi_p.copy()
    first = np.flatnonzero((profile.branch == profile.branch[0]) & ~profile.singular_mask)
    if kind == "clamp_slope":
        stretch = first[int(0.4 * first.size):int(0.5 * first.size)]
        xi_p[stretch] = 0.5 * np.sign(xi_p[stretch])
    elif kind == "perturb_level":
        shifted = LevelSet(profile.regime.H * (1.0 - 1e-3), profile.n, profile.k)
        xi_p[first] = np.sign(xi_p[first]) * np.abs(slope_on_level(profile.xi[first], shifted))
    else:
        row = first[first.size // 2]
        xi_p[row] = -xi_p[row]
    logger.debug(f"injected fault {kind}")
    return profile.with_slopes(xi_p)


def audit_spec(spec: ProblemSpec, grid: Optional[GridControl] = None) -> VerificationReport:
    """Classify, build and audit one problem; failures become failing reports"""
    grid = grid or GridControl()
    try:
        regime = classify(spec, config.CLASSIFY_TOL, grid.root_tol, grid.quad_tol)
        profile = build_profile(spec, regime, grid)
        return audit(profile)
    except LoewnerError as e:
        logger.error(f"audit of {spec.describe()} failed: {e}")
        return VerificationReport(spec=spec.describe(), passed=False,
                                  notes=[f"{type(e).__name__}: {e}"])


def run_matrix(specs: Sequence[ProblemSpec], grid: Optional[GridControl] = None,
               threads: int = 1) -> List[VerificationReport]:
    """Audit many problems, reports in input order"""
    if threads < 1:
        raise ArgumentError(f"threads must be >= 1, got {threads}")
    if threads == 1:
        return [audit_spec(spec, grid) for spec in specs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda spec: audit_spec(spec, grid), specs))
