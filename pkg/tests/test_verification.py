"""
Tests for the profile audit
"""
import math

import pytest

from loewner import verification
from loewner.errors import ArgumentError, InconsistentDataError, NoSingularAnchorError
from loewner.models import ProblemSpec
from loewner.solver import RegimeTag, borderline_spec, solve
from loewner.verification import (
    FAULT_KINDS,
    audit,
    audit_spec,
    boundary_fit,
    extrapolate_jump,
    fit_holder_exponent,
    inject_fault,
    run_matrix,
    sharpness_witness,
)

BLOW_UP = ProblemSpec.blow_up(7, 2, 1.0, 10.0)
SMOOTH = ProblemSpec.from_levels(7, 2, 1.0, 1.1, 3.0, 0.0)
JUMP = ProblemSpec.from_levels(7, 2, 1.0, 10.0, 0.3, -1.6)


@pytest.fixture(scope="module")
def blow_up():
    return solve(BLOW_UP)


@pytest.fixture(scope="module")
def jump():
    return solve(JUMP)


@pytest.mark.parametrize("spec, tag", [
    (SMOOTH, RegimeTag.CASE1_SMOOTH),
    (borderline_spec(7, 2, 1.0, 0.5, -1.0), RegimeTag.CASE3_RIGHT_SINGULAR),
    (borderline_spec(7, 2, 1.0, -1.0, 0.5), RegimeTag.CASE2_LEFT_SINGULAR),
    (JUMP, RegimeTag.CASE4_INTERIOR_JUMP),
    (BLOW_UP, RegimeTag.INFINITE_BC),
    (ProblemSpec.blow_up(5, 3, 1.0, 4.0), RegimeTag.INFINITE_BC),
    (ProblemSpec.blow_up(3, 2, 1.0, 10.0), RegimeTag.INFINITE_BC),
    (ProblemSpec.blow_up(4, 2, 1.0, 10.0), RegimeTag.INFINITE_BC),
    (ProblemSpec.from_levels(4, 2, 1.0, 10.0, 0.3, -1.6), RegimeTag.CASE4_INTERIOR_JUMP),
    (ProblemSpec.blow_up(6, 4, 1.0, 4.0), RegimeTag.INFINITE_BC),
    (borderline_spec(6, 4, 1.0, 0.4, -0.8), RegimeTag.CASE3_RIGHT_SINGULAR),
    (ProblemSpec.from_levels(3, 2, 1.0, 1.1, 3.0, 0.0), RegimeTag.CASE1_SMOOTH),
    (ProblemSpec.from_levels(3, 2, 1.0, 10.0, 0.3, -1.6), RegimeTag.CASE4_INTERIOR_JUMP),
    (ProblemSpec.blow_up(6, 6, 1.0, 4.0), RegimeTag.INFINITE_BC),
    (ProblemSpec.from_levels(6, 6, 1.0, 1.1, 3.0, 0.0), RegimeTag.CASE1_SMOOTH),
    (ProblemSpec.from_levels(6, 6, 1.0, 10.0, 0.3, -1.6), RegimeTag.CASE4_INTERIOR_JUMP),
])
def test_audit_passes(spec, tag):
    """Every solution shape passes its own audit"""
    _, profile, solution = solve(spec)
    report = audit(profile, solution)
    assert report.regime == tag.value
    assert report.passed, report.checks
    assert report.residual_rows > 0


def test_blow_up_report(blow_up):
    """Jump at sqrt(ab), exponent 1/k, rate -(n-2)/2"""
    _, profile, solution = blow_up
    report = audit(profile, solution)
    assert report.jump_radius == pytest.approx(math.sqrt(10.0), rel=1e-10)
    assert report.jump_left == pytest.approx(-5.0 / math.sqrt(10.0), rel=1e-6)
    assert abs(report.jump_right) < 1e-6
    assert report.holder_exponent == pytest.approx(0.5, abs=0.025)
    assert report.boundary_slope == pytest.approx(-2.5, rel=0.01)
    assert report.certificate.passed and report.certificate.has_jump


def test_smooth_residual_survives_steep_rows():
    """Rows near the inner sphere have |xi'| > 100 and still meet the residual bound"""
    _, profile, _ = solve(SMOOTH)
    assert abs(profile.xi_p[0]) > 100.0
    report = audit(profile)
    assert report.residual_ok
    assert report.pde_residual_rel < 1e-9


def test_smooth_report_skips_anchored_checks():
    _, profile, _ = solve(SMOOTH)
    report = audit(profile)
    assert set(report.checks) == {"residual", "drift", "cone"}
    assert report.holder_exponent is None and report.certificate is None


@pytest.mark.parametrize("kind, check", [
    ("clamp_slope", "cone"),
    ("perturb_level", "drift"),
    ("flip_sign", "cone"),
])
def test_injected_faults_are_caught(jump, kind, check):
    """Each corruption fails the check aimed at it"""
    _, profile, _ = jump
    report = audit(inject_fault(profile, kind))
    assert not report.passed
    assert report.checks[check] is False


def test_fault_kinds_cover_parametrization():
    assert set(FAULT_KINDS) == {"clamp_slope", "perturb_level", "flip_sign"}
    with pytest.raises(ArgumentError):
        inject_fault(solve(SMOOTH)[1], "scramble")


def test_holder_needs_an_anchor():
    _, profile, _ = solve(SMOOTH)
    with pytest.raises(NoSingularAnchorError):
        fit_holder_exponent(profile)
    with pytest.raises(NoSingularAnchorError):
        extrapolate_jump(profile)


@pytest.mark.parametrize("side", ["left", "right"])
def test_holder_exponent_at_jump(jump, side):
    _, profile, _ = jump
    fit = fit_holder_exponent(profile, side)
    assert fit.exponent == pytest.approx(0.5, abs=0.025)
    assert fit.samples >= 10


@pytest.mark.parametrize("side", ["left", "right"])
def test_holder_exponent_fourth_order(side):
    """k = 4 blow-up profile: xi' + 1 ~ |t - t_m|^{1/4} on both sides of the jump"""
    _, profile, _ = solve(ProblemSpec.blow_up(9, 4, 1.0, 10.0))
    fit = fit_holder_exponent(profile, side)
    assert fit.exponent == pytest.approx(0.25, abs=0.05 / 4)
    assert fit.samples >= 10


def test_holder_exponent_at_singular_endpoint():
    """Case 3 profile anchors at the inner sphere"""
    _, profile, _ = solve(borderline_spec(5, 3, 1.0, 0.4, -0.8))
    fit = fit_holder_exponent(profile)
    assert fit.side == "right"
    assert fit.exponent == pytest.approx(1.0 / 3.0, abs=0.05 / 3.0)


def test_sharpness_witness(blow_up):
    """Quotients blow up above 1/k and stay bounded at 1/k"""
    _, profile, _ = blow_up
    above = sharpness_witness(profile, 0.5 + 0.2)
    assert above.found
    assert all(g >= 2.0 ** 0.18 for g in above.growth)
    at = sharpness_witness(profile, 0.5)
    assert not at.found


def test_jump_extrapolation(jump):
    _, profile, _ = jump
    estimate = extrapolate_jump(profile)
    assert estimate.within(1e-6)
    assert estimate.expected_left == pytest.approx(-5.0 / estimate.m)


def test_boundary_fit_needs_blow_up_data(jump):
    _, _, solution = jump
    with pytest.raises(ArgumentError):
        boundary_fit(solution, 7)


def test_audit_spec_turns_errors_into_reports(monkeypatch):
    """A solver failure becomes a failing report naming the error"""
    def refuse(*args, **kwargs):
        raise InconsistentDataError("ln(b/a) = 2 T_bc with p_a = p_b")

    monkeypatch.setattr(verification, "classify", refuse)
    report = audit_spec(SMOOTH)
    assert not report.passed
    assert report.notes[0].startswith("InconsistentDataError")
    assert report.spec["c1"] == SMOOTH.c1


def test_run_matrix_preserves_order():
    specs = [BLOW_UP, SMOOTH, JUMP]
    serial = run_matrix(specs)
    threaded = run_matrix(specs, threads=3)
    assert [r.regime for r in serial] == [r.regime for r in threaded] == [
        RegimeTag.INFINITE_BC.value, RegimeTag.CASE1_SMOOTH.value, RegimeTag.CASE4_INTERIOR_JUMP.value]
    assert all(r.passed for r in threaded)


def test_run_matrix_rejects_zero_threads():
    with pytest.raises(ArgumentError):
        run_matrix([SMOOTH], threads=0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
