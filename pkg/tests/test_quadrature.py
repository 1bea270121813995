"""
Tests for travel-time integrals
"""
import math

import numpy as np
import pytest

from loewner import config
from loewner.cylinder import LevelSet, slope_on_level
from loewner.errors import DomainError, QuadratureBudgetError, RegimeError
from loewner.models import ProblemSpec
from loewner.quadrature import (
    QuadResult,
    T_bc,
    T_of_p,
    boundary_tail_time,
    fold_segment_times,
    level_time,
    tail_cutoff,
    time_between_levels,
    time_kernel,
    xi_segment_times,
)


def _midpoint_T(p, n, k, panels=1_000_000):
    """Brute-force T(p): midpoint rule in w on the fold part, in eta beyond"""
    w = (np.arange(panels) + 0.5) / panels
    near = np.sum(k * w ** (k - 1) * time_kernel(-w ** k, p, n, k)) / panels
    cutoff = tail_cutoff(p, 1e-13)
    h = (cutoff - 1.0) / panels
    eta = -1.0 - (np.arange(panels) + 0.5) * h
    far = np.sum(time_kernel(eta, p, n, k)) * h
    return near + far


def test_kernel_values():
    """K(0) = 1 and K matches the closed form"""
    assert time_kernel(0.0, 0.0, 7, 2) == 1.0
    assert time_kernel(0.0, -3.0, 7, 2) == 1.0
    expected = 1.0 / math.sqrt(1.0 + math.exp(2.0) * math.sqrt(1.0 - math.exp(-7.0)))
    assert time_kernel(-1.0, 0.0, 7, 2) == pytest.approx(expected, rel=1e-14)


def test_kernel_far_tail_is_finite():
    """No overflow for very negative eta"""
    value = time_kernel(-800.0, 0.0, 7, 2)
    assert 0.0 <= value < 1e-300


def test_kernel_domain():
    """eta > 0 lies above the fold"""
    with pytest.raises(DomainError):
        time_kernel(0.1, 0.0, 7, 2)


@pytest.mark.parametrize("n,k,p", [(7, 2, 0.0), (7, 2, 1.3), (5, 3, -0.5), (10, 4, 2.0)])
def test_T_of_p_matches_midpoint_oracle(n, k, p):
    """Adaptive result agrees with a million-panel midpoint sum"""
    result = T_of_p(p, n, k)
    assert result.value == pytest.approx(_midpoint_T(p, n, k), abs=1e-9)
    assert result.abs_error <= 1e-10
    assert result.evaluations > 0


def test_T_of_p_monotone_and_limits():
    """T increases with p, is large for large p and small for negative p"""
    ps = np.linspace(-5.0, 5.0, 21)
    values = [T_of_p(p, 7, 2).value for p in ps]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert T_of_p(20.0, 7, 2).value > 10.0
    assert T_of_p(-10.0, 7, 2).value < 1e-3


def test_tail_bound_is_sound():
    """Doubling the cutoff moves the value by less than the tail bound"""
    p = 0.5
    short = T_of_p(p, 7, 2, cutoff=8.0)
    long = T_of_p(p, 7, 2, cutoff=16.0)
    assert abs(long.value - short.value) <= short.tail_bound + short.abs_error + long.abs_error


def test_budget_error_carries_best_value(monkeypatch):
    """Running out of subintervals raises with the best estimate attached"""
    monkeypatch.setattr(config, "QUAD_LIMIT", 2)
    with pytest.raises(QuadratureBudgetError) as info:
        T_of_p(0.0, 7, 2, tol=1e-30)
    assert info.value.best is not None


def test_tolerance_below_resolution_settles_at_relative_precision():
    """An absolute tolerance finer than the value can resolve is met at a few ulps of the value"""
    coarse = T_of_p(0.3, 7, 2, tol=1e-10)
    fine = T_of_p(0.3, 7, 2, tol=1e-14)
    assert fine.value == pytest.approx(coarse.value, abs=2e-10)
    assert fine.abs_error <= 1e-12


def test_T_of_p_is_the_whole_branch_length():
    """T(p) equals the time from the fold down to -infinity"""
    level = LevelSet.from_peak(0.3, 7, 2)
    branch = time_between_levels(-math.inf, level.peak_xi, level, tol=1e-12).value
    assert T_of_p(0.3, 7, 2, tol=1e-12).value == pytest.approx(branch, abs=1e-10)


@pytest.mark.parametrize("n,k", [(7, 2), (5, 3), (8, 4)])
def test_branch_length_depends_only_on_the_level(n, k):
    """Two states (xi, xi') on one level give the same full-branch time"""
    level = LevelSet.from_peak(0.25, n, k)
    times = []
    for xi in (-0.1, -0.9):
        through = LevelSet.through(xi, slope_on_level(xi, level), n, k)
        times.append(time_between_levels(-math.inf, through.peak_xi, through, tol=1e-12).value)
    assert times[0] == pytest.approx(times[1], abs=2e-10)


def test_T_bc_basic_properties():
    """Zero for equal heights, below half the height gap otherwise"""
    equal = ProblemSpec.from_levels(7, 2, 1.0, 2.0, 0.5, 0.5)
    assert T_bc(equal).value == pytest.approx(0.0, abs=1e-15)
    spec = ProblemSpec.from_levels(7, 2, 1.0, 2.0, 1.0, -0.5)
    value = T_bc(spec).value
    assert 0.0 < value < 0.5 * 1.5
    swapped = ProblemSpec.from_levels(7, 2, 1.0, 2.0, -0.5, 1.0)
    assert T_bc(swapped).value == pytest.approx(value, rel=1e-12)
    with pytest.raises(RegimeError):
        T_bc(ProblemSpec.blow_up(7, 2, 1.0, 2.0))


def test_time_between_levels_additive():
    """Times over adjacent height intervals add up"""
    level = LevelSet.from_peak(0.4, 7, 2)
    whole = time_between_levels(-3.0, 0.4, level).value
    parts = time_between_levels(-3.0, -1.0, level).value + time_between_levels(-1.0, 0.4, level).value
    assert whole == pytest.approx(parts, abs=1e-10)
    full = time_between_levels(-math.inf, level.peak_xi, level).value
    assert full == pytest.approx(T_of_p(level.peak_xi, 7, 2).value, abs=1e-9)


def test_boundary_tail_time_accuracy():
    """Relative accuracy far down the tail, agreement with the adaptive integral higher up"""
    level = LevelSet.from_peak(0.5, 7, 2)
    assert boundary_tail_time(-20.0, level) == pytest.approx(math.asinh(math.exp(-20.0)), rel=1e-10)
    adaptive = time_between_levels(-math.inf, -2.0, level, tol=1e-12).value
    assert boundary_tail_time(-2.0, level) == pytest.approx(adaptive, abs=1e-10)


def test_cell_times_sum_to_adaptive_time():
    """Gauss-Legendre cell times on a w grid add up to the adaptive integral"""
    level = LevelSet.from_peak(0.2, 7, 3)
    xi_end = -4.0
    w = np.linspace(0.0, (level.peak_xi - xi_end) ** (1.0 / 3), 400)
    total = float(np.sum(fold_segment_times(w, level)))
    assert total == pytest.approx(time_between_levels(xi_end, level.peak_xi, level).value, abs=1e-10)


def test_xi_cell_times_without_fold():
    """Cell times on a level without fold match level_time"""
    xi = np.linspace(1.5, -1.0, 300)
    total = float(np.sum(xi_segment_times(xi, 2.0, 7, 2)))
    assert total == pytest.approx(level_time(-1.0, 1.5, 2.0, 7, 2).value, abs=1e-10)


def test_quad_result_arithmetic():
    a = QuadResult(1.0, 1e-12, 1e-13, 10)
    b = QuadResult(2.0, 2e-12, 0.0, 5)
    total = a + b
    assert total.value == 3.0 and total.evaluations == 15
    assert a.scaled(-0.5).value == -0.5 and a.scaled(-0.5).abs_error == 5e-13


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
