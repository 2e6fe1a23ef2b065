"""
Tests for step functions, projection multiplicities, Favard lengths and the
combinatorial level-set checks.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.errors import DomainError, InvariantViolation
from src.geometry.systems import cells, gasket_system, triangle_config
from src.projection.combinatorics import bootstrap_check, l2_constant, stacking_ratio
from src.projection.degenerate import jacobian_audit, theta_to_t
from src.projection.engine import (
    bad_direction,
    buffon_estimate,
    check_mass,
    favard,
    favard_profile,
    level_set,
    multiplicity,
    quadrature_nodes,
    sup_multiplicity,
    support_length,
)
from src.projection.intervals import StepFunction, UnionOfIntervals, true_runs


# -- intervals ---------------------------------------------------------------

def test_true_runs():
    starts, stops = true_runs(np.array([False, True, True, False, True]))
    assert starts.tolist() == [1, 4]
    assert stops.tolist() == [3, 5]


def test_union_merges_overlaps():
    u = UnionOfIntervals.from_pairs([(0.5, 2.0), (0.0, 1.0), (3.0, 4.0)])
    assert list(u) == [(0.0, 2.0), (3.0, 4.0)]
    assert u.length == pytest.approx(3.0)
    assert u.contains([1.5, 2.5, 3.0]).tolist() == [True, False, True]


def test_union_rejects_unsorted_pairs():
    with pytest.raises(DomainError):
        UnionOfIntervals(np.array([[0.0, 1.0], [0.5, 2.0]]))
    with pytest.raises(DomainError):
        UnionOfIntervals(np.array([[1.0, 0.0]]))


def test_step_function_sweep():
    f = StepFunction.from_intervals([0.0, 1.0], [2.0, 3.0])
    assert f.breakpoints.tolist() == [0.0, 1.0, 2.0, 3.0]
    assert f.values.tolist() == [1, 2, 1]
    assert f.mass == pytest.approx(4.0)
    assert f.maximum == 2
    assert list(f.superlevel(2)) == [(1.0, 2.0)]
    assert f.support().length == pytest.approx(3.0)
    assert f([-1.0, 0.5, 1.5, 3.5]).tolist() == [0, 1, 2, 0]


def test_touching_intervals_leave_no_jump():
    f = StepFunction.from_intervals([0.0, 1.0], [1.0, 2.0])
    assert f.values.tolist() == [1]
    assert f.support().length == pytest.approx(2.0)


def test_constant_function_level_sets():
    f = StepFunction.from_intervals([-1.0], [1.0])
    assert f.superlevel(2).is_empty
    assert f.superlevel(1).length == pytest.approx(2.0)


def test_pointwise_max():
    a = StepFunction.from_intervals([0.0], [2.0])
    b = StepFunction.from_intervals([1.0, 1.0], [3.0, 3.0])
    top = a.pointwise_max(b)
    assert top.values.tolist() == [1, 2]
    assert top.breakpoints.tolist() == [0.0, 1.0, 3.0]


def test_cauchy_schwarz_floor_below_support():
    f = multiplicity(cells(gasket_system(), 4), 0.9)
    assert f.support_lower_bound() <= f.support().length + 1e-12


# -- projection engine -------------------------------------------------------

@given(
    n=st.integers(min_value=0, max_value=6),
    theta=st.floats(min_value=0.0, max_value=math.pi, exclude_max=True),
)
@settings(max_examples=60, deadline=None)
def test_mass_is_conserved(n, theta):
    cloud = cells(gasket_system(), n)
    f = multiplicity(cloud, theta)
    assert check_mass(f, cloud) <= 1e-9
    assert f.mass == pytest.approx(2.0, rel=1e-9)


def test_check_mass_raises_on_a_wrong_cloud():
    g = gasket_system()
    with pytest.raises(InvariantViolation):
        check_mass(multiplicity(cells(g, 1), 0.3), cells(g, 2))


def test_direction_outside_half_turn_rejected():
    cloud = cells(gasket_system(), 1)
    with pytest.raises(DomainError):
        multiplicity(cloud, math.pi)
    with pytest.raises(DomainError):
        multiplicity(cloud, -0.1)


def test_support_matches_dense_grid():
    cloud = cells(gasket_system(), 2)
    theta = 0.3
    p = cloud.projections(theta)
    lo, hi = p.min() - cloud.radius, p.max() + cloud.radius
    x = np.linspace(lo, hi, 1_000_001)
    covered = np.zeros(len(x), dtype=bool)
    for c in p:
        covered |= np.abs(x - c) <= cloud.radius
    grid_length = covered.mean() * (hi - lo)
    assert support_length(cloud, theta) == pytest.approx(grid_length, abs=1e-4)


def test_level_set_matches_direct_count():
    cloud = cells(gasket_system(), 4)
    theta, K = 0.7, 3
    p = cloud.projections(theta)
    ends = np.sort(np.concatenate((p - cloud.radius, p + cloud.radius)))
    mids = 0.5 * (ends[:-1] + ends[1:])
    counts = (np.abs(mids[:, None] - p[None, :]) <= cloud.radius).sum(axis=1)
    expected = float(np.sum(np.diff(ends)[counts >= K]))
    report = level_set(multiplicity(cloud, theta), K)
    assert report.measure == pytest.approx(expected, abs=1e-10)


def test_level_must_be_positive():
    with pytest.raises(DomainError):
        level_set(StepFunction.zero(), 0)


def test_favard_of_the_unit_disc_is_two():
    assert favard(gasket_system(), 0, theta_samples=16) == 2.0
    assert favard(gasket_system(), 0, theta_samples=16, quadrature="simpson") == pytest.approx(2.0, abs=1e-14)


def test_favard_is_monotone():
    values = [favard(gasket_system(), n, theta_samples=32) for n in range(6)]
    for a, b in zip(values, values[1:]):
        assert b <= a * (1 + 1e-9)
    assert 0 < values[-1] < 2


def test_favard_profile_reports_extremes():
    result = favard_profile(gasket_system(), 3, theta_samples=16)
    assert result.support_min <= result.favard <= result.support_max
    assert result.to_dict()["generation"] == 3


def test_quadrature_nodes():
    for kind in ("midpoint", "simpson"):
        nodes, weights = quadrature_nodes(16, kind)
        assert weights.sum() == pytest.approx(1.0)
        assert np.all((nodes >= 0) & (nodes < math.pi))
    with pytest.raises(DomainError):
        quadrature_nodes(15, "simpson")
    with pytest.raises(DomainError):
        quadrature_nodes(4)
    with pytest.raises(DomainError):
        quadrature_nodes(16, "trapezoid")


def test_buffon_agrees_with_favard():
    g = gasket_system()
    exact = favard(g, 1, theta_samples=512)
    estimate = buffon_estimate(cells(g, 1), 200_000, np.random.default_rng(7))
    assert 0 < exact < 2
    assert abs(estimate.estimate - exact) <= 4 * estimate.standard_error


def test_buffon_on_the_unit_disc_always_hits():
    estimate = buffon_estimate(cells(gasket_system(), 0), 1000, np.random.default_rng(1))
    assert estimate.hits == 1000
    assert estimate.estimate == pytest.approx(2.0)


def test_sup_multiplicity_matches_pointwise_max():
    g = gasket_system()
    N, theta = 3, 0.2
    top = sup_multiplicity(g, N, theta)
    x = np.linspace(-1.0, 1.0, 100_000) + 1.234567e-7
    expected = np.max([multiplicity(cells(g, n), theta)(x) for n in range(N + 1)], axis=0)
    np.testing.assert_array_equal(top(x), expected)


def test_bad_direction_is_boolean():
    assert bad_direction(0.4, 50.0, 3) is True
    assert bad_direction(0.4, 1.0, 3) is False


# -- combinatorics -----------------------------------------------------------

def test_stacking_levels_are_ordered():
    outcome = stacking_ratio(0.3, 4, 2.0, 2.0)
    assert outcome.top <= outcome.f_k + 1e-15
    assert outcome.top <= outcome.f_m + 1e-15
    if outcome.f_k > 0 and outcome.f_m > 0:
        assert math.isfinite(outcome.ratio)


def test_stacking_with_empty_level_is_vacuous():
    outcome = stacking_ratio(0.3, 2, 100.0, 2.0)
    assert outcome.vacuous
    assert outcome.to_dict()["vacuous"] is True


def test_l2_constant():
    assert l2_constant(0.4, 1.0, 3) is None
    value = l2_constant(0.4, 100.0, 2)
    assert value is not None and value >= 2.0 / 100.0


def test_bootstrap_is_capped_at_desk_scale():
    outcome = bootstrap_check(0.5, 2, 1.0, cap=6)
    assert outcome.f_k > 0
    assert outcome.generation <= 6
    assert outcome.target_generation == pytest.approx(2.0)
    assert 0 < outcome.measured <= 2.0 + 1e-12
    assert outcome.holds == (outcome.measured <= outcome.bound)


# -- degenerate triangles ----------------------------------------------------

@pytest.mark.parametrize("height", [0.1, 0.4, 0.8])
def test_jacobian_stays_within_degeneracy_bounds(height):
    cfg = triangle_config(height)
    audit = jacobian_audit(cfg, samples=2000)
    assert audit.violations == 0
    assert audit.numerator_spread < 1e-12
    assert cfg.delta * (1 - 1e-12) <= audit.min_abs <= audit.max_abs <= (1 + 1e-12) / cfg.delta


def test_theta_to_t_lies_in_unit_interval():
    cfg = triangle_config(0.3)
    for theta in np.linspace(0.05, 3.1, 25):
        mapped = theta_to_t(cfg, float(theta))
        assert 0.0 <= mapped.t <= 1.0
        assert mapped.scale > 0
        assert abs(mapped.numerator) == pytest.approx(cfg.delta, rel=1e-9)
