"""
Tests for cofactor floors, critical factors, root stability and small-value scans.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.errors import DomainError, InfeasibleError
from src.tiling.verifier import (
    cofactor_moduli,
    critical_indices,
    domination_audit,
    factor_domination,
    factor_zeros,
    max_cofactor,
    perturbed_roots,
    root_stability,
    sample_centres,
    ssv_scan,
    stability_audit,
    tiling_grid,
    tiling_scan,
)
from src.zeros.finder import Rect

ZERO = 4 * math.pi / 3


def test_cofactors_at_the_origin():
    for m in (1, 3, 6):
        value, k0 = max_cofactor(0.3, m, 0.0)
        assert value == pytest.approx(3.0 ** m)
        assert 0 <= k0 <= m


def test_cofactor_moduli_small_case():
    np.testing.assert_allclose(cofactor_moduli(np.array([2.0, 3.0, 5.0])), [15.0, 10.0, 6.0])


@given(st.lists(st.floats(min_value=0.1, max_value=5.0), min_size=2, max_size=7))
@settings(max_examples=50)
def test_cofactor_times_factor_is_the_product(values):
    moduli = np.array(values)
    np.testing.assert_allclose(cofactor_moduli(moduli) * moduli, np.prod(moduli), rtol=1e-12)


def test_max_cofactor_on_arrays():
    z = tiling_grid(ZERO, 0.1, 9)
    value, k0 = max_cofactor(0.5, 3, z)
    assert value.shape == z.shape
    assert k0.shape == z.shape


def test_single_critical_factor_at_a_zero():
    assert critical_indices(0.5, 6, Rect.around(ZERO, 0.05)) == {0}


def test_no_critical_factor_away_from_zeros():
    assert critical_indices(0.5, 2, Rect.around(2 * math.pi, 0.05)) == set()


def test_tiling_scan_near_a_zero():
    scan = tiling_scan(0.5, 3, ZERO)
    assert scan.cofactor_floor_holds
    assert scan.unique_critical
    assert scan.critical == {0}
    assert scan.to_row()["critical_k"] == "0"
    assert scan.spacing == pytest.approx(0.2 / 128)


# -- root stability ----------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3])
def test_unperturbed_roots_give_three(k):
    assert root_stability(0.0, 0.0, k, 2) == pytest.approx(3.0, abs=1e-9)


def test_perturbed_roots_sum_to_minus_one():
    w1, w2 = perturbed_roots(0.001, -0.002)
    assert abs(1 + w1 + w2) < 1e-15
    assert abs(w1) == pytest.approx(math.exp(0.001))
    assert abs(w2) == pytest.approx(math.exp(-0.002))


def test_infeasible_magnitudes():
    with pytest.raises(InfeasibleError):
        perturbed_roots(5.0, -5.0)


def test_perturbation_outside_range_rejected():
    with pytest.raises(DomainError):
        root_stability(0.1, 0.0, 1, 2)


def test_stability_audit_has_no_violations():
    audit = stability_audit(2, grid=12)
    assert audit.violations == 0
    assert audit.minimum >= 2.0
    assert audit.checked + audit.infeasible == audit.points == 144


# -- factor domination -------------------------------------------------------

def test_domination_does_not_apply_away_from_zeros():
    check = factor_domination(0.5, 2 * math.pi, 1, 1)
    assert not check.applies
    assert check.holds


def test_domination_at_a_rescaled_zero():
    audit = domination_audit(0.5, [ZERO], k_prime=2, k_star=2)
    assert audit.applicable == 1
    assert audit.violations == 0
    assert audit.min_modulus == pytest.approx(3.0)
    assert audit.to_dict()["counterexamples"] == []


# -- sampling and small values -----------------------------------------------

def test_sample_centres_keep_zeros_and_top_up(rng):
    centres = sample_centres([ZERO], 2, 5, rng)
    assert len(centres) == 5
    assert np.any(np.isclose(centres, ZERO))
    assert np.all((centres >= 1 / 9) & (centres <= 9))


def test_factor_zeros_are_rescaled():
    zeros = factor_zeros(0.5, 1, 10.0, 15.0)
    assert np.any(np.abs(zeros - 3 * ZERO) < 1e-8)


def test_small_values_sit_next_to_the_zero():
    report = ssv_scan(0.5, 2, x_range=(ZERO - 0.5, ZERO + 0.5))
    assert report.points >= 1
    assert report.interval_count >= 1
    assert report.critical == [0]
    assert report.contained
    assert report.radius == pytest.approx(9 * 1e-3 ** 0.4)


def test_no_small_values_away_from_zeros():
    report = ssv_scan(0.5, 2, x_range=(2 * math.pi - 0.2, 2 * math.pi + 0.2))
    assert report.interval_count == 0
    assert report.critical == []
    assert report.contained
