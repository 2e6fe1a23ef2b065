"""
Tests for the trinomial products, Riesz products, panel quadrature and energies.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import simpson

from src.errors import DomainError, PlancherelTruncationError
from src.fourier.energy import (
    FrequencySet,
    cet_ratio,
    cetsq_ratio,
    cetsq_trial,
    exp_sum_energy,
    interval_energy,
    max_unit_interval_count,
    overlap_energy,
    p1_energy,
    plancherel_check,
)
from src.fourier.products import (
    RIESZ_FLOOR,
    RieszProduct,
    TrigProduct,
    nu_hat,
    phi,
    phi_tilde_dt,
    phi_tilde_dz,
    phi_tilde,
    product_split,
    riesz_audit,
    riesz_domination,
    riesz_domination_product,
    riesz_eval,
    riesz_factor,
    riesz_period_mean,
    riesz_window_ratio,
    split_ranges,
)
from src.fourier.quadrature import integrate_panels
from src.geometry.systems import gasket_system


# -- trinomial ---------------------------------------------------------------

def test_phi_anchor_values():
    assert abs(phi(0.5, 4 * math.pi / 3)) < 1e-14
    assert phi(1.0, math.pi) == pytest.approx(-1.0 / 3.0)
    assert phi(0.3, 0.0) == pytest.approx(1.0)


def test_derivatives_match_finite_differences():
    t, z, h = 0.37, 2.1 + 0.2j, 1e-6
    dz = (phi_tilde(t, z + h) - phi_tilde(t, z - h)) / (2 * h)
    dt = (phi_tilde(t + h, z) - phi_tilde(t - h, z)) / (2 * h)
    assert complex(phi_tilde_dz(t, z)) == pytest.approx(complex(dz), abs=1e-8)
    assert complex(phi_tilde_dt(t, z)) == pytest.approx(complex(dt), abs=1e-8)


def test_empty_product_is_one():
    p = TrigProduct(0.4, 3, 2)
    assert p.is_empty
    assert p.max_frequency == 0.0
    np.testing.assert_array_equal(p(np.array([0.0, 5.0])), [1.0, 1.0])


def test_split_recombines_to_the_full_product():
    x = np.linspace(-50.0, 400.0, 301)
    n, m, ell, t = 8, 2, 2, 0.31
    p1, p2, sharp, flat = product_split(t, n, m, ell, x)
    np.testing.assert_allclose(p1 * p2, nu_hat(t, n)(x), atol=1e-14)
    np.testing.assert_allclose(sharp * flat, p1, atol=1e-14)


def test_split_ranges_reject_oversized_blocks():
    with pytest.raises(DomainError):
        split_ranges(0.3, 4, 3, 2)
    with pytest.raises(DomainError):
        split_ranges(0.3, 4, -1, 0)


# -- Riesz products ----------------------------------------------------------

def test_riesz_factor_range():
    assert riesz_factor(math.pi) == pytest.approx(RIESZ_FLOOR)
    assert riesz_factor(0.0) == pytest.approx(1.0)


@given(
    t=st.floats(min_value=0.0, max_value=1.0),
    x=st.floats(min_value=-1e4, max_value=1e4),
)
@settings(max_examples=300)
def test_single_factor_domination(t, x):
    assert bool(riesz_domination(t, x))


def test_riesz_audit_finds_no_violations(rng):
    audit = riesz_audit(20_000, rng)
    assert audit.violations == 0
    assert audit.counterexamples == []
    assert audit.worst_excess <= 1e-12


@pytest.mark.parametrize("ell", range(1, 6))
def test_riesz_period_mean(ell):
    mean = riesz_period_mean(RieszProduct(1, ell))
    assert mean == pytest.approx((7.0 / 9.0) ** ell, rel=1e-6)


def test_riesz_eval_anchors():
    R = RieszProduct(1, 2)
    assert riesz_eval(R, 0.0) == pytest.approx(1.0)
    # 3pi / 3 = pi and 3pi / 9 = pi / 3
    assert riesz_eval(R, 3.0 * math.pi) == pytest.approx(40.0 / 81.0, abs=1e-14)


def test_riesz_product_period():
    R = RieszProduct(2, 4)
    x = np.linspace(0.0, 50.0, 101)
    np.testing.assert_allclose(R(x + R.period), R(x), atol=1e-12)
    np.testing.assert_allclose(R.in_u(x / 3.0 ** 4), R(x), atol=1e-12)


def test_product_domination():
    x = np.linspace(-2000.0, 2000.0, 20_001)
    for t in (0.1, 0.5, 0.83):
        assert np.all(riesz_domination_product(t, 10, 3, 2, x))


def test_riesz_window_ratio_is_bounded():
    R = RieszProduct(1, 3)
    ratio = riesz_window_ratio(R, 10.0, 3.0)
    assert 1.0 <= ratio <= (9.0 / 5.0) ** 3


# -- quadrature --------------------------------------------------------------

def test_panels_integrate_oscillations():
    result = integrate_panels(np.cos, 0.0, 10.0, 1.0)
    assert result.converged
    assert result.value == pytest.approx(math.sin(10.0), abs=1e-12)

    result = integrate_panels(lambda x: np.sin(100 * x) ** 2, 0.0, math.pi, 200.0)
    assert result.value == pytest.approx(math.pi / 2, rel=1e-10)


def test_empty_range_is_zero():
    assert integrate_panels(np.cos, 1.0, 1.0, 1.0).value == 0.0


# -- energies ----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2])
def test_plancherel_gap(n):
    result = plancherel_check(gasket_system(), n, 0.4)
    assert result.gap < 0.02
    assert result.rhs <= result.lhs * (1 + 1e-6)


@pytest.mark.slow
def test_plancherel_gap_generation_three():
    assert plancherel_check(gasket_system(), 3, 0.4).gap < 0.02


def test_plancherel_gap_shrinks_with_truncation():
    g = gasket_system()
    short = plancherel_check(g, 2, 0.4, x_max=100.0, tol=1.0)
    long = plancherel_check(g, 2, 0.4, x_max=800.0, tol=1.0)
    assert long.gap < short.gap


def test_plancherel_truncation_error():
    with pytest.raises(PlancherelTruncationError):
        plancherel_check(gasket_system(), 1, 0.4, x_max=5.0, tol=1e-6)


def test_p1_energy_matches_dense_rule():
    t, n, m = 0.3, 6, 2
    result = p1_energy(t, n, m)
    x = np.linspace(3.0 ** (n - m), 3.0 ** n, 400_001)
    p1 = TrigProduct(t, 1, n - m - 1)
    expected = simpson(np.abs(p1(x)) ** 2, x=x)
    assert result.energy == pytest.approx(expected, rel=1e-8)
    assert result.ratio_to_3m == pytest.approx(result.energy / 9.0)


def test_p1_energy_rejects_bad_block():
    with pytest.raises(DomainError):
        p1_energy(0.3, 2, 3)


def test_single_frequency_ratio_is_one_half():
    fs = FrequencySet(np.array([17.0]))
    assert exp_sum_energy(fs) == pytest.approx(1.0)
    assert cetsq_ratio(fs) == 0.5
    assert cet_ratio(fs) == pytest.approx(1.0)


def test_frequency_set_validation():
    with pytest.raises(DomainError):
        FrequencySet(np.array([]))
    with pytest.raises(DomainError):
        FrequencySet(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    with pytest.raises(DomainError):
        FrequencySet(np.array([1.0, 2.0]), np.array([1.0]))


def test_interval_energy_matches_quadrature(rng):
    fs = FrequencySet(rng.uniform(0, 20, 5), np.exp(2j * math.pi * rng.uniform(0, 1, 5)))
    y = np.linspace(0.5, 3.0, 200_001)
    values = np.abs(np.sum(fs.coefficients[:, None] * np.exp(1j * fs.frequencies[:, None] * y[None, :]), axis=0)) ** 2
    assert interval_energy(fs, 0.5, 2.5) == pytest.approx(simpson(values, x=y), rel=1e-9)


def test_overlap_energy_and_interval_counts():
    fs = FrequencySet(np.array([0.0, 0.5]))
    assert overlap_energy(fs) == pytest.approx(7.0)
    assert max_unit_interval_count(FrequencySet(np.array([0.0, 0.5, 1.0, 3.0]))) == 3


def test_cetsq_trial_is_reproducible():
    a = cetsq_trial(2024, 3, max_k=30)
    assert a == cetsq_trial(2024, 3, max_k=30)
    assert a != cetsq_trial(2024, 4, max_k=30)
    assert 0 < a["ratio"] < math.inf
