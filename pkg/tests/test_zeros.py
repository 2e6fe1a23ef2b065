"""
Tests for zero isolation, continuation in t, and the Blaschke counts.
"""
import math

import numpy as np
import pytest

from src.errors import DomainError, WindingInstabilityError
from src.fourier.products import phi_tilde
from src.zeros.blaschke import blaschke_count, small_value_localization, strip_disc_count
from src.zeros.continuation import (
    continue_zero,
    g_functions,
    time_windows,
    velocity_bound,
    window_counts,
)
from src.zeros.finder import (
    Rect,
    band_growth,
    branch_candidates,
    count_band_zeros,
    derivative_floor_ratio,
    find_zeros,
    newton,
    stable_winding,
    strip_point,
    winding_number,
)

ZERO = 4 * math.pi / 3


# -- rectangles and winding numbers ------------------------------------------

def test_rect_geometry():
    r = Rect(0.0, 4.0, -1.0, 1.0)
    assert r.center == 2 + 0j
    assert r.size == 4.0
    left, right = r.split()
    assert left.re_hi == right.re_lo
    assert left.width + right.width == pytest.approx(4.0)
    assert len(r.boundary(64)) == 64
    with pytest.raises(DomainError):
        Rect(1.0, 1.0, 0.0, 1.0)


def test_winding_counts_polynomial_roots():
    box = Rect(-1.0, 1.0, -1.0, 1.0)
    assert winding_number(lambda z: z - 0.3, box) == 1
    assert winding_number(lambda z: (z - 0.3) * (z + 0.2j), box) == 2
    assert winding_number(lambda z: z - 3.0, box) == 0


def test_zero_on_boundary_is_unstable():
    box = Rect(-1.0, 1.0, -1.0, 1.0)
    with pytest.raises(WindingInstabilityError):
        winding_number(lambda z: z - 1.0, box)
    count, used = stable_winding(lambda z: z - 1.0, box)
    assert count == 1
    assert used.re_hi > box.re_hi


def test_newton_polishes_a_root():
    z, residual, _ = newton(lambda z: z * z - 2, lambda z: 2 * z, 1.0)
    assert z == pytest.approx(math.sqrt(2))
    assert residual < 1e-12


# -- zeros of the trinomial --------------------------------------------------

def test_finds_the_reference_zero():
    zeros = find_zeros(0.5, Rect.around(ZERO, 0.5))
    assert len(zeros) == 1
    assert abs(zeros[0] - ZERO) < 1e-9
    assert abs(phi_tilde(0.5, zeros[0])) < 1e-10


def test_half_parameter_zeros_are_real():
    zeros = find_zeros(0.5, Rect(0.5, 10.0, -1.0, 1.0))
    np.testing.assert_allclose(sorted(z.real for z in zeros), [ZERO, 2 * ZERO], atol=1e-9)
    assert all(abs(z.imag) < 1e-9 for z in zeros)


def test_rectangle_taller_than_strip_rejected():
    with pytest.raises(DomainError):
        find_zeros(0.3, Rect(0.0, 1.0, -3.0, 3.0))


def test_no_branch_points_on_real_slices():
    for t in np.linspace(0.001, 0.999, 1000):
        assert branch_candidates(float(t)) == []


def test_branch_search_returns_genuine_double_zeros():
    for c in branch_candidates(0.5 + 0.5j, radius=2.0, k_max=1):
        assert c.residual < 1e-10
        assert c.derivative_residual < 1e-10


def test_derivative_floor_ratio_degenerate_cases():
    assert derivative_floor_ratio(0.3, []) == math.inf
    assert derivative_floor_ratio(0.5, [ZERO]) == math.inf


@pytest.mark.parametrize("x", [0.0, 3.0, 17.5, 100.0])
def test_strip_point_reaches_one_half(x):
    z, value = strip_point(0.3, x)
    assert abs(z - x) == pytest.approx(2.4)
    assert value >= 0.5


def test_band_counts():
    assert count_band_zeros(0.3, 2) >= 1
    growth = band_growth(0.3, [1, 2])
    assert growth["counts"][1] >= growth["counts"][0]
    assert set(growth) >= {"slope", "intercept"}


# -- continuation ------------------------------------------------------------

def test_continuation_round_trip():
    forward = continue_zero(0.5, ZERO, 0.45)
    assert not forward.truncated
    assert forward.t[-1] == 0.45

    fresh = find_zeros(0.45, Rect.around(forward.endpoint, 0.2))
    nearest = min(fresh, key=lambda z: abs(z - forward.endpoint))
    assert abs(nearest - forward.endpoint) < 1e-8

    back = continue_zero(0.45, forward.endpoint, 0.5)
    assert abs(back.endpoint - ZERO) < 1e-8
    assert np.all(back.residuals() < 1e-10)


@pytest.mark.slow
def test_continued_zeros_land_on_fresh_zeros():
    zeros = find_zeros(0.3, Rect(0.01, 20.0, -1.0, 1.0))
    assert zeros
    checked = 0
    for z in zeros:
        trace = continue_zero(0.3, z, 0.35)
        if trace.truncated:
            continue
        fresh = find_zeros(0.35, Rect.around(trace.endpoint, 0.05))
        assert min(abs(w - trace.endpoint) for w in fresh) < 1e-8
        checked += 1
    assert checked > 0


def test_continuation_needs_a_zero():
    with pytest.raises(DomainError):
        continue_zero(0.5, ZERO + 0.1, 0.45)


def test_rescaled_trace():
    trace = continue_zero(0.5, ZERO, 0.49, k_index=2)
    np.testing.assert_allclose(trace.rescaled(), 9.0 * trace.lam)


def test_g_functions_agree_with_finite_differences():
    trace = continue_zero(0.5, ZERO, 0.45)
    report = g_functions(trace, m=2)
    assert report.identity_error < 1e-12
    assert report.fd_error < 1e-2
    assert 0.0 <= report.coverage <= 1.0
    assert report.summary()["samples"] == len(trace)
    bound = velocity_bound(trace, 2)
    assert bound is None or bound >= 0


def test_g_functions_need_samples():
    trace = continue_zero(0.5, ZERO, 0.4995)
    with pytest.raises(DomainError):
        g_functions(trace, m=2)


def test_time_windows_cover_the_unit_interval():
    centres, radius = time_windows(1, 0.5)
    assert radius == pytest.approx(0.5 / 9)
    assert centres[0] == 0.0
    assert centres[-1] + radius >= 1.0 - 1e-12


def test_window_counts():
    trace = continue_zero(0.5, ZERO, 0.45)
    counts = window_counts([trace], 1)
    assert counts.sum() >= 1
    assert counts.max() == 1


# -- Blaschke ----------------------------------------------------------------

def test_blaschke_count_on_a_quadratic():
    report = blaschke_count(lambda z: 16 * np.asarray(z) ** 2 - 1)
    assert report.value_at_zero == pytest.approx(1.0)
    assert report.sup == pytest.approx(17.0)
    assert report.bound == 4
    assert report.zeros_in_half_disc == 2
    assert report.holds


def test_blaschke_needs_normalised_centre():
    with pytest.raises(DomainError):
        blaschke_count(lambda z: 0.5 + np.asarray(z))


def test_strip_disc_count_holds():
    assert strip_disc_count(0.3, 5.0).holds


def test_small_values_sit_near_zeros():
    report = small_value_localization(0.5, 1e-3, Rect.around(ZERO + 0.3, 2.0))
    assert report.zeros >= 1
    assert report.contained
