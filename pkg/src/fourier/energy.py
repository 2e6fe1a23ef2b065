"""
L^2 energies: the Plancherel identity for f_{n,theta}, the P1 energy on the frequency
window [3^{n-m}, 3^n], and closed-form exponential-sum energies against interval overlap.

Fourier convention: f^(x) = int f(s) e^{-isx} ds, so ||f||^2 = (1/2 pi) ||f^||^2.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from src.errors import DomainError, PlancherelTruncationError
from src.fourier.products import TrigProduct
from src.fourier.quadrature import integrate_panels
from src.geometry.models import SimilaritySystem
from src.geometry.systems import DEFAULT_GENERATION_CAP, check_generation
from src.projection.engine import DEFAULT_MERGE_EPS, cached_cells, multiplicity

logger = logging.getLogger(__name__)


@dataclass
class PlancherelResult:
    generation: int
    theta: float
    lhs: float
    rhs: float
    gap: float
    x_max: float
    tail_estimate: float
    panels: int

    def to_dict(self) -> dict:
        return asdict(self)


def projected_center_sum(system: SimilaritySystem, n: int, theta: float):
    """
    x -> sum over generation-n centers p of e^{-i p x}, with p the projection onto theta.
    Evaluated as a product over levels, so the cost is n * q per point.
    """
    a = system.centers_array.real * math.cos(theta) + system.centers_array.imag * math.sin(theta)
    r = float(system.ratio)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape, dtype=complex)
        for k in range(n):
            out *= np.exp(-1j * np.multiply.outer(x, a * r ** k)).sum(axis=-1)
        return out

    return evaluate


def indicator_transform(x, radius: float):
    """Transform of the indicator of [-radius, radius]: 2 sin(radius x) / x."""
    x = np.asarray(x, dtype=float)
    return 2.0 * radius * np.sinc(radius * x / math.pi)


def plancherel_check(
    system: SimilaritySystem,
    n: int,
    theta: float,
    x_max: Optional[float] = None,
    x_scale: float = 400.0,
    tol: float = 0.02,
    max_doublings: int = 4,
    merge_eps: float = DEFAULT_MERGE_EPS,
    cap: int = DEFAULT_GENERATION_CAP,
) -> PlancherelResult:
    """
    Compare ||f_{n,theta}||_2^2 with (1/2 pi) int_{|x|<=X} |f^(x)|^2 dx.

    X defaults to x_scale / radius and is doubled while the tail estimate, relative to
    the left side, stays above tol.
    """
    check_generation(system, n, cap)
    cloud = cached_cells(system, n, cap)
    lhs = multiplicity(cloud, theta, merge_eps).l2_squared

    radius = cloud.radius
    centers = projected_center_sum(system, n, theta)

    def energy_density(x):
        return np.abs(centers(x)) ** 2 * indicator_transform(x, radius) ** 2

    density_frequency = 4.0 * cloud.hull_halfwidth()

    X = x_max if x_max is not None else x_scale / radius
    for attempt in range(max_doublings + 1):
        quad = integrate_panels(energy_density, 0.0, X, density_frequency, rtol=1e-9)
        rhs = quad.value / math.pi  # integrand is even in x

        # |f^|^2 ~ 2 |sum|^2 / x^2 on average past X
        mean_sq = integrate_panels(lambda x: np.abs(centers(x)) ** 2, X / 2, X, density_frequency, rtol=1e-6).value / (X / 2)
        tail = 2.0 * mean_sq / (math.pi * X)

        gap = abs(lhs - rhs) / lhs
        logger.debug("plancherel n=%d X=%.4g rhs=%.10g gap=%.3e tail=%.3e", n, X, rhs, gap, tail)
        if tail / lhs <= tol:
            return PlancherelResult(n, theta, lhs, rhs, gap, X, tail, quad.panels)
        if x_max is not None:
            break
        X *= 2.0

    raise PlancherelTruncationError(
        f"tail estimate {tail:.3e} still exceeds {tol:g} * ||f||^2 at X_max={X:.4g}"
    )


@dataclass
class P1Energy:
    t: float
    n: int
    m: int
    energy: float
    ratio_to_3m: float
    panels: int

    def to_dict(self) -> dict:
        return asdict(self)


def p1_energy(t: float, n: int, m: int, rtol: float = 1e-8) -> P1Energy:
    """int over [3^{n-m}, 3^n] of |P1(x)|^2 with P1 = prod_{k=1}^{n-m-1} phi_t(3^{-k} x)."""
    if not 0 <= m <= n:
        raise DomainError(f"need 0 <= m <= n, got n={n}, m={m}")
    p1 = TrigProduct(t, 1, n - m - 1)
    # |P1|^2 carries frequencies up to twice those of P1
    quad = integrate_panels(lambda x: np.abs(p1(x)) ** 2, 3.0 ** (n - m), 3.0 ** n, 2.0 * p1.max_frequency, rtol=rtol)
    return P1Energy(t, n, m, quad.value, quad.value / 3.0 ** m, quad.panels)


@dataclass(frozen=True)
class FrequencySet:
    """Frequencies alpha_j with unit-modulus coefficients c_j (all 1 when omitted)."""
    frequencies: np.ndarray
    coefficients: Optional[np.ndarray] = None

    def __post_init__(self):
        alpha = np.asarray(self.frequencies, dtype=float).ravel()
        if len(alpha) == 0:
            raise DomainError("frequency set is empty")
        coeffs = np.ones(len(alpha), dtype=complex) if self.coefficients is None else np.asarray(self.coefficients, dtype=complex).ravel()
        if len(coeffs) != len(alpha):
            raise DomainError("one coefficient per frequency")
        if np.any(np.abs(np.abs(coeffs) - 1.0) > 1e-12):
            raise DomainError("coefficients must have modulus 1")
        object.__setattr__(self, "frequencies", alpha)
        object.__setattr__(self, "coefficients", coeffs)

    def __len__(self) -> int:
        return len(self.frequencies)

    @classmethod
    def random(cls, rng: np.random.Generator, max_k: int = 200, span: float = 1000.0) -> "FrequencySet":
        k = int(rng.integers(1, max_k + 1))
        return cls(rng.uniform(0.0, span, k), np.exp(2j * math.pi * rng.uniform(0.0, 1.0, k)))


def _kernel(d: np.ndarray) -> np.ndarray:
    """(e^{id} - 1) / (id), equal to 1 at d = 0."""
    return np.exp(0.5j * d) * np.sinc(d / (2.0 * math.pi))


def interval_energy(fs: FrequencySet, start: float = 0.0, length: float = 1.0) -> float:
    """int_start^{start+length} |sum_j c_j e^{i alpha_j y}|^2 dy in closed form."""
    d = fs.frequencies[:, None] - fs.frequencies[None, :]
    weights = fs.coefficients[:, None] * fs.coefficients.conj()[None, :]
    return float(np.real(np.sum(weights * np.exp(1j * d * start) * length * _kernel(d * length))))


def exp_sum_energy(fs: FrequencySet) -> float:
    return interval_energy(fs, 0.0, 1.0)


def overlap_energy(fs: FrequencySet, half_width: float = 1.0) -> float:
    """int (sum_j chi_[alpha_j - h, alpha_j + h])^2 = sum_{j,j'} max(0, 2h - |alpha_j - alpha_j'|)."""
    d = np.abs(fs.frequencies[:, None] - fs.frequencies[None, :])
    return float(np.sum(np.maximum(0.0, 2.0 * half_width - d)))


def cetsq_ratio(fs: FrequencySet) -> float:
    return exp_sum_energy(fs) / overlap_energy(fs)


def max_unit_interval_count(fs: FrequencySet, width: float = 1.0) -> int:
    """Largest number of frequencies in a closed interval of the given width."""
    alpha = np.sort(fs.frequencies)
    reach = np.searchsorted(alpha, alpha + width, side="right")
    return int(np.max(reach - np.arange(len(alpha))))


def cet_ratio(fs: FrequencySet) -> float:
    """energy / (k * sup over unit intervals of the frequency count)."""
    return exp_sum_energy(fs) / (len(fs) * max_unit_interval_count(fs))


def cetsq_trial(seed: int, counter: int, max_k: int = 200, span: float = 1000.0) -> dict:
    """One seeded random frequency set; substream `counter` of `seed`."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(counter,)))
    fs = FrequencySet.random(rng, max_k, span)
    energy = exp_sum_energy(fs)
    overlap = overlap_energy(fs)
    return {
        "seed": seed,
        "trial": counter,
        "k": len(fs),
        "energy": energy,
        "overlap": overlap,
        "ratio": energy / overlap,
        "cet_ratio": cet_ratio(fs),
    }
