"""
The trinomial phi_t, its self-similar products, and the Riesz products that dominate them.

    phi_t(z) = (1 + e^{-itz} + e^{-iz}) / 3,     phi~_t = 3 phi_t
    r(x)     = (7 + 2 cos x) / 9
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.errors import DomainError

logger = logging.getLogger(__name__)

RIESZ_FLOOR = 5.0 / 9.0
RIESZ_MEAN = 7.0 / 9.0


def phi(t, z):
    """phi_t(z); vectorised over t and z, complex inputs allowed."""
    t = np.asarray(t)
    z = np.asarray(z)
    return (1.0 + np.exp(-1j * t * z) + np.exp(-1j * z)) / 3.0


def phi_tilde(t, z):
    return 1.0 + np.exp(-1j * np.asarray(t) * np.asarray(z)) + np.exp(-1j * np.asarray(z))


def phi_tilde_dz(t, z):
    """d/dz phi~_t(z) = -i (t e^{-itz} + e^{-iz})."""
    t = np.asarray(t)
    z = np.asarray(z)
    return -1j * (t * np.exp(-1j * t * z) + np.exp(-1j * z))


def phi_tilde_dt(t, z):
    """d/dt phi~_t(z) = -i z e^{-itz}."""
    t = np.asarray(t)
    z = np.asarray(z)
    return -1j * z * np.exp(-1j * t * z)


@dataclass(frozen=True)
class TrigProduct:
    """x -> prod_{k=k_lo}^{k_hi} phi_t(3^{-k} x); the empty range is the constant 1."""
    t: complex
    k_lo: int
    k_hi: int

    @property
    def is_empty(self) -> bool:
        return self.k_hi < self.k_lo

    @property
    def factor_count(self) -> int:
        return max(0, self.k_hi - self.k_lo + 1)

    @property
    def max_frequency(self) -> float:
        """Largest frequency present, for sizing quadrature panels."""
        if self.is_empty:
            return 0.0
        return max(1.0, abs(self.t)) * 3.0 ** (-self.k_lo)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        out = np.ones(x.shape, dtype=complex)
        for k in range(self.k_lo, self.k_hi + 1):
            out *= phi(self.t, x * 3.0 ** (-k))
        return out


def nu_hat(t, N: int) -> TrigProduct:
    """prod_{k=1}^N phi_t(3^{-k} x)."""
    return TrigProduct(t, 1, N)


@dataclass(frozen=True)
class ProductSplit:
    p1: TrigProduct
    p2: TrigProduct
    p1_sharp: TrigProduct
    p1_flat: TrigProduct


def split_ranges(t, n: int, m: int, ell: int) -> ProductSplit:
    """
    P1 = prod_{1}^{n-m-1},        P2  = prod_{n-m}^{n},
    P1 flat = prod_{n-m-l}^{n-m-1}, P1 sharp = prod_{1}^{n-m-l-1}.
    """
    if m < 0 or ell < 0:
        raise DomainError("m and ell must be nonnegative")
    if not 1 <= m + ell + 1 <= n:
        raise DomainError(f"need 1 <= m + ell + 1 <= n, got n={n}, m={m}, ell={ell}")
    return ProductSplit(
        p1=TrigProduct(t, 1, n - m - 1),
        p2=TrigProduct(t, n - m, n),
        p1_sharp=TrigProduct(t, 1, n - m - ell - 1),
        p1_flat=TrigProduct(t, n - m - ell, n - m - 1),
    )


def product_split(t, n: int, m: int, ell: int, x) -> tuple:
    """(P1, P2, P1 sharp, P1 flat) evaluated at x."""
    s = split_ranges(t, n, m, ell)
    return s.p1(x), s.p2(x), s.p1_sharp(x), s.p1_flat(x)


def riesz_factor(x):
    return (7.0 + 2.0 * np.cos(x)) / 9.0


@dataclass(frozen=True)
class RieszProduct:
    """R(x) = prod_{k=k_lo}^{k_hi} r(3^{-k} x), a 2 pi 3^{k_hi}-periodic function."""
    k_lo: int
    k_hi: int

    @property
    def factor_count(self) -> int:
        return max(0, self.k_hi - self.k_lo + 1)

    @property
    def period(self) -> float:
        return 2.0 * math.pi * 3.0 ** self.k_hi

    @property
    def degree(self) -> int:
        """Degree as a trigonometric polynomial in u = x / 3^{k_hi}."""
        return (3 ** self.factor_count - 1) // 2

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape)
        for k in range(self.k_lo, self.k_hi + 1):
            out *= riesz_factor(x * 3.0 ** (-k))
        return out

    def in_u(self, u) -> np.ndarray:
        """R evaluated at x = 3^{k_hi} u, without forming the large argument."""
        u = np.asarray(u, dtype=float)
        out = np.ones(u.shape)
        for k in range(self.k_lo, self.k_hi + 1):
            out *= riesz_factor(u * 3.0 ** (self.k_hi - k))
        return out


def riesz_eval(R: RieszProduct, x):
    return R(x)


def riesz_period_mean(R: RieszProduct) -> float:
    """
    Mean of R over one period. The uniform rule with more nodes than twice the degree
    integrates a trigonometric polynomial exactly, so this is (7/9)^l up to rounding.
    """
    if R.factor_count == 0:
        return 1.0
    nodes = 4 * R.degree + 8
    u = 2.0 * math.pi * np.arange(nodes) / nodes
    return float(np.mean(R.in_u(u)))


def riesz_domination(t, x, slack: float = 1e-12):
    """|phi_t(x)|^2 <= min(r(x), r(tx)) + slack, elementwise."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    lhs = np.abs(phi(t, x)) ** 2
    return lhs <= np.minimum(riesz_factor(x), riesz_factor(t * x)) + slack


def riesz_domination_product(t: float, n: int, m: int, ell: int, x, slack: float = 1e-12):
    """|P1 flat(x)|^2 <= min(R(x), R(tx)) with R over the same index range."""
    flat = split_ranges(t, n, m, ell).p1_flat
    R = RieszProduct(flat.k_lo, flat.k_hi)
    x = np.asarray(x, dtype=float)
    lhs = np.abs(flat(x)) ** 2
    bound = np.minimum(R(x), R(t * x))
    return lhs <= bound * (1 + slack) + slack


def riesz_window_ratio(R: RieszProduct, center: float, half_width: float, samples: int = 513) -> float:
    """max R / min R over [center - half_width, center + half_width]."""
    x = np.linspace(center - half_width, center + half_width, samples)
    values = R(x)
    return float(values.max() / values.min())


@dataclass
class DominationAudit:
    samples: int
    violations: int
    worst_excess: float
    counterexamples: list


def riesz_audit(
    samples: int,
    rng: np.random.Generator,
    x_max: float = 1e4,
    slack: float = 1e-12,
    batch: int = 2**18,
    keep: int = 10,
) -> DominationAudit:
    """Random (t, x) in [0,1] x [-x_max, x_max] against the single-factor domination."""
    violations = 0
    worst = -math.inf
    found = []
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        t = rng.uniform(0.0, 1.0, size)
        x = rng.uniform(-x_max, x_max, size)
        excess = np.abs(phi(t, x)) ** 2 - np.minimum(riesz_factor(x), riesz_factor(t * x))
        worst = max(worst, float(excess.max()))
        bad = np.flatnonzero(excess > slack)
        violations += len(bad)
        found.extend({"t": float(t[i]), "x": float(x[i]), "excess": float(excess[i])} for i in bad[: keep - len(found)])
        done += size
    if violations:
        logger.warning("riesz domination failed at %d of %d samples", violations, samples)
    return DominationAudit(samples, violations, worst, found)
