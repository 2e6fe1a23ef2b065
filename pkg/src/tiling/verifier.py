"""
Analytic tiling of Phi(z) = prod_{k=0}^m phi~_k(z), phi~_k(z) = phi~_t(3^{-k} z).

At most one factor can be critically small on a short rectangle near the real axis,
and the product of the others stays above 3^{-m}. Everything here verifies those
claims extensionally on grids.
"""
import logging
import math
from dataclasses import dataclass, asdict, field
from typing import Optional

import numpy as np

from src.errors import DomainError, InfeasibleError
from src.fourier.products import phi_tilde
from src.projection.intervals import UnionOfIntervals, true_runs
from src.zeros.finder import Rect, find_zeros

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.1
GRID_POINTS = 129  # per side, centre included; spacing delta / 64


def factor_moduli(t: float, m: int, z) -> np.ndarray:
    """|phi~_k(z)| for k = 0..m, stacked along the first axis."""
    z = np.asarray(z, dtype=complex)
    return np.stack([np.abs(phi_tilde(t, z * 3.0 ** (-k))) for k in range(m + 1)])


def cofactor_moduli(moduli: np.ndarray) -> np.ndarray:
    """|Phi_{k}| = product of all factors but the k-th, from prefix and suffix products."""
    ones = np.ones((1,) + moduli.shape[1:])
    prefix = np.cumprod(np.concatenate((ones, moduli[:-1])), axis=0)
    suffix = np.cumprod(np.concatenate((ones, moduli[::-1][:-1])), axis=0)[::-1]
    return prefix * suffix


def max_cofactor(t: float, m: int, z) -> tuple:
    """(max_k |Phi_k(z)|, argmax k0), elementwise for array z."""
    cof = cofactor_moduli(factor_moduli(t, m, z))
    k0 = np.argmax(cof, axis=0)
    value = np.take_along_axis(cof, k0[None, ...], axis=0)[0]
    if np.ndim(z) == 0:
        return float(value), int(k0)
    return value, k0


def tiling_grid(x0: float, delta: float = DEFAULT_DELTA, points: int = GRID_POINTS) -> np.ndarray:
    """Square grid on [x0 - delta, x0 + delta] x [-delta, delta]."""
    u = np.linspace(-delta, delta, points)
    return x0 + u[None, :] + 1j * u[:, None]


def critical_indices(t: float, m: int, rect: Rect, threshold: Optional[float] = None, points: int = GRID_POINTS) -> set:
    """Every k whose factor drops below threshold (3^{-m} by default) somewhere on the rect grid."""
    threshold = 3.0 ** (-m) if threshold is None else threshold
    xs = np.linspace(rect.re_lo, rect.re_hi, points)
    ys = np.linspace(rect.im_lo, rect.im_hi, points)
    minima = factor_moduli(t, m, xs[None, :] + 1j * ys[:, None]).reshape(m + 1, -1).min(axis=1)
    return {int(k) for k in np.flatnonzero(minima < threshold)}


@dataclass
class TilingScan:
    t: float
    m: int
    x0: float
    delta: float
    spacing: float
    min_max_cofactor: float
    worst_point: complex
    critical: set
    factor_minima: list = field(repr=False)

    @property
    def cofactor_floor_holds(self) -> bool:
        return self.min_max_cofactor >= 3.0 ** (-self.m)

    @property
    def unique_critical(self) -> bool:
        return len(self.critical) <= 1

    def to_row(self) -> dict:
        return {
            "t": self.t,
            "m": self.m,
            "x0": self.x0,
            "delta": self.delta,
            "min_max_cofactor": self.min_max_cofactor,
            "critical_k": ";".join(str(k) for k in sorted(self.critical)),
        }


def tiling_scan(t: float, m: int, x0: float, delta: float = DEFAULT_DELTA, points: int = GRID_POINTS) -> TilingScan:
    """
    Scan the square around a zero x0 of some factor of Phi.

    Args:
        t: Parameter of the factors
        m: Number of factors minus one
        x0: Centre of the square, usually a zero of one factor
        delta: Half-side of the square
        points: Grid points per side

    Returns:
        TilingScan with the smallest max-cofactor on the grid and the critical factors
    """
    grid = tiling_grid(x0, delta, points)
    moduli = factor_moduli(t, m, grid)
    best = cofactor_moduli(moduli).max(axis=0)
    i = np.unravel_index(np.argmin(best), best.shape)
    minima = moduli.reshape(m + 1, -1).min(axis=1)
    critical = {int(k) for k in np.flatnonzero(minima < 3.0 ** (-m))}
    if len(critical) > 1:
        logger.error("several critical factors %s at t=%.6g, m=%d, x0=%.6g", sorted(critical), t, m, x0)
    return TilingScan(
        t=t,
        m=m,
        x0=x0,
        delta=delta,
        spacing=2 * delta / (points - 1),
        min_max_cofactor=float(best[i]),
        worst_point=complex(grid[i]),
        critical=critical,
        factor_minima=minima.tolist(),
    )


def _scan_task(args) -> TilingScan:
    return tiling_scan(*args)


def perturbed_roots(y1: float, y2: float) -> tuple[complex, complex]:
    """
    w1, w2 with |w_j| = e^{y_j} and 1 + w1 + w2 = 0, taking the branch where
    arg w1 is near 2 pi / 3.
    """
    a, b = math.exp(y1), math.exp(y2)
    cos_phi = (b * b - 1.0 - a * a) / (2.0 * a)
    if abs(cos_phi) > 1.0:
        raise InfeasibleError(f"no w with |w1| = {a:.6g}, |w2| = {b:.6g} and 1 + w1 + w2 = 0")
    w1 = a * complex(math.cos(math.acos(cos_phi)), math.sin(math.acos(cos_phi)))
    return w1, -1.0 - w1


def root_stability(y1: float, y2: float, k: int, k_prime: int, c: float = 0.05, check_range: bool = True) -> float:
    """Re(1 + w1^{3^k} + w2^{3^k}) for the perturbed cube roots."""
    if check_range and max(abs(y1), abs(y2)) > c * 3.0 ** (-k_prime):
        raise DomainError(f"|y| must not exceed {c} * 3^-{k_prime}")
    w1, w2 = perturbed_roots(y1, y2)
    power = 3.0 ** k
    value = 1.0 + np.exp(power * np.log(w1)) + np.exp(power * np.log(w2))
    return float(value.real)


@dataclass
class StabilityAudit:
    k_prime: int
    c: float
    points: int
    checked: int
    infeasible: int
    minimum: float
    violations: int
    beyond_range_minimum: float

    def to_dict(self) -> dict:
        return asdict(self)


def stability_audit(k_prime: int, c: float = 0.05, grid: int = 100, beyond: int = 5) -> StabilityAudit:
    """
    Re(1 + w1^{3^k} + w2^{3^k}) >= 2 for 1 <= k <= k'+1 on a grid x grid perturbation grid.
    The value at k = k' + beyond is recorded to show how the bound degrades outside that range.
    """
    ys = np.linspace(-c * 3.0 ** (-k_prime), c * 3.0 ** (-k_prime), grid)
    checked = infeasible = violations = 0
    minimum = beyond_min = math.inf
    for y1 in ys:
        for y2 in ys:
            try:
                values = [root_stability(y1, y2, k, k_prime, c) for k in range(1, k_prime + 2)]
            except InfeasibleError:
                infeasible += 1
                continue
            checked += 1
            minimum = min(minimum, min(values))
            violations += sum(v < 2.0 for v in values)
            beyond_min = min(beyond_min, root_stability(y1, y2, k_prime + beyond, k_prime, c))
    if beyond_min < 2.0:
        logger.info("k = k'+%d drops to %.4f (k'=%d)", beyond, beyond_min, k_prime)
    return StabilityAudit(k_prime, c, grid * grid, checked, infeasible, minimum, violations, beyond_min)


@dataclass
class DominationCheck:
    applies: bool
    holds: bool
    min_modulus: float


def factor_domination(t: float, z: complex, k_prime: int, k_star: int, c: float = 1.0, delta: float = DEFAULT_DELTA) -> DominationCheck:
    """If |phi~_{k'}(z)| < c delta 3^{-k*}, every phi~_k(z), k'-k* <= k < k', must have modulus >= 2."""
    lead = abs(complex(phi_tilde(t, z * 3.0 ** (-k_prime))))
    if lead >= c * delta * 3.0 ** (-k_star):
        return DominationCheck(False, True, math.inf)
    ks = range(max(0, k_prime - k_star), k_prime)
    moduli = [abs(complex(phi_tilde(t, z * 3.0 ** (-k)))) for k in ks]
    low = min(moduli) if moduli else math.inf
    return DominationCheck(True, low >= 2.0, low)


@dataclass
class DominationAudit:
    t: float
    k_prime: int
    k_star: int
    points: int
    applicable: int
    violations: int
    min_modulus: float
    counterexamples: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def domination_audit(
    t: float,
    zeros,
    k_prime: int,
    k_star: int,
    c: float = 1.0,
    delta: float = DEFAULT_DELTA,
    stability_c: float = 0.05,
) -> DominationAudit:
    """
    factor_domination at z = 3^{k'} lambda for the given zeros lambda of phi~ that sit
    within stability_c 3^{-k'} of the real axis, where the k'-th factor vanishes.
    """
    lam = np.asarray(zeros, dtype=complex)
    lam = lam[np.abs(lam.imag) <= stability_c * 3.0 ** (-k_prime)]
    applicable = violations = 0
    low = math.inf
    bad = []
    for z in lam * 3.0 ** k_prime:
        check = factor_domination(t, complex(z), k_prime, k_star, c, delta)
        if not check.applies:
            continue
        applicable += 1
        low = min(low, check.min_modulus)
        if not check.holds:
            violations += 1
            if len(bad) < 10:
                bad.append({"t": t, "re_z": z.real, "im_z": z.imag, "min_modulus": check.min_modulus})
    if violations:
        logger.warning("factor domination failed %d times at t=%.6g, k'=%d", violations, t, k_prime)
    return DominationAudit(t, k_prime, k_star, len(lam), applicable, violations, low, bad)


def sample_centres(zeros, m: int, count: int, rng: np.random.Generator, delta: float = DEFAULT_DELTA) -> np.ndarray:
    """
    Up to `count` rectangle centres x0 = Re(3^k lambda), k = 0..m, over zeros lambda of phi~
    whose rescaled copy lies within delta of [3^{-m}, 3^m]; topped up with uniform points.
    """
    lam = np.asarray(zeros, dtype=complex)
    lo, hi = 3.0 ** (-m), 3.0 ** m
    pool = []
    for k in range(m + 1):
        z = lam * 3.0 ** k
        keep = (np.abs(z.imag) <= delta) & (z.real >= lo) & (z.real <= hi)
        pool.extend(z.real[keep].tolist())
    pool = np.unique(np.asarray(pool, dtype=float))
    if len(pool) > count:
        pool = np.sort(rng.choice(pool, size=count, replace=False))
    if len(pool) < count:
        pool = np.concatenate((pool, np.sort(rng.uniform(lo, hi, count - len(pool)))))
    return pool


@dataclass
class SSVReport:
    t: float
    m: int
    epsilon_star: float
    threshold: float
    intervals: UnionOfIntervals = field(repr=False)
    points: int
    radius: float
    worst_distance: float
    critical: list

    @property
    def interval_count(self) -> int:
        return len(self.intervals)

    @property
    def contained(self) -> bool:
        return self.worst_distance <= self.radius

    @property
    def count_ratio(self) -> float:
        return self.interval_count / 3.0 ** self.m


def factor_zeros(t: float, k: int, x_lo: float, x_hi: float, half_height: float = 1.0) -> np.ndarray:
    """Zeros of phi~_k = 3^k * (zeros of phi~) with real part in [x_lo, x_hi]."""
    s = 3.0 ** k
    base = find_zeros(t, Rect(x_lo / s - 1.0, x_hi / s + 1.0, -half_height, half_height))
    z = s * np.asarray(base, dtype=complex)
    return z[(z.real >= x_lo - s) & (z.real <= x_hi + s)] if len(z) else z


def ssv_scan(
    t: float,
    m: int,
    epsilon_star: float = 1e-3,
    x_range: Optional[tuple] = None,
    M: int = 5,
    C: float = 1.0,
) -> SSVReport:
    """
    Real points with |Phi(x)| < (eps*/3)^m, at spacing 3^{-m}/16 plus the real parts of the
    factor zeros, and their distance to the zeros of the smallest factor at each point.
    """
    lo, hi = x_range if x_range is not None else (3.0 ** (-m), 3.0 ** m)
    zeros = [factor_zeros(t, k, lo, hi) for k in range(m + 1)]
    spacing = 3.0 ** (-m) / 16
    grid = np.arange(lo, hi + spacing, spacing)
    seeds = np.concatenate([z.real for z in zeros] + [grid])
    x = np.unique(seeds[(seeds >= lo) & (seeds <= hi)])

    moduli = factor_moduli(t, m, x.astype(complex))
    phi_all = np.prod(moduli, axis=0)
    threshold = (epsilon_star / 3.0) ** m
    small = phi_all < threshold

    starts, stops = true_runs(small)
    intervals = UnionOfIntervals.from_pairs(np.column_stack((x[starts], x[stops - 1])))
    radius = C * 3.0 ** m * epsilon_star ** (m / M)

    worst = 0.0
    critical = sorted({int(k) for k in np.argmin(moduli[:, small], axis=0)}) if small.any() else []
    for i in np.flatnonzero(small):
        k0 = int(np.argmin(moduli[:, i]))
        if len(zeros[k0]) == 0:
            worst = math.inf
            break
        worst = max(worst, float(np.min(np.abs(zeros[k0] - x[i]))))
    if worst > radius:
        logger.warning("small values at t=%.6g escape radius %.3g (worst %.3g)", t, radius, worst)
    return SSVReport(t, m, epsilon_star, threshold, intervals, int(small.sum()), radius, worst, critical)
