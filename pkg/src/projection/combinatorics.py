"""
Brute-force checks of the combinatorial estimates on level sets of f*_N:
stacking |F_{4KM}| <= C K |F_K| |F_M|, the L^2 bound for bad directions,
and the bootstrap from one generation to a deeper one.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Optional

from src.geometry.models import SimilaritySystem
from src.geometry.systems import DEFAULT_GENERATION_CAP, gasket_system
from src.projection.engine import (
    DEFAULT_MERGE_EPS,
    bad_direction,
    cached_cells,
    level_set,
    multiplicity,
    sup_multiplicity,
    support_length,
)

logger = logging.getLogger(__name__)


@dataclass
class StackingOutcome:
    theta: float
    N: int
    K: float
    M: float
    top: float
    f_k: float
    f_m: float
    ratio: Optional[float]

    @property
    def vacuous(self) -> bool:
        return self.ratio is None

    def to_dict(self) -> dict:
        data = asdict(self)
        data["vacuous"] = self.vacuous
        return data


def stacking_ratio(
    theta: float,
    N: int,
    K: float,
    M: float,
    system: Optional[SimilaritySystem] = None,
    merge_eps: float = DEFAULT_MERGE_EPS,
    cap: int = DEFAULT_GENERATION_CAP,
) -> StackingOutcome:
    """|F_{4KM}| / (K |F_K| |F_M|) with F_L = {f*_N > L}; a zero denominator is vacuous."""
    system = system or gasket_system()
    f_star = sup_multiplicity(system, N, theta, merge_eps, cap)
    top = level_set(f_star, 4 * K * M, strict=True).measure
    f_k = level_set(f_star, K, strict=True).measure
    f_m = level_set(f_star, M, strict=True).measure

    denom = K * f_k * f_m
    ratio = top / denom if denom > 0 else None
    if ratio is None:
        logger.debug("stacking at theta=%.4f N=%d K=%g M=%g is vacuous", theta, N, K, M)
    return StackingOutcome(theta, N, K, M, top, f_k, f_m, ratio)


def l2_constant(
    theta: float,
    K: float,
    N: int,
    exponent: float = 3.0,
    system: Optional[SimilaritySystem] = None,
    merge_eps: float = DEFAULT_MERGE_EPS,
    cap: int = DEFAULT_GENERATION_CAP,
) -> Optional[float]:
    """max_{n<=N} ||f_{n,theta}||_2^2 / K for a bad direction, None when theta is not bad."""
    system = system or gasket_system()
    if not bad_direction(theta, K, N, exponent, system, merge_eps, cap):
        return None
    worst = max(multiplicity(cached_cells(system, n, cap), theta, merge_eps).l2_squared for n in range(N + 1))
    return worst / K


@dataclass
class BootstrapOutcome:
    theta: float
    N: int
    K: float
    beta: float
    f_k: float
    multiplier: int
    generation: int
    target_generation: float
    measured: float
    bound: float

    @property
    def capped(self) -> bool:
        return self.generation < self.multiplier * self.N

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(capped=self.capped, holds=self.holds)
        return data


def bootstrap_check(
    theta: float,
    N: int,
    K: float,
    beta: float = 3.0,
    C: float = 1.0,
    system: Optional[SimilaritySystem] = None,
    merge_eps: float = DEFAULT_MERGE_EPS,
    cap: int = DEFAULT_GENERATION_CAP,
) -> BootstrapOutcome:
    """
    Support length at generation min(cap, l N), l = ceil(1/|F_K|), against C/K.
    The asymptotic target N K^beta is reported but never reached at desk scale.
    """
    system = system or gasket_system()
    f_k = level_set(sup_multiplicity(system, N, theta, merge_eps, cap), K, strict=True).measure
    multiplier = math.ceil(1.0 / f_k) if f_k > 0 else cap
    generation = min(cap, multiplier * N)
    measured = support_length(cached_cells(system, generation, cap), theta, merge_eps)
    return BootstrapOutcome(
        theta=theta,
        N=N,
        K=K,
        beta=beta,
        f_k=f_k,
        multiplier=multiplier,
        generation=generation,
        target_generation=N * K ** beta,
        measured=measured,
        bound=C / K,
    )
