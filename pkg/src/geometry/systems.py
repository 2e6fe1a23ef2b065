"""
Builders for gasket approximants and general self-similar disc systems.
"""
import logging
from fractions import Fraction

import numpy as np

from src.errors import GeometryError, ResourceCapError
from src.geometry.models import DiscCloud, SimilaritySystem, TriangleConfig, memory_estimate

logger = logging.getLogger(__name__)

DEFAULT_GENERATION_CAP = 14

# e^{i pi (1/2 + 2 alpha / 3)} for alpha = -1, 0, 1 (in that order)
GASKET_DIRECTIONS = np.exp(1j * np.pi * (0.5 + 2.0 * np.array([-1, 0, 1]) / 3.0))
GASKET_ALPHABET = (-1, 0, 1)


def gasket_system() -> SimilaritySystem:
    return SimilaritySystem(
        ratio=Fraction(1, 3),
        centers=tuple(GASKET_DIRECTIONS / 3.0),
        name="gasket",
    )


def four_corner_system() -> SimilaritySystem:
    offsets = (-0.375 - 0.375j, 0.375 - 0.375j, -0.375 + 0.375j, 0.375 + 0.375j)
    return SimilaritySystem(ratio=Fraction(1, 4), centers=offsets, name="four-corner")


def triangle_system(cfg: TriangleConfig) -> SimilaritySystem:
    """Gasket built on a general triangle: the attractor has vertices p_j - centroid."""
    g = cfg.centroid
    centers = tuple((2.0 / 3.0) * (p - g) for p in cfg.points)
    return SimilaritySystem(
        ratio=Fraction(1, 3),
        centers=centers,
        name=f"triangle:{cfg.p2.imag:g}",
    )


def triangle_config(p2_im: float, p2_re: float = 0.5) -> TriangleConfig:
    return TriangleConfig(0j, complex(p2_re, p2_im), 1 + 0j)


def parse_preset(preset: str) -> SimilaritySystem:
    """Resolve a CLI preset name: `gasket`, `four-corner`, or `triangle:<p2-im>`."""
    preset = preset.strip()
    if preset == "gasket":
        return gasket_system()
    if preset == "four-corner":
        return four_corner_system()
    if preset.startswith("triangle:"):
        try:
            height = float(preset.split(":", 1)[1])
        except ValueError as exc:
            raise GeometryError(f"bad triangle preset {preset!r}") from exc
        return triangle_system(triangle_config(height))
    raise GeometryError(f"unknown preset {preset!r}; expected gasket, four-corner or triangle:<p2-im>")


def check_generation(system: SimilaritySystem, n: int, cap: int = DEFAULT_GENERATION_CAP):
    if n < 0:
        raise GeometryError(f"generation must be nonnegative, got {n}")
    estimate = memory_estimate(system.map_count, n)
    if n > cap:
        raise ResourceCapError(
            f"generation {n} exceeds the generation cap {cap} "
            f"({system.map_count}^{n} discs, about {estimate / 2**20:.1f} MiB)"
        )
    logger.debug("generation %d of %s needs about %.1f MiB", n, system.name, estimate / 2**20)
    return estimate


def _level_terms(system: SimilaritySystem, n: int) -> list:
    """Translation contributed by the k-th map of a word, for k = 0..n-1."""
    r = float(system.ratio)
    c = system.centers_array
    return [r ** k * c for k in range(n)]


def cells(system: SimilaritySystem, n: int, cap: int = DEFAULT_GENERATION_CAP) -> DiscCloud:
    """All n-fold composition images of the base disc, built level by level."""
    check_generation(system, n, cap)
    q = system.map_count

    centers = np.zeros(1, dtype=complex)
    words = np.zeros((1, 0), dtype=np.int8)
    for term in _level_terms(system, n):
        centers = (centers[:, None] + term[None, :]).ravel()
        words = np.concatenate(
            [np.repeat(words, q, axis=0), np.tile(np.arange(q, dtype=np.int8), len(words))[:, None]],
            axis=1,
        )

    radius = float(system.ratio) ** n * system.base_radius
    return DiscCloud(generation=n, radius=radius, centers=centers, words=words)


def enumerate_words(q: int, n: int) -> np.ndarray:
    """All words of length n over range(q) in lexicographic order, first letter most significant."""
    idx = np.arange(q ** n, dtype=np.int64)
    digits = np.empty((q ** n, n), dtype=np.int8)
    for k in range(n):
        digits[:, k] = (idx // q ** (n - 1 - k)) % q
    return digits


def cells_from_words(system: SimilaritySystem, words: np.ndarray) -> np.ndarray:
    """Regenerate centers directly from their words."""
    n = words.shape[1]
    z = np.zeros(len(words), dtype=complex)
    for k, term in enumerate(_level_terms(system, n)):
        z = z + term[words[:, k]]
    return z


def gasket_centers(n: int, cap: int = DEFAULT_GENERATION_CAP) -> np.ndarray:
    """
    z_alpha = sum_k 3^{-k} e^{i pi (1/2 + 2 alpha_k / 3)} for every alpha in {-1,0,1}^n,
    enumerated directly (not by recursion), lexicographic in alpha.
    """
    system = gasket_system()
    check_generation(system, n, cap)
    return cells_from_words(system, enumerate_words(3, n))


def degeneracy(p1: complex, p2: complex, p3: complex) -> float:
    """Twice the area of the triangle p1 p2 p3, which must have |p1 - p3| = 1."""
    return TriangleConfig(p1, p2, p3).delta


def is_nested(parent: DiscCloud, child: DiscCloud, tol: float = 1e-12) -> bool:
    """Every child disc lies inside the parent disc its word descends from."""
    if child.generation != parent.generation + 1:
        raise GeometryError("nesting compares consecutive generations")
    q = int(round(len(child) / len(parent)))
    parent_of = np.arange(len(child)) // q
    gap = np.abs(child.centers - parent.centers[parent_of]) + child.radius
    return bool(np.all(gap <= parent.radius + tol))
