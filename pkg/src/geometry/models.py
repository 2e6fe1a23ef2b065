"""
Data models for self-similar disc systems.
A SimilaritySystem is the recipe, a DiscCloud is one generation built from it.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import json

import numpy as np

from src.errors import DegenerateConfigurationError, GeometryError


AREA_TOL = 1e-12


@dataclass(frozen=True)
class SimilaritySystem:
    """
    Maps T_j(z) = ratio * z + c_j acting on a base disc of radius `base_radius`.

    `name` is only a label; two systems with equal ratio and centers are the same system.
    """
    ratio: Fraction
    centers: tuple
    open_set_margin: float = 0.0
    base_radius: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        ratio = Fraction(self.ratio).limit_denominator(10**9)
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "centers", tuple(complex(c) for c in self.centers))

        if not 0 < ratio < 1:
            raise GeometryError(f"ratio must lie in (0,1), got {ratio}")
        if len(self.centers) < 2:
            raise GeometryError("a similarity system needs at least 2 maps")
        if len(set(self.centers)) != len(self.centers):
            raise GeometryError("similarity centers must be pairwise distinct")
        if self.open_set_margin < 0:
            raise GeometryError("open_set_margin must be nonnegative")
        if self.base_radius <= 0:
            raise GeometryError("base_radius must be positive")

    @property
    def map_count(self) -> int:
        return len(self.centers)

    @property
    def centers_array(self) -> np.ndarray:
        return np.asarray(self.centers, dtype=complex)

    def apply(self, j: int, z: complex) -> complex:
        """Evaluate T_j(z)."""
        return float(self.ratio) * z + self.centers[j]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ratio": str(self.ratio),
            "centers": [[c.real, c.imag] for c in self.centers],
            "open_set_margin": self.open_set_margin,
            "base_radius": self.base_radius,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimilaritySystem":
        return cls(
            ratio=Fraction(data["ratio"]),
            centers=tuple(complex(re, im) for re, im in data["centers"]),
            open_set_margin=data.get("open_set_margin", 0.0),
            base_radius=data.get("base_radius", 1.0),
            name=data.get("name", "custom"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class DiscCloud:
    """
    One generation of discs: `centers[i]` is the image of 0 under the composition
    spelled by `words[i]` (indices into the system's map list, outermost map first).
    """
    generation: int
    radius: float
    centers: np.ndarray
    words: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.generation < 0:
            raise GeometryError("generation must be nonnegative")
        if self.radius <= 0:
            raise GeometryError("radius must be positive")
        if len(self.centers) != len(self.words):
            raise GeometryError("every center needs its word")
        self.centers.setflags(write=False)
        self.words.setflags(write=False)

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def total_projected_mass(self) -> float:
        """Integral of any projection multiplicity: each disc covers 2 * radius."""
        return 2.0 * self.radius * len(self.centers)

    def projections(self, theta: float) -> np.ndarray:
        """Signed position of every center on the line through 0 with direction theta."""
        return self.centers.real * np.cos(theta) + self.centers.imag * np.sin(theta)

    def hull_halfwidth(self) -> float:
        return float(np.max(np.abs(self.centers))) + self.radius


@dataclass(frozen=True)
class TriangleConfig:
    """
    Three similarity centers with |p1 - p3| = 1.
    delta is twice the triangle area (base 1 times height).
    """
    p1: complex
    p2: complex
    p3: complex
    delta: float = field(init=False)

    def __post_init__(self):
        p1, p2, p3 = complex(self.p1), complex(self.p2), complex(self.p3)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)
        object.__setattr__(self, "p3", p3)

        if abs(abs(p1 - p3) - 1.0) > AREA_TOL:
            raise DegenerateConfigurationError(f"|p1 - p3| must be 1, got {abs(p1 - p3)!r}")
        if abs(p2 - p1) > 1.0 + AREA_TOL or abs(p2 - p3) > 1.0 + AREA_TOL:
            raise DegenerateConfigurationError("p2 must lie within distance 1 of p1 and p3")

        delta = abs(((p2 - p1) * (p3 - p1).conjugate()).imag)
        if delta < AREA_TOL:
            raise DegenerateConfigurationError(f"colinear configuration (delta={delta:.3e})")
        object.__setattr__(self, "delta", delta)

    @property
    def points(self) -> tuple:
        return (self.p1, self.p2, self.p3)

    @property
    def centroid(self) -> complex:
        return (self.p1 + self.p2 + self.p3) / 3

    def to_dict(self) -> dict:
        return {
            "p1": [self.p1.real, self.p1.imag],
            "p2": [self.p2.real, self.p2.imag],
            "p3": [self.p3.real, self.p3.imag],
            "delta": self.delta,
        }


def memory_estimate(map_count: int, n: int) -> int:
    """Bytes needed for a generation-n cloud: complex128 centers plus int8 words."""
    count = map_count ** n
    return count * (16 + max(n, 1))
