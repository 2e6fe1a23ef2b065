"""
Exact piecewise-constant functions on the line and the interval unions they produce.

A StepFunction takes the value values[i] on [breakpoints[i], breakpoints[i+1]) and 0
outside [breakpoints[0], breakpoints[-1]]. Adjacent gaps never share a value, so every
stored breakpoint is a genuine jump.
"""
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import pandas as pd

from src.errors import DomainError


def true_runs(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Start and stop indices (stop exclusive) of the True runs of a boolean array."""
    padded = np.concatenate(([0], mask.astype(np.int8), [0]))
    edges = np.diff(padded)
    return np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)


@dataclass(frozen=True)
class UnionOfIntervals:
    """Sorted, pairwise-disjoint closed intervals, stored as a (k, 2) array."""
    endpoints: np.ndarray
    merge_eps: float = 0.0

    def __post_init__(self):
        ends = np.asarray(self.endpoints, dtype=float).reshape(-1, 2)
        if self.merge_eps < 0:
            raise DomainError("merge_eps must be nonnegative")
        if np.any(ends[:, 1] < ends[:, 0]):
            raise DomainError("interval with right end before left end")
        if len(ends) > 1 and np.any(ends[1:, 0] - ends[:-1, 1] <= self.merge_eps):
            raise DomainError("intervals must be separated by more than merge_eps")
        ends.setflags(write=False)
        object.__setattr__(self, "endpoints", ends)

    @classmethod
    def empty(cls, merge_eps: float = 0.0) -> "UnionOfIntervals":
        return cls(np.empty((0, 2)), merge_eps)

    @classmethod
    def from_pairs(cls, pairs: Iterable, merge_eps: float = 0.0) -> "UnionOfIntervals":
        """Merge arbitrary (possibly overlapping) intervals."""
        arr = np.asarray(list(pairs), dtype=float).reshape(-1, 2)
        if len(arr) == 0:
            return cls.empty(merge_eps)
        arr = arr[np.argsort(arr[:, 0], kind="stable")]
        reach = np.maximum.accumulate(arr[:, 1])
        new_block = np.concatenate(([True], arr[1:, 0] - reach[:-1] > merge_eps))
        starts = np.flatnonzero(new_block)
        stops = np.concatenate((starts[1:], [len(arr)])) - 1
        return cls(np.column_stack((arr[starts, 0], reach[stops])), merge_eps)

    def __len__(self) -> int:
        return len(self.endpoints)

    def __iter__(self):
        return iter(map(tuple, self.endpoints))

    @property
    def is_empty(self) -> bool:
        return len(self.endpoints) == 0

    @property
    def length(self) -> float:
        return float(np.sum(self.endpoints[:, 1] - self.endpoints[:, 0]))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.is_empty:
            return np.zeros(x.shape, dtype=bool)
        idx = np.searchsorted(self.endpoints[:, 0], x, side="right") - 1
        safe = np.clip(idx, 0, len(self) - 1)
        return (idx >= 0) & (x <= self.endpoints[safe, 1])

    def to_dict(self) -> dict:
        return {"intervals": self.endpoints.tolist(), "merge_eps": self.merge_eps, "length": self.length}


@dataclass(frozen=True)
class StepFunction:
    breakpoints: np.ndarray
    values: np.ndarray
    merge_eps: float = 0.0

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=np.int64)
        if len(b) == 0:
            if len(v):
                raise DomainError("values without breakpoints")
        elif len(v) != len(b) - 1:
            raise DomainError("need exactly one value per gap")
        if np.any(np.diff(b) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        if np.any(v < 0):
            raise DomainError("multiplicities are nonnegative")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0, dtype=np.int64))

    @classmethod
    def from_intervals(cls, lefts: np.ndarray, rights: np.ndarray, merge_eps: float = 0.0) -> "StepFunction":
        """
        Sum of indicators of [lefts[i], rights[i]] by a single sweep.
        Endpoints closer than merge_eps to their predecessor are treated as coincident.
        """
        lefts = np.asarray(lefts, dtype=float)
        rights = np.asarray(rights, dtype=float)
        if len(lefts) == 0:
            return cls.zero()

        positions = np.concatenate((lefts, rights))
        deltas = np.concatenate((np.ones(len(lefts), dtype=np.int64), -np.ones(len(rights), dtype=np.int64)))
        order = np.argsort(positions, kind="stable")
        positions, deltas = positions[order], deltas[order]

        starts = np.flatnonzero(np.concatenate(([True], np.diff(positions) > merge_eps)))
        jumps = np.add.reduceat(deltas, starts)
        levels = np.cumsum(jumps)
        return cls._compressed(positions[starts], levels[:-1], merge_eps)

    @classmethod
    def _compressed(cls, breakpoints: np.ndarray, values: np.ndarray, merge_eps: float) -> "StepFunction":
        """Drop breakpoints where the value does not actually change."""
        extended = np.concatenate(([0], values, [0]))
        keep = np.flatnonzero(extended[:-1] != extended[1:])
        if len(keep) == 0:
            return cls.zero()
        return cls(breakpoints[keep], extended[keep[:-1] + 1], merge_eps)

    # -- evaluation --------------------------------------------------------

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if len(self.breakpoints) == 0:
            return np.zeros(x.shape, dtype=np.int64)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        out = np.zeros(x.shape, dtype=np.int64)
        out[inside] = self.values[idx[inside]]
        return out

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def mass(self) -> float:
        """Integral of f."""
        return float(np.dot(self.values, self.widths)) if len(self.values) else 0.0

    @property
    def l2_squared(self) -> float:
        return float(np.dot(self.values.astype(float) ** 2, self.widths)) if len(self.values) else 0.0

    @property
    def maximum(self) -> int:
        return int(self.values.max()) if len(self.values) else 0

    @property
    def hull(self) -> tuple[float, float]:
        if len(self.breakpoints) == 0:
            return (0.0, 0.0)
        return (float(self.breakpoints[0]), float(self.breakpoints[-1]))

    # -- derived sets ------------------------------------------------------

    def superlevel(self, K: float, strict: bool = False) -> UnionOfIntervals:
        """{f >= K}, or {f > K} when strict."""
        if len(self.values) == 0:
            return UnionOfIntervals.empty(self.merge_eps)
        mask = self.values > K if strict else self.values >= K
        starts, stops = true_runs(mask)
        pairs = np.column_stack((self.breakpoints[starts], self.breakpoints[stops]))
        return UnionOfIntervals.from_pairs(pairs, self.merge_eps)

    def support(self) -> UnionOfIntervals:
        return self.superlevel(1)

    def support_lower_bound(self) -> float:
        """Cauchy-Schwarz floor (int f)^2 / int f^2 for the support length."""
        l2 = self.l2_squared
        return self.mass ** 2 / l2 if l2 > 0 else 0.0

    def pointwise_max(self, *others: "StepFunction") -> "StepFunction":
        """Pointwise maximum, evaluated on the merged breakpoint grid."""
        funcs = (self,) + others
        grid = np.unique(np.concatenate([f.breakpoints for f in funcs]))
        if len(grid) < 2:
            return StepFunction.zero()
        mids = 0.5 * (grid[:-1] + grid[1:])
        stacked = np.vstack([f(mids) for f in funcs])
        eps = max(f.merge_eps for f in funcs)
        return StepFunction._compressed(grid, stacked.max(axis=0), eps)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "left": self.breakpoints[:-1],
            "right": self.breakpoints[1:],
            "value": self.values,
        })


@dataclass(frozen=True)
class LevelSetReport:
    K: float
    set: UnionOfIntervals = field(repr=False)
    measure: float
    strict: bool = False

    def to_dict(self) -> dict:
        return {"K": self.K, "measure": self.measure, "components": len(self.set), "strict": self.strict}
