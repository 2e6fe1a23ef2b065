"""
Complex zeros of phi~_t(z) = 1 + e^{-itz} + e^{-iz}.

Zeros are isolated by quadtree subdivision of a rectangle, counting with the winding
number of phi~ along each box boundary, then polished by Newton's method.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np

from src.errors import DomainError, WindingInstabilityError
from src.fourier.products import phi_tilde, phi_tilde_dz

logger = logging.getLogger(__name__)

STRIP_H = 2.4
RESIDUAL_TOL = 1e-10
DEDUPE_TOL = 1e-8
INFLATE = 1e-6
# split boxes slightly off centre so symmetric zeros do not land on the cut
SPLIT_OFFSET = 0.0137
SNAP_TOL = 0.25
MAX_PHASE_STEP = math.pi / 3


@dataclass(frozen=True)
class Rect:
    """[re_lo, re_hi] x [im_lo, im_hi] in the complex plane."""
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def __post_init__(self):
        if not (self.re_lo < self.re_hi and self.im_lo < self.im_hi):
            raise DomainError(f"empty rectangle {self}")

    @classmethod
    def around(cls, z: complex, half_width: float, half_height: Optional[float] = None) -> "Rect":
        hh = half_width if half_height is None else half_height
        return cls(z.real - half_width, z.real + half_width, z.imag - hh, z.imag + hh)

    @classmethod
    def band(cls, m: int, widen: float = 1.0) -> "Rect":
        """Neighbourhood of radius widen * 3^{-m} around the interval [3^{-m}, 3^m]."""
        rho = widen * 3.0 ** (-m)
        return cls(3.0 ** (-m) - rho, 3.0 ** m + rho, -rho, rho)

    @property
    def width(self) -> float:
        return self.re_hi - self.re_lo

    @property
    def height(self) -> float:
        return self.im_hi - self.im_lo

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))

    @property
    def size(self) -> float:
        return max(self.width, self.height)

    def contains(self, z, margin: float = 0.0):
        z = np.asarray(z)
        return (
            (z.real >= self.re_lo - margin) & (z.real <= self.re_hi + margin)
            & (z.imag >= self.im_lo - margin) & (z.imag <= self.im_hi + margin)
        )

    def inflate(self, eps: float) -> "Rect":
        return Rect(self.re_lo - eps, self.re_hi + eps, self.im_lo - eps, self.im_hi + eps)

    def split(self, offset: float = SPLIT_OFFSET) -> tuple["Rect", "Rect"]:
        if self.width >= self.height:
            cut = self.re_lo + (0.5 + offset) * self.width
            return Rect(self.re_lo, cut, self.im_lo, self.im_hi), Rect(cut, self.re_hi, self.im_lo, self.im_hi)
        cut = self.im_lo + (0.5 + offset) * self.height
        return Rect(self.re_lo, self.re_hi, self.im_lo, cut), Rect(self.re_lo, self.re_hi, cut, self.im_hi)

    def inscribed_disc(self) -> tuple[complex, float]:
        return self.center, 0.5 * min(self.width, self.height)

    def boundary(self, samples: int) -> np.ndarray:
        """Counterclockwise boundary points, spaced by arc length, starting at the lower-left corner."""
        perimeter = 2 * (self.width + self.height)
        s = np.arange(samples) * perimeter / samples
        w, h = self.width, self.height
        z = np.empty(samples, dtype=complex)
        seg = [
            (s < w, lambda u: complex(self.re_lo, self.im_lo) + u),
            ((s >= w) & (s < w + h), lambda u: complex(self.re_hi, self.im_lo) + 1j * (u - w)),
            ((s >= w + h) & (s < 2 * w + h), lambda u: complex(self.re_hi, self.im_hi) - (u - w - h)),
            (s >= 2 * w + h, lambda u: complex(self.re_lo, self.im_hi) - 1j * (u - 2 * w - h)),
        ]
        for mask, along in seg:
            z[mask] = along(s[mask])
        return z

    def grid(self, spacing: float) -> np.ndarray:
        nx = max(2, int(math.ceil(self.width / spacing)) + 1)
        ny = max(2, int(math.ceil(self.height / spacing)) + 1)
        xs = np.linspace(self.re_lo, self.re_hi, nx)
        ys = np.linspace(self.im_lo, self.im_hi, ny)
        return xs[None, :] + 1j * ys[:, None]

    def to_dict(self) -> dict:
        return {"re_lo": self.re_lo, "re_hi": self.re_hi, "im_lo": self.im_lo, "im_hi": self.im_hi}


def winding_number(f: Callable, rect: Rect, samples: Optional[int] = None, max_doublings: int = 12) -> int:
    """
    Number of zeros of f inside rect (argument principle), by summing phase increments
    along the boundary. Sampling doubles until every increment is below pi/3 and the
    count is within SNAP_TOL of the same integer at two consecutive resolutions.
    """
    n = samples or max(64, int(math.ceil(16 * 2 * (rect.width + rect.height))))
    return contour_winding(f, rect.boundary, n, max_doublings, label=str(rect))


def contour_winding(f: Callable, contour: Callable, samples: int, max_doublings: int = 12, label: str = "contour") -> int:
    """Winding number of f along contour(n), a closed counterclockwise polygon of n points."""
    n = samples
    previous = None
    for _ in range(max_doublings + 1):
        values = f(contour(n))
        if np.any(np.abs(values) < 1e-14):
            raise WindingInstabilityError(f"zero on {label}")
        steps = np.angle(np.roll(values, -1) / values)
        if np.max(np.abs(steps)) < MAX_PHASE_STEP:
            w = steps.sum() / (2 * math.pi)
            count = int(round(w))
            if abs(w - count) < SNAP_TOL:
                if previous == count:
                    return count
                previous = count
        n *= 2
    raise WindingInstabilityError(f"winding number on {label} did not settle at {n // 2} samples")


def circle(center: complex, radius: float) -> Callable:
    """Contour sampler for the circle |z - center| = radius."""
    return lambda n: center + radius * np.exp(2j * math.pi * np.arange(n) / n)


def stable_winding(f: Callable, rect: Rect, inflate: float = INFLATE) -> tuple[int, Rect]:
    """Winding number, retried once on a slightly inflated box."""
    try:
        return winding_number(f, rect), rect
    except WindingInstabilityError:
        bigger = rect.inflate(inflate)
        logger.debug("winding unstable on %s, retrying inflated by %g", rect, inflate)
        return winding_number(f, bigger), bigger


def newton(f: Callable, df: Callable, z0: complex, tol: float = RESIDUAL_TOL, max_iter: int = 60) -> tuple[complex, float, int]:
    """Newton iteration; returns (z, |f(z)|, iterations)."""
    z = complex(z0)
    for it in range(1, max_iter + 1):
        fz = complex(f(z))
        dz = complex(df(z))
        if dz == 0:
            break
        step = fz / dz
        z -= step
        if abs(step) < 1e-15 * max(1.0, abs(z)) or abs(fz) < tol * 1e-4:
            break
    return z, abs(complex(f(z))), it


def find_zeros(
    t: complex,
    rect: Rect,
    strip_h: float = STRIP_H,
    residual_tol: float = RESIDUAL_TOL,
    min_box: float = 1e-9,
) -> list[complex]:
    """
    All zeros of phi~_t in rect, each to residual below residual_tol.

    Args:
        t: Parameter of phi~_t (complex t is allowed)
        rect: Search rectangle, no taller than the strip 2 * strip_h
        strip_h: Half-height of the strip where zeros can live
        residual_tol: Required |phi~_t(z)| at each returned zero
        min_box: Side below which a box is no longer subdivided

    Returns:
        Zeros sorted by real part, duplicates removed. A rectangle taller
        than the strip is a DomainError.
    """
    if rect.height > 2 * strip_h + 1e-12:
        raise DomainError(f"rectangle height {rect.height:g} exceeds the strip 2H = {2 * strip_h:g}")

    f = partial(phi_tilde, t)
    df = partial(phi_tilde_dz, t)

    found: list[complex] = []
    stack = [rect]
    while stack:
        box = stack.pop()
        count, box = stable_winding(f, box)
        if count == 0:
            continue
        if count == 1 or box.size < min_box:
            z, res, _ = newton(f, df, box.center, residual_tol)
            if res < residual_tol and box.contains(z, margin=INFLATE):
                found.append(z)
                if count > 1:
                    logger.warning("cluster of %d zeros near %s treated as one", count, z)
                continue
            if box.size < min_box:
                logger.warning("newton failed to settle in a box of size %.1e near %s", box.size, box.center)
                continue
        stack.extend(box.split())

    return _dedupe(found)


def _dedupe(zeros: list[complex], tol: float = DEDUPE_TOL) -> list[complex]:
    zeros = sorted(zeros, key=lambda z: (z.real, z.imag))
    kept: list[complex] = []
    for z in zeros:
        if all(abs(z - k) > tol for k in kept):
            kept.append(z)
    return kept


def count_band_zeros(t: float, m: int, half_height: float = 1.0) -> int:
    """Zeros of phi~_t in [3^{-m}, 3^m] x [-half_height, half_height]."""
    return len(find_zeros(t, Rect(3.0 ** (-m), 3.0 ** m, -half_height, half_height)))


def band_growth(t: float, ms: list[int]) -> dict:
    """Zero counts per band and the least-squares slope against 3^m."""
    counts = [count_band_zeros(t, m) for m in ms]
    slope, intercept = np.polyfit([3.0 ** m for m in ms], counts, 1)
    return {"t": t, "m": list(ms), "counts": counts, "slope": float(slope), "intercept": float(intercept)}


@dataclass(frozen=True)
class BranchCandidate:
    t: complex
    z: complex
    residual: float
    derivative_residual: float
    k: int
    j: int


def _branch_z(t: complex, k: int) -> complex:
    # e^{-iz} = t / (1 - t)
    return 1j * (cmath.log(t / (1 - t)) + 2j * math.pi * k)


def branch_candidates(
    t: complex,
    radius: float = 0.0,
    k_max: int = 3,
    residual_tol: float = RESIDUAL_TOL,
) -> list[BranchCandidate]:
    """
    Common zeros of phi~ and its z-derivative. Eliminating z leaves
    e^{-iz} = t/(1-t) and e^{-itz} = 1/(t-1).

    radius == 0 inspects the slice at t exactly; radius > 0 runs Newton on the
    eliminated equation in t from the centre of the disc |t' - t| <= radius.
    """
    t = complex(t)
    if t in (0, 1):
        return []
    out: list[BranchCandidate] = []

    def candidate(tt: complex, k: int, j: int) -> Optional[BranchCandidate]:
        z = _branch_z(tt, k)
        if abs(z.imag) > 50:
            return None
        with np.errstate(over="ignore", invalid="ignore"):
            res = abs(complex(phi_tilde(tt, z)))
            dres = abs(complex(phi_tilde_dz(tt, z)))
        if res < residual_tol and dres < residual_tol:
            return BranchCandidate(tt, z, res, dres, k, j)
        return None

    ks = range(-k_max, k_max + 1)
    if radius == 0.0:
        for k in ks:
            c = candidate(t, k, 0)
            if c:
                out.append(c)
        return out

    for k in ks:
        for j in ks:
            tt = t
            for _ in range(60):
                if tt in (0, 1):
                    break
                L = cmath.log(tt / (1 - tt)) + 2j * math.pi * k
                F = tt * L + cmath.log(tt - 1) - 2j * math.pi * j
                if L == 0:
                    break
                step = F / L  # dF/dt = L
                tt -= step
                if abs(step) < 1e-15:
                    break
            if abs(tt - t) <= radius:
                c = candidate(tt, k, j)
                if c and all(abs(c.t - o.t) > 1e-9 or c.k != o.k for o in out):
                    out.append(c)
    return out


def derivative_floor_ratio(t: float, zeros: list[complex]) -> float:
    """min |phi~'_t| over the given real-t zeros, divided by |1 - 2t|."""
    if not zeros:
        return math.inf
    d = np.abs(phi_tilde_dz(t, np.asarray(zeros)))
    return float(d.min() / abs(1 - 2 * t)) if t != 0.5 else math.inf


def strip_point(t: float, x: float, strip_h: float = STRIP_H, samples: int = 720) -> tuple[complex, float]:
    """A point z with |z - x| <= H maximising |phi~_t| on the circle of radius H."""
    z = x + strip_h * np.exp(2j * math.pi * np.arange(samples) / samples)
    values = np.abs(phi_tilde(t, z))
    i = int(np.argmax(values))
    return complex(z[i]), float(values[i])
