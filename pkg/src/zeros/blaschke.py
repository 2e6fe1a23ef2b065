"""
Zero counting for bounded holomorphic functions on the unit disc, and the localisation
of small values near zeros that follows from it.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Callable, Optional

import numpy as np

from src.errors import DomainError
from src.fourier.products import phi_tilde, phi_tilde_dz
from src.zeros.finder import STRIP_H, Rect, circle, contour_winding, find_zeros, strip_point

logger = logging.getLogger(__name__)


@dataclass
class BlaschkeReport:
    value_at_zero: float
    sup: float
    bound: int
    zeros_in_half_disc: int

    @property
    def holds(self) -> bool:
        return self.zeros_in_half_disc <= self.bound

    def to_dict(self) -> dict:
        data = asdict(self)
        data["holds"] = self.holds
        return data


def blaschke_count(f: Callable, sup_bound: Optional[float] = None, boundary_samples: int = 1024) -> BlaschkeReport:
    """
    floor(log2 C) for f holomorphic on the closed unit disc with |f(0)| >= 1 and |f| <= C,
    cross-checked against the actual number of zeros in |z| < 1/2.
    """
    f0 = abs(complex(f(np.zeros(1))[0]))
    if f0 < 1.0:
        raise DomainError(f"|f(0)| = {f0:.6g} < 1; normalise first")
    if sup_bound is None:
        sup_bound = float(np.max(np.abs(f(circle(0j, 1.0)(boundary_samples)))))
    bound = int(math.floor(math.log2(sup_bound)))
    zeros = contour_winding(f, circle(0j, 0.5), 256, label="|z| = 1/2")
    return BlaschkeReport(f0, sup_bound, bound, zeros)


def normalised_phi(t: complex, z0: complex, radius: float) -> Callable:
    """w -> phi~_t(z0 + radius w) / |phi~_t(z0)|, so the value at 0 has modulus 1."""
    scale = abs(complex(phi_tilde(t, z0)))
    if scale == 0:
        raise DomainError(f"phi~ vanishes at the centre {z0}")
    return lambda w: phi_tilde(t, z0 + radius * np.asarray(w)) / scale


def strip_disc_count(t: float, x: float, strip_h: float = STRIP_H) -> BlaschkeReport:
    """Blaschke count for phi~ on the disc of radius H about the strip point near x."""
    z_star, value = strip_point(t, x, strip_h)
    if value < 0.5:
        logger.warning("strip point near x=%g only reaches |phi~| = %.3g", x, value)
    return blaschke_count(normalised_phi(t, z_star, strip_h))


@dataclass
class LocalizationReport:
    contained: bool
    epsilon: float
    radius: float
    zeros: int
    small_points: int
    worst_margin: float
    relative_margin: float

    def to_dict(self) -> dict:
        return asdict(self)


def small_value_localization(
    t: complex,
    eps: float,
    rect: Rect,
    M: int = 5,
    grid: int = 201,
    local_grid: int = 81,
) -> LocalizationReport:
    """
    On the disc inscribed in rect, check {|phi~_t| < eps} within a quarter of the radius
    lies inside the union of discs about the zeros (in the half disc) of radius
    rho * (9/16) (3 delta)^{1/M}, delta = eps / |phi~_t(centre)|.
    """
    z0, rho = rect.inscribed_disc()
    g = normalised_phi(t, z0, rho)
    scale = abs(complex(phi_tilde(t, z0)))
    delta = eps / scale

    half = Rect.around(z0, rho / 2)
    zeros = [z for z in find_zeros(t, half) if abs(z - z0) < rho / 2]
    M = max(M, len(zeros))
    radius_w = (9.0 / 16.0) * min(3.0 * delta, 1.0) ** (1.0 / M)
    radius = rho * radius_w

    w = np.linspace(-0.25, 0.25, grid)
    points = [(w[None, :] + 1j * w[:, None]).ravel()]
    for zk in zeros:
        wk = (zk - z0) / rho
        slope = abs(complex(phi_tilde_dz(t, zk))) * rho / scale
        for r in (2.0 * radius_w, min(2.0 * radius_w, 4.0 * delta / max(slope, 1e-300))):
            u = np.linspace(-r, r, local_grid)
            points.append(wk + (u[None, :] + 1j * u[:, None]).ravel())
    pts = np.concatenate(points)
    pts = pts[np.abs(pts) <= 0.25]

    small = pts[np.abs(g(pts)) < delta]
    if len(small) == 0:
        return LocalizationReport(True, eps, radius, len(zeros), 0, radius, 1.0)
    if not zeros:
        return LocalizationReport(False, eps, radius, 0, len(small), -math.inf, -math.inf)

    wz = (np.asarray(zeros) - z0) / rho
    dist = np.min(np.abs(small[:, None] - wz[None, :]), axis=1) * rho
    worst = float(radius - dist.max())
    return LocalizationReport(worst > 0, eps, radius, len(zeros), len(small), worst, worst / radius)
