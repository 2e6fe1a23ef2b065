"""
Direction-to-parameter map for triangle gaskets.

Projecting the three centers onto direction theta and sorting them gives c1 <= c2 <= c3;
the projected gasket is then a rescaled copy of the one-parameter family with
t = (c2 - c1) / (c3 - c1).
"""
import math
from dataclasses import dataclass

import numpy as np

from src.geometry.models import TriangleConfig


@dataclass(frozen=True)
class ThetaMap:
    theta: float
    t: float
    scale: float
    permutation: tuple
    dt_dtheta: float
    numerator: float


def theta_to_t(cfg: TriangleConfig, theta: float) -> ThetaMap:
    p = np.array(cfg.points, dtype=complex)
    rotated = p * np.exp(-1j * theta)
    c, s = rotated.real, rotated.imag  # s = dc/dtheta

    order = np.argsort(c, kind="stable")
    c, s = c[order], s[order]
    scale = c[2] - c[0]
    numerator = (s[1] - s[0]) * scale - (c[1] - c[0]) * (s[2] - s[0])
    return ThetaMap(
        theta=theta,
        t=float((c[1] - c[0]) / scale),
        scale=float(scale),
        permutation=tuple(int(i) for i in order),
        dt_dtheta=float(numerator / scale ** 2),
        numerator=float(numerator),
    )


@dataclass
class JacobianAudit:
    delta: float
    samples: int
    min_abs: float
    max_abs: float
    violations: int
    numerator_spread: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def jacobian_audit(cfg: TriangleConfig, samples: int = 10_000, rtol: float = 1e-12) -> JacobianAudit:
    """Check delta <= |dt/dtheta| <= 1/delta on a uniform grid of directions."""
    thetas = (np.arange(samples) + 0.5) * math.pi / samples
    maps = [theta_to_t(cfg, float(th)) for th in thetas]
    jac = np.abs([m.dt_dtheta for m in maps])
    nums = np.abs([m.numerator for m in maps])
    lo, hi = cfg.delta * (1 - rtol), (1 + rtol) / cfg.delta
    return JacobianAudit(
        delta=cfg.delta,
        samples=samples,
        min_abs=float(jac.min()),
        max_abs=float(jac.max()),
        violations=int(np.count_nonzero((jac < lo) | (jac > hi))),
        numerator_spread=float(nums.max() - nums.min()),
    )
