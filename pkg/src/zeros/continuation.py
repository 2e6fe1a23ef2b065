"""
Continuation of a zero lambda(t) of phi~_t along real t, and the g-functions built from it.

Predictor: lambda' = -phi~_t / phi~_z. Corrector: Newton in z at the new t.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from src.errors import DomainError
from src.fourier.products import phi_tilde, phi_tilde_dt, phi_tilde_dz
from src.projection.intervals import true_runs
from src.zeros.finder import RESIDUAL_TOL, STRIP_H, newton

logger = logging.getLogger(__name__)

MAX_CORRECTOR_ITERATIONS = 5
MIN_STEP = 1e-10

NEAR_BRANCH = "near-branch"
LEFT_STRIP = "left-strip"
STEP_UNDERFLOW = "step-underflow"


@dataclass
class ZeroTrace:
    """Samples (t, lambda(t), lambda'(t)) of one continued zero; k_index tags its scale."""
    t: np.ndarray
    lam: np.ndarray
    dlam: np.ndarray
    k_index: int = 0
    truncated_reason: Optional[str] = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def truncated(self) -> bool:
        return self.truncated_reason is not None

    @property
    def endpoint(self) -> complex:
        return complex(self.lam[-1])

    @property
    def x_tilde(self) -> np.ndarray:
        return self.lam.real

    def rescaled(self) -> np.ndarray:
        """lambda = 3^k lambda~ for the factor phi_t(3^{-k} .)."""
        return 3.0 ** self.k_index * self.lam

    def residuals(self) -> np.ndarray:
        return np.abs(phi_tilde(self.t, self.lam))

    def to_records(self) -> list[dict]:
        return [
            {
                "t": float(t),
                "re_lambda": float(l.real),
                "im_lambda": float(l.imag),
                "re_dlambda": float(d.real),
                "im_dlambda": float(d.imag),
                "k_index": self.k_index,
            }
            for t, l, d in zip(self.t, self.lam, self.dlam)
        ]

    @classmethod
    def from_records(cls, records: list[dict], truncated_reason: Optional[str] = None) -> "ZeroTrace":
        return cls(
            t=np.array([r["t"] for r in records]),
            lam=np.array([complex(r["re_lambda"], r["im_lambda"]) for r in records]),
            dlam=np.array([complex(r["re_dlambda"], r["im_dlambda"]) for r in records]),
            k_index=records[0]["k_index"] if records else 0,
            truncated_reason=truncated_reason,
        )


def zero_velocity(t: float, lam: complex) -> complex:
    return complex(-phi_tilde_dt(t, lam) / phi_tilde_dz(t, lam))


def derivative_floor(t: float, lam: complex, m: int) -> float:
    """1e-3 |1 - 2t| inside the critical band |Im z| <= 3^{-m}, 1e-8 elsewhere."""
    if abs(lam.imag) <= 3.0 ** (-m):
        return 1e-3 * abs(1 - 2 * t)
    return 1e-8


def continue_zero(
    t0: float,
    lam0: complex,
    t1: float,
    max_step: float = 1e-3,
    m: int = 4,
    residual_tol: float = RESIDUAL_TOL,
    strip_h: float = STRIP_H,
    k_index: int = 0,
) -> ZeroTrace:
    """
    Follow a simple zero of phi~_t from t0 to t1 by predictor-corrector steps.

    Args:
        t0: Start parameter
        lam0: Zero of phi~_{t0} to follow
        t1: End parameter (either side of t0)
        max_step: Largest step in t
        m: Scale used for the branch-point floor on |d phi~/dz|
        residual_tol: Residual each corrected point must reach
        strip_h: Half-height of the strip; leaving twice that ends the trace
        k_index: Factor label carried into the trace

    Returns:
        ZeroTrace; `truncated_reason` names why t1 was not reached
    """
    lam0 = complex(lam0)
    if abs(complex(phi_tilde(t0, lam0))) >= residual_tol:
        raise DomainError(f"lambda0={lam0} is not a zero of phi~ at t={t0} (residual above {residual_tol:g})")
    if abs(complex(phi_tilde_dz(t0, lam0))) <= derivative_floor(t0, lam0, m):
        raise DomainError(f"start ({t0}, {lam0}) is too close to a branch point")

    ts, lams, dlams = [t0], [lam0], [zero_velocity(t0, lam0)]
    t, lam = t0, lam0
    direction = 1.0 if t1 >= t0 else -1.0
    h = min(max_step, abs(t1 - t0))
    reason = None

    while direction * (t1 - t) > 0:
        h = min(h, abs(t1 - t))
        t_next = t1 if h == abs(t1 - t) else t + direction * h
        guess = lam + (t_next - t) * dlams[-1]

        f = partial(phi_tilde, t_next)
        df = partial(phi_tilde_dz, t_next)
        z, res, iterations = newton(f, df, guess, residual_tol, max_iter=MAX_CORRECTOR_ITERATIONS + 1)

        if iterations > MAX_CORRECTOR_ITERATIONS or res >= residual_tol:
            h *= 0.5
            if h < MIN_STEP:
                reason = STEP_UNDERFLOW
                break
            continue
        if abs(z.imag) > 2 * strip_h:
            reason = LEFT_STRIP
            break
        if abs(complex(df(z))) < derivative_floor(t_next, z, m):
            reason = NEAR_BRANCH
            break

        t, lam = t_next, z
        ts.append(t)
        lams.append(lam)
        dlams.append(zero_velocity(t, lam))
        h = min(max_step, 2 * h)

    if reason:
        logger.warning("trace from (%.6g, %s) truncated at t=%.6g: %s", t0, lam0, t, reason)
    return ZeroTrace(np.array(ts), np.array(lams), np.array(dlams), k_index, reason)


def velocity_bound(trace: ZeroTrace, m: int) -> Optional[float]:
    """max |lambda'| / 3^m over samples with |Im lambda| <= 2 * 3^{-m}; None if there are none."""
    near = np.abs(trace.lam.imag) <= 2 * 3.0 ** (-m)
    if not np.any(near):
        return None
    return float(np.max(np.abs(trace.dlam[near])) / 3.0 ** m)


@dataclass
class GFunctionReport:
    t: np.ndarray = field(repr=False)
    g1: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)
    dg1: np.ndarray = field(repr=False)
    dg2: np.ndarray = field(repr=False)
    floor: float
    fd_error: float
    identity_error: float
    coverage: float
    both_small: int
    u_components: int
    v_components: int

    def summary(self) -> dict:
        return {
            "samples": len(self.t),
            "floor": self.floor,
            "fd_error": self.fd_error,
            "identity_error": self.identity_error,
            "coverage": self.coverage,
            "both_small": self.both_small,
            "u_components": self.u_components,
            "v_components": self.v_components,
        }


def g_functions(trace: ZeroTrace, m: int, c: float = 0.5) -> GFunctionReport:
    """
    g1 = x~, g2 = t x~ with x~ = Re lambda, derivatives from the analytic lambda'.
    U = {|g1'| >= c 3^{-m}}, V = {|g2'| >= c 3^{-m}}.
    """
    if len(trace) < 3:
        raise DomainError("need at least 3 trace samples")
    t = trace.t
    x = trace.x_tilde
    g1, g2 = x, t * x
    dg1 = trace.dlam.real
    dg2 = x + t * dg1

    fd1 = np.gradient(g1, t, edge_order=2)
    fd_error = float(np.max(np.abs(fd1 - dg1)))
    identity_error = float(np.max(np.abs(dg2 - t * dg1 - x)))

    floor = c * 3.0 ** (-m)
    in_u = np.abs(dg1) >= floor
    in_v = np.abs(dg2) >= floor
    return GFunctionReport(
        t=t, g1=g1, g2=g2, dg1=dg1, dg2=dg2,
        floor=floor,
        fd_error=fd_error,
        identity_error=identity_error,
        coverage=float(np.mean(in_u | in_v)),
        both_small=int(np.count_nonzero(~in_u & ~in_v)),
        u_components=len(true_runs(in_u)[0]),
        v_components=len(true_runs(in_v)[0]),
    )


def time_windows(m: int, c: float = 0.5) -> tuple[np.ndarray, float]:
    """Centres t_r = c r 3^{-2m} covering [0, 1] and the common radius c 3^{-2m}."""
    step = c * 3.0 ** (-2 * m)
    return np.arange(0, int(math.floor(1.0 / step)) + 1) * step, step


def window_counts(traces: list[ZeroTrace], m: int, c: float = 0.5) -> np.ndarray:
    """Per window, the number of traces with a sample inside it."""
    centers, radius = time_windows(m, c)
    counts = np.zeros(len(centers), dtype=np.int64)
    for trace in traces:
        lo = np.searchsorted(centers, trace.t.min() - radius, side="left")
        hi = np.searchsorted(centers, trace.t.max() + radius, side="right")
        idx = np.arange(lo, hi)
        if len(idx) == 0:
            continue
        ts = np.sort(trace.t)
        pos = np.searchsorted(ts, centers[idx])
        left = np.abs(centers[idx] - ts[np.clip(pos - 1, 0, len(ts) - 1)])
        right = np.abs(ts[np.clip(pos, 0, len(ts) - 1)] - centers[idx])
        hit = np.minimum(left, right) < radius
        counts[idx[hit]] += 1
    return counts
