"""
Panelled Gauss-Legendre quadrature for oscillatory integrands.

Panels start no wider than an eighth of the shortest period present and are halved
wherever the two-panel estimate disagrees with the one-panel estimate.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 16


@dataclass
class QuadratureResult:
    value: float
    panels: int
    error_estimate: float
    converged: bool


def _gauss_panels(func: Callable, lefts: np.ndarray, rights: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = roots_legendre(order)
    mid = 0.5 * (lefts + rights)
    half = 0.5 * (rights - lefts)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    fx = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return (fx @ weights) * half


def integrate_panels(
    func: Callable,
    a: float,
    b: float,
    max_frequency: float,
    order: int = DEFAULT_ORDER,
    rtol: float = 1e-10,
    atol: float = 1e-14,
    max_depth: int = 10,
) -> QuadratureResult:
    """
    Integrate a vectorised real function over [a, b].

    max_frequency is the largest angular frequency of the integrand; the initial panel
    width is (1/8) * 2 pi / max_frequency.
    """
    if b <= a:
        return QuadratureResult(0.0, 0, 0.0, True)
    width = (b - a) if max_frequency <= 0 else min(b - a, 0.25 * math.pi / max_frequency)
    count = max(1, math.ceil((b - a) / width))
    edges = np.linspace(a, b, count + 1)
    lefts, rights = edges[:-1], edges[1:]

    accepted_left, accepted_value = [], []
    total_err = 0.0
    coarse = _gauss_panels(func, lefts, rights, order)
    scale = abs(float(coarse.sum()))
    converged = True

    for depth in range(max_depth + 1):
        mids = 0.5 * (lefts + rights)
        fine = _gauss_panels(func, lefts, mids, order) + _gauss_panels(func, mids, rights, order)
        err = np.abs(fine - coarse)
        tol = max(atol, rtol * scale) * (rights - lefts) / (b - a)
        ok = err <= tol
        if depth == max_depth:
            ok[:] = True
            converged = bool(np.all(err <= tol))
        accepted_left.append(lefts[ok])
        accepted_value.append(fine[ok])
        total_err += float(err[ok].sum())
        if np.all(ok):
            break
        # split the rejected panels; their halves' estimates become the next coarse values
        bad = ~ok
        new_lefts = np.concatenate((lefts[bad], mids[bad]))
        new_rights = np.concatenate((mids[bad], rights[bad]))
        order_idx = np.argsort(new_lefts, kind="stable")
        lefts, rights = new_lefts[order_idx], new_rights[order_idx]
        coarse = _gauss_panels(func, lefts, rights, order)

    all_left = np.concatenate(accepted_left)
    all_value = np.concatenate(accepted_value)
    value = float(np.sum(all_value[np.argsort(all_left, kind="stable")]))
    if not converged:
        logger.warning("panel quadrature on [%g, %g] hit depth %d (error %.2e)", a, b, max_depth, total_err)
    return QuadratureResult(value, len(all_left), total_err, converged)
