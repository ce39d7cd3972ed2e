"""Brute-force posterior means by midpoint-rule integration.

Only for two-action games with at most three hidden states: each state's
strategy is a single probability ``x_i = q[i, 0]`` and the posterior is
integrated over the ``n``-cube. Independent of the composition sums in
``posterior`` and used to check them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .game import check_distribution

MAX_STATES = 3


@dataclass(frozen=True)
class GridSpec:
    points: int = 2000

    def __post_init__(self):
        if self.points < 100:
            raise ValueError("grid needs at least 100 points per dimension")

    def nodes(self) -> np.ndarray:
        return (np.arange(self.points) + 0.5) / self.points


def oracle_posterior_mean(alpha, pi, obs, grid: GridSpec | None = None) -> np.ndarray:
    """Posterior mean of ``q`` by integrating the unnormalised posterior on a grid.

    Density: ``prod_i x_i^(a_i0 - 1) (1 - x_i)^(a_i1 - 1)`` times
    ``p^theta_0 (1 - p)^theta_1`` with ``p = sum_i pi_i x_i``.
    """
    grid = grid or GridSpec()
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 2 or alpha.shape[1] != 2:
        raise ValueError("oracle supports two opponent actions only")
    n = alpha.shape[0]
    if n > MAX_STATES:
        raise ValueError(f"oracle supports at most {MAX_STATES} states (cost is grid**n)")
    if np.any(alpha <= 0):
        raise ValueError("alpha entries must be > 0")
    pi = check_distribution(pi)
    theta = np.asarray(obs, dtype=float)
    if theta.shape != (2,):
        raise ValueError("obs must have two counts")

    x = grid.nodes()
    log_x, log_1mx = np.log(x), np.log1p(-x)
    axis_terms = [(alpha[i, 0] - 1) * log_x + (alpha[i, 1] - 1) * log_1mx for i in range(n)]

    shift = -math.inf
    z = 0.0
    first = np.zeros(n)
    for pts, logd in _slabs(x, axis_terms, n):
        p = pi @ pts
        with np.errstate(divide="ignore"):
            logd = logd + _xlogy(theta[0], p) + _xlogy(theta[1], 1.0 - p)
        top = logd.max()
        if top == -math.inf:
            continue
        if top > shift:
            scale = math.exp(shift - top)
            z *= scale
            first *= scale
            shift = top
        w = np.exp(logd - shift)
        z += w.sum()
        first += pts @ w
    mean_first = first / z
    return np.column_stack([mean_first, 1.0 - mean_first])


def _slabs(x, axis_terms, n):
    if n == 1:
        yield x[None, :], axis_terms[0]
        return
    mesh = np.meshgrid(*([x] * (n - 1)), indexing="ij")
    rest_pts = np.vstack([g.ravel() for g in mesh])
    rest_logd = sum(g.ravel() for g in np.meshgrid(*axis_terms[1:], indexing="ij"))
    head = np.empty((1, rest_pts.shape[1]))
    for x0, a0 in zip(x, axis_terms[0]):
        head.fill(x0)
        yield np.vstack([head, rest_pts]), a0 + rest_logd


def _xlogy(c, v):
    if c == 0:
        return np.zeros_like(v)
    return c * np.log(v)
