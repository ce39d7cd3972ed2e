"""Beta functions and products of beta functions.

``B(g) = prod_i Gamma(g_i) / Gamma(sum_i g_i)``. The log-gamma route is the
production path. ``beta_direct`` exists to reproduce overflow behaviour of
naive evaluation, and the Stirling route gives an entropy-form bracket
around the exact value for integer arguments.

A *gamma matrix* is ``(n, m)``; each column is one beta argument vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _positive(values, name="argument") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError(f"{name} entries must be finite and > 0")
    return arr


def log_beta(gamma_col) -> float:
    """``sum_i lnGamma(g_i) - lnGamma(sum_i g_i)``."""
    return float(log_beta_rows(_positive(gamma_col, "gamma_col")))


# Stirling-series coefficients B_2k / (2k (2k - 1))
_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156)
_BIG = 10.0


def _lgamma_correction(x):
    """``lnGamma(x) - ((x - 1/2) ln x - x + ln(2 pi)/2)`` for ``x >= 10``."""
    inv = 1.0 / x
    inv2 = inv * inv
    acc = np.zeros_like(x)
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def log_beta2(a, b):
    """Accurate ``ln B(a, b)`` for positive ``a``, ``b`` (broadcasting).

    Large arguments are split into an exact leading part plus Stirling
    corrections so that no two large log-gamma values are subtracted.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    p, q = np.minimum(a, b), np.maximum(a, b)
    s = p + q
    out = np.empty(np.shape(p))
    both = p >= _BIG
    one = (~both) & (q >= _BIG)
    small = ~(both | one)
    if both.any():
        pb, qb, sb = p[both], q[both], s[both]
        corr = _lgamma_correction(pb) + _lgamma_correction(qb) - _lgamma_correction(sb)
        out[both] = (
            -0.5 * np.log(qb) + HALF_LOG_2PI + corr
            + (pb - 0.5) * np.log(pb / sb) + qb * np.log1p(-pb / sb)
        )
    if one.any():
        po, qo, so = p[one], q[one], s[one]
        corr = _lgamma_correction(qo) - _lgamma_correction(so)
        out[one] = (
            special.gammaln(po) + corr + po - po * np.log(so)
            + (qo - 0.5) * np.log1p(-po / so)
        )
    if small.any():
        out[small] = special.betaln(p[small], q[small])
    return out


def log_beta_rows(mat) -> np.ndarray:
    """Log beta along the last axis (no validation).

    Chained as ``B(g_1..g_n) = prod_k B(g_1 + .. + g_(k-1), g_k)``.
    """
    mat = np.asarray(mat, dtype=float)
    partial = np.cumsum(mat, axis=-1)[..., :-1]
    return log_beta2(partial, mat[..., 1:]).sum(axis=-1)


def log_beta_product(gamma) -> float:
    """Sum of ``log_beta`` over the columns of a gamma matrix."""
    g = _positive(gamma, "gamma")
    if g.ndim == 1:
        g = g[:, None]
    return float(log_beta_rows(g.T).sum())


def beta_direct(gamma_col) -> tuple[float, bool]:
    """Evaluate B by multiplying raw gamma values. Returns ``(value, finite)``.

    No protection against overflow: ``Gamma(x)`` is ``inf`` past x ~ 171.6,
    so large arguments give ``0``, ``inf`` or ``nan``.
    """
    g = _positive(gamma_col, "gamma_col")
    with np.errstate(all="ignore"):
        value = float(np.prod(special.gamma(g)) / special.gamma(g.sum()))
    return value, math.isfinite(value)


def beta_direct_rows(mat) -> np.ndarray:
    """Row-wise ``beta_direct`` values (non-finite results passed through)."""
    mat = np.asarray(mat, dtype=float)
    with np.errstate(all="ignore"):
        return special.gamma(mat).prod(axis=-1) / special.gamma(mat.sum(axis=-1))


@dataclass(frozen=True)
class EntropyDecomposition:
    """Per-column pieces of the Stirling form of a beta product.

    ``empirical[:, j]`` is the normalised column, ``entropy[j]`` its Shannon
    entropy in nats, ``totals[j]`` the column sum, and ``d_low``/``d_high``
    the admissible range of the per-column constant.
    """

    empirical: np.ndarray
    entropy: np.ndarray
    totals: np.ndarray
    d_low: float
    d_high: float

    @property
    def n(self) -> int:
        return self.empirical.shape[0]

    def base_terms(self) -> np.ndarray:
        """Per-column value of the Stirling form with the constant left out."""
        n = self.n
        return (
            -self.totals * self.entropy
            - 0.5 * (n - 1) * np.log(self.totals)
            - 0.5 * np.log(self.empirical).sum(axis=0)
        )


def entropy_decomposition(gamma) -> EntropyDecomposition:
    g = _positive(gamma, "gamma")
    if g.ndim == 1:
        g = g[:, None]
    totals = g.sum(axis=0)
    p_hat = g / totals
    entropy = -(p_hat * np.log(p_hat)).sum(axis=0)
    n = g.shape[0]
    return EntropyDecomposition(
        empirical=p_hat,
        entropy=entropy,
        totals=totals,
        d_low=n * HALF_LOG_2PI - 1.0,
        d_high=n - HALF_LOG_2PI,
    )


def log_beta_product_stirling(gamma) -> tuple[float, float, float]:
    """Entropy-form estimate of ``log_beta_product`` with guaranteed bounds.

    Returns ``(approx, lower, upper)``. Each column contributes
    ``-g_j H(P_j) - (n-1)/2 ln g_j - 1/2 sum_i ln P_j(i) + d`` where
    ``lnGamma(z) = z ln z - z - ln(z)/2 + c(z)`` with ``c(z)`` in
    ``[ln(2 pi)/2, 1]`` for integers ``z >= 1``, so
    ``d`` lies in ``[n ln(2 pi)/2 - 1, n - ln(2 pi)/2]``. ``approx`` takes
    the lower end of that range.
    """
    g = np.asarray(gamma, dtype=float)
    if g.size == 0 or np.any(g < 1.0) or np.any(g != np.round(g)):
        raise ValueError("Stirling bounds require integer entries >= 1")
    dec = entropy_decomposition(g)
    base = float(dec.base_terms().sum())
    cols = dec.totals.size
    lower = base + cols * dec.d_low
    upper = base + cols * dec.d_high
    return lower, lower, upper
