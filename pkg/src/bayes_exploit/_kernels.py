"""Composition-sum kernels for the exact posterior mean.

The posterior given censored counts is a mixture of product-Dirichlets, one
component per assignment ``rho`` of the per-action counts to hidden states.
Each column ``j`` contributes a table of compositions of ``theta_j`` and a
per-composition log term that does not couple columns; only
``lnGamma(A_i + R_i)`` (row totals) couples them. Both kernels walk the
cartesian product of column tables in the same fixed order and keep a
running max-shifted sum, so memory stays constant in the number of terms.

Outputs are ``(shift, z, acc)`` with the posterior mean ``acc / z`` and
``log Z = shift + log z``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from ._accel import njit


@njit(cache=True)
def composition_sum_numba(alpha, comp_flat, offsets, col_terms):
    n, m = alpha.shape
    row_tot = np.zeros(n)
    for i in range(n):
        for j in range(m):
            row_tot[i] += alpha[i, j]
    counts = np.empty(m, dtype=np.int64)
    for j in range(m):
        counts[j] = offsets[j + 1] - offsets[j]
    idx = np.zeros(m, dtype=np.int64)
    shift = -np.inf
    z = 0.0
    acc = np.zeros((n, m))
    rsum = np.empty(n)
    while True:
        lw = 0.0
        for i in range(n):
            rsum[i] = row_tot[i]
        for j in range(m):
            r = offsets[j] + idx[j]
            lw += col_terms[r]
            for i in range(n):
                rsum[i] += comp_flat[r, i]
        for i in range(n):
            lw -= math.lgamma(rsum[i])
        if lw > -np.inf:
            if lw > shift:
                scale = math.exp(shift - lw)
                z *= scale
                for i in range(n):
                    for j in range(m):
                        acc[i, j] *= scale
                shift = lw
            w = math.exp(lw - shift)
            z += w
            for j in range(m):
                r = offsets[j] + idx[j]
                for i in range(n):
                    acc[i, j] += w * (alpha[i, j] + comp_flat[r, i]) / rsum[i]
        # odometer, last column fastest
        pos = m - 1
        while pos >= 0:
            idx[pos] += 1
            if idx[pos] < counts[pos]:
                break
            idx[pos] = 0
            pos -= 1
        if pos < 0:
            break
    return shift, z, acc


def composition_sum_numpy(alpha, comp_flat, offsets, col_terms, chunk=1 << 16):
    alpha = np.asarray(alpha, dtype=float)
    n, m = alpha.shape
    counts = np.diff(offsets)
    total = int(np.prod(counts))
    row_tot = alpha.sum(axis=1)
    shift = -np.inf
    z = 0.0
    acc = np.zeros((n, m))
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        rows = np.stack(np.unravel_index(flat, counts), axis=1) + offsets[:-1]
        rho = comp_flat[rows]  # (chunk, m, n)
        lw = col_terms[rows].sum(axis=1)
        rsum = row_tot + rho.sum(axis=1)  # (chunk, n)
        lw = lw - gammaln(rsum).sum(axis=1)
        live = lw > -np.inf
        if not live.any():
            continue
        top = lw[live].max()
        if top > shift:
            scale = math.exp(shift - top)
            z *= scale
            acc *= scale
            shift = top
        w = np.where(live, np.exp(lw - shift), 0.0)
        z += w.sum()
        means = (alpha.T[None, :, :] + rho) / rsum[:, None, :]  # (chunk, m, n)
        acc += np.einsum("c,cji->ij", w, means)
    return shift, z, acc

