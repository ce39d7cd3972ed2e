"""Exact posterior-mean opponent strategy under a Dirichlet prior.

Each opponent state ``i`` has an independent ``Dir(alpha[i, :])`` prior over
its action distribution. We see how often each public action was taken
(``theta``) but never the state behind it. The likelihood
``prod_j (sum_i pi_i q_ij) ** theta_j`` expands over *compositions*:
assignments ``rho[i, j]`` with ``sum_i rho[i, j] = theta_j``. Each
composition contributes a product-Dirichlet component with parameters
``alpha + rho`` and weight

    prod_j multinomial(theta_j; rho[:, j]) * prod_ij pi_i ** rho_ij
        * prod_i B(alpha_i + rho_i) / B(alpha_i)

so the posterior mean is the weight-averaged component mean. All weights
are accumulated in log space with a running max shift.

Posteriors are always recomputed from the original prior plus cumulative
counts; a posterior here is not Dirichlet and is never fed back as a prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from . import _accel
from ._kernels import composition_sum_numba, composition_sum_numpy
from .betaprod import beta_direct_rows, log_beta_rows
from .game import check_distribution

DEFAULT_HORIZON = 1000
DEFAULT_MAX_TERMS = 50_000_000
BETA_MODES = ("log", "direct")


class HorizonExceeded(ValueError):
    pass


class TooManyTerms(ValueError):
    pass


@dataclass(frozen=True)
class DirichletPrior:
    """Pseudo-counts ``alpha[i, j]`` for action ``j`` in private state ``i``."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float)
        if alpha.ndim != 2:
            raise ValueError(f"alpha must be 2-D (states x actions), got {alpha.shape}")
        if not np.all(np.isfinite(alpha)) or np.any(alpha <= 0.0):
            raise ValueError("alpha entries must be finite and > 0")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def uniform(cls, n_states: int, n_actions: int, value: float = 2.0) -> "DirichletPrior":
        return cls(np.full((n_states, n_actions), float(value)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.alpha.shape

    def mean(self) -> np.ndarray:
        return self.alpha / self.alpha.sum(axis=1, keepdims=True)


def _as_prior(prior) -> DirichletPrior:
    return prior if isinstance(prior, DirichletPrior) else DirichletPrior(prior)


def as_counts(obs, m: int) -> np.ndarray:
    theta = np.asarray(obs)
    if theta.shape != (m,):
        raise ValueError(f"observation counts must have shape ({m},), got {theta.shape}")
    if np.any(theta < 0) or np.any(theta != np.round(theta)):
        raise ValueError("observation counts must be non-negative integers")
    return theta.astype(np.int64)


def enumerate_compositions(theta_b: int, n: int):
    """Yield every length-``n`` tuple of non-negative ints summing to ``theta_b``.

    Lexicographic order; there are ``C(theta_b + n - 1, n - 1)`` of them.
    """
    if theta_b < 0 or n < 1:
        raise ValueError("need theta_b >= 0 and n >= 1")
    if n == 1:
        yield (theta_b,)
        return
    for first in range(theta_b + 1):
        for rest in enumerate_compositions(theta_b - first, n - 1):
            yield (first, *rest)


def composition_count(theta_b: int, n: int) -> int:
    return math.comb(theta_b + n - 1, n - 1)


@lru_cache(maxsize=256)
def _composition_table(theta_b: int, n: int) -> np.ndarray:
    table = np.array(list(enumerate_compositions(theta_b, n)), dtype=np.int64)
    table.setflags(write=False)
    return table


def _log_pi_weight(rho: np.ndarray, log_pi: np.ndarray) -> np.ndarray:
    # rho * log(pi) with 0 * log(0) = 0
    with np.errstate(invalid="ignore"):
        terms = np.where(rho > 0, rho * log_pi, 0.0)
    return terms.sum(axis=-1)


def _column_tables(alpha, log_pi, theta):
    """Per-column composition tables and the column-local log terms.

    The column term is the log multinomial coefficient, the prior-state
    weight ``sum_i rho_i ln pi_i`` and ``sum_i lnGamma(alpha_ij + rho_ij)``.
    """
    n, m = alpha.shape
    tables, terms = [], []
    for j in range(m):
        comp = _composition_table(int(theta[j]), n)
        coef = gammaln(theta[j] + 1.0) - gammaln(comp + 1.0).sum(axis=1)
        terms.append(
            coef + _log_pi_weight(comp, log_pi) + gammaln(alpha[:, j] + comp).sum(axis=1)
        )
        tables.append(comp)
    offsets = np.zeros(m + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([t.shape[0] for t in tables])
    return np.concatenate(tables), offsets, np.concatenate(terms)


def _logsumexp(x, axis, keepdims=False):
    # scipy's version carries array-API overhead that dominates tiny inputs
    top = x.max(axis=axis, keepdims=True)
    out = top + np.log(np.exp(x - top).sum(axis=axis, keepdims=True))
    return out if keepdims else np.squeeze(out, axis=axis)


def _check_budget(theta, n, horizon, max_terms):
    if horizon is not None and theta.sum() > horizon:
        raise HorizonExceeded(
            f"total observations {int(theta.sum())} exceed horizon cap {horizon}"
        )
    terms = 1
    for t in theta:
        terms *= composition_count(int(t), n)
    if terms > max_terms:
        raise TooManyTerms(f"{terms} composition terms exceed max_terms={max_terms}")
    return terms


def posterior_mean_multi_obs(
    prior,
    pi,
    obs,
    *,
    horizon: int | None = DEFAULT_HORIZON,
    max_terms: int = DEFAULT_MAX_TERMS,
    beta_mode: str = "log",
    use_numba: bool | None = None,
) -> np.ndarray:
    """Exact posterior mean of the opponent strategy given action counts ``obs``.

    ``beta_mode="direct"`` evaluates the same sum with raw gamma values and
    may return non-finite entries; ``"log"`` never does.
    """
    prior = _as_prior(prior)
    alpha = prior.alpha
    n, m = alpha.shape
    pi = check_distribution(pi)
    if pi.size != n:
        raise ValueError(f"pi has {pi.size} entries, prior has {n} states")
    theta = as_counts(obs, m)
    _check_budget(theta, n, horizon, max_terms)
    if beta_mode == "direct":
        return _direct_multi(alpha, pi, theta)
    if beta_mode != "log":
        raise ValueError(f"beta_mode must be one of {BETA_MODES}")
    if not theta.any():
        return prior.mean()
    with np.errstate(divide="ignore"):
        log_pi = np.log(pi)
    comp_flat, offsets, col_terms = _column_tables(alpha, log_pi, theta)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    kernel = composition_sum_numba if use_numba else composition_sum_numpy
    _, z, acc = kernel(np.ascontiguousarray(alpha), comp_flat, offsets, col_terms)
    if not z > 0.0:
        raise ValueError("observations have zero probability under the prior and pi")
    return acc / z


def log_evidence(prior, pi, obs, *, horizon=DEFAULT_HORIZON, max_terms=DEFAULT_MAX_TERMS):
    """``ln P(obs)`` for the ordered observation sequence, marginalising q and states."""
    prior = _as_prior(prior)
    alpha = prior.alpha
    n, m = alpha.shape
    pi = check_distribution(pi)
    theta = as_counts(obs, m)
    _check_budget(theta, n, horizon, max_terms)
    with np.errstate(divide="ignore"):
        log_pi = np.log(pi)
    comp_flat, offsets, col_terms = _column_tables(alpha, log_pi, theta)
    shift, z, _ = composition_sum_numpy(alpha, comp_flat, offsets, col_terms)
    return shift + math.log(z) - float(log_beta_rows(alpha).sum())


def posterior_mean_single_obs(prior, pi, j_star: int, *, beta_mode: str = "log") -> np.ndarray:
    """Posterior mean after one public observation of action ``j_star``.

    Entry ``(r, j)`` is ``tau[r, j] / sum_j' tau[r, j']`` with
    ``tau[r, j] = sum_i pi_i prod_rows B(gamma)`` where ``gamma`` is ``alpha``
    shifted by one at ``(i, j_star)`` (the state that produced the action)
    and by one more at ``(r, j)`` (the cell whose mean is taken).
    """
    prior = _as_prior(prior)
    alpha = prior.alpha
    n, m = alpha.shape
    pi = check_distribution(pi)
    if pi.size != n:
        raise ValueError(f"pi has {pi.size} entries, prior has {n} states")
    if not 0 <= j_star < m:
        raise ValueError(f"j_star={j_star} out of range for {m} actions")
    if beta_mode not in BETA_MODES:
        raise ValueError(f"beta_mode must be one of {BETA_MODES}")

    e_star = np.zeros(m)
    e_star[j_star] = 1.0
    eye = np.eye(m)
    # shifted[i, r, j, :] = row r of alpha after the (i, j*) and (r, j) shifts
    shifted = np.broadcast_to(alpha[None, :, None, :], (n, n, m, m)).copy()
    idx = np.arange(n)
    shifted[idx, idx] += e_star
    shifted += eye[None, None, :, :]
    plain = np.broadcast_to(alpha, (n, m)).copy()
    gen = plain[None, :, :] + (np.eye(n)[:, :, None] * e_star)  # (i, row, m)

    if beta_mode == "log":
        lb_gen = log_beta_rows(gen)  # (i, row)
        lb_target = log_beta_rows(shifted)  # (i, r, j)
        # replace row r of the generating-state product by its target-shifted value
        rest = lb_gen.sum(axis=1)[:, None] - lb_gen  # (i, r)
        with np.errstate(divide="ignore"):
            log_pi = np.log(pi)
        log_terms = log_pi[:, None, None] + rest[:, :, None] + lb_target
        log_tau = _logsumexp(log_terms, axis=0)  # (r, j)
        return np.exp(log_tau - _logsumexp(log_tau, axis=1, keepdims=True))

    b_gen = beta_direct_rows(gen)
    b_target = beta_direct_rows(shifted)
    with np.errstate(all="ignore"):
        rest = np.stack(
            [np.prod(np.delete(b_gen, r, axis=1), axis=1) for r in range(n)], axis=1
        )
        tau = (pi[:, None, None] * rest[:, :, None] * b_target).sum(axis=0)
        return tau / tau.sum(axis=1, keepdims=True)


def _direct_multi(alpha, pi, theta, chunk=1 << 15) -> np.ndarray:
    """Composition sum with raw beta values (overflow-prone on purpose)."""
    n, m = alpha.shape
    tables = [_composition_table(int(t), n) for t in theta]
    counts = [t.shape[0] for t in tables]
    total = int(np.prod(counts))
    eye = np.eye(m)
    tau = np.zeros((n, m))
    with np.errstate(all="ignore"):
        log_pi = np.log(pi)
        log_coef_cols = [
            gammaln(theta[j] + 1.0)
            - gammaln(tables[j] + 1.0).sum(axis=1)
            + _log_pi_weight(tables[j], log_pi)
            for j in range(m)
        ]
        for start in range(0, total, chunk):
            ks = np.unravel_index(np.arange(start, min(start + chunk, total)), counts)
            rho = np.stack([tables[j][ks[j]] for j in range(m)], axis=2)  # (c, n, m)
            coef = np.exp(sum(log_coef_cols[j][ks[j]] for j in range(m)))
            gamma = alpha + rho
            b_rows = beta_direct_rows(gamma)  # (c, n)
            b_shift = beta_direct_rows(gamma[:, :, None, :] + eye)  # (c, n, m)
            for r in range(n):
                others = np.prod(np.delete(b_rows, r, axis=1), axis=1)
                tau[r] += ((coef * others)[:, None] * b_shift[:, r]).sum(axis=0)
        return tau / tau.sum(axis=1, keepdims=True)
