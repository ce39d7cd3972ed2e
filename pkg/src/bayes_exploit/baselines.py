"""Sampling-based opponent models: BBR, MAP and Thompson's response.

All three draw a fixed bank of ``K`` opponent strategies from the prior once
per opponent and reweight it by the likelihood of the observed public
actions. Because the bank comes from the prior, the posterior weight of a
sample is proportional to its likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .game import check_distribution


class ImpossibleObservations(ValueError):
    """Every sample in the bank assigns zero probability to the observations."""


def sample_dirichlet(alpha_row, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw from ``Dir(alpha_row)`` by normalising independent Gamma(alpha_i, 1) draws."""
    alpha_row = np.asarray(alpha_row, dtype=float)
    if alpha_row.ndim != 1 or np.any(alpha_row <= 0):
        raise ValueError("alpha_row must be a positive vector")
    shape = alpha_row.shape if size is None else (*np.atleast_1d(size), alpha_row.size)
    y = rng.gamma(alpha_row, 1.0, size=shape)
    total = y.sum(axis=-1, keepdims=True)
    # an all-zero draw has probability zero but can underflow for tiny alpha
    while np.any(total == 0.0):
        bad = (total == 0.0)[..., 0]
        y[bad] = rng.gamma(alpha_row, 1.0, size=(int(bad.sum()), alpha_row.size))
        total = y.sum(axis=-1, keepdims=True)
    return y / total


def sample_strategies(alpha, rng: np.random.Generator, k: int) -> np.ndarray:
    """``k`` opponent strategies from a row-wise Dirichlet prior, shape ``(k, n, m)``."""
    alpha = np.asarray(alpha, dtype=float)
    return np.stack([sample_dirichlet(row, rng, size=k) for row in alpha], axis=1)


@dataclass(frozen=True)
class SampleBank:
    """Opponent strategies drawn once from the prior and reused for a whole match."""

    samples: np.ndarray  # (K, n, m)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 3 or s.shape[0] == 0:
            raise ValueError("samples must have shape (K, n, m) with K >= 1")
        if np.any(np.abs(s.sum(axis=2) - 1.0) > 1e-12):
            raise ValueError("every sample must be row-stochastic")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def k(self) -> int:
        return self.samples.shape[0]

    @classmethod
    def draw(cls, alpha, k: int, rng: np.random.Generator) -> "SampleBank":
        return cls(sample_strategies(alpha, rng, k))


def observation_likelihood(q, pi, obs) -> np.ndarray | float:
    """Log-likelihood ``sum_j theta_j ln(sum_i pi_i q_ij)`` of public action counts.

    ``q`` may be a single ``(n, m)`` strategy or a stack ``(K, n, m)``;
    impossible observations give ``-inf``.
    """
    pi = check_distribution(pi)
    q = np.asarray(q, dtype=float)
    theta = np.asarray(obs, dtype=float)
    marginal = np.einsum("i,...ij->...j", pi, q)
    with np.errstate(divide="ignore"):
        ll = xlogy(theta, marginal).sum(axis=-1)
    return float(ll) if np.ndim(ll) == 0 else ll


def _log_weights(bank: SampleBank, pi, obs) -> np.ndarray:
    ll = observation_likelihood(bank.samples, pi, obs)
    if not np.any(np.isfinite(ll)):
        raise ImpossibleObservations("observations are impossible under every sample")
    shifted = ll - ll.max()
    return shifted - np.log(np.exp(shifted).sum())


def bbr_model(bank: SampleBank, pi, obs) -> np.ndarray:
    """Likelihood-weighted mean of the bank."""
    w = np.exp(_log_weights(bank, pi, obs))
    return np.tensordot(w, bank.samples, axes=1)


def map_model(bank: SampleBank, pi, obs, rng: np.random.Generator) -> np.ndarray:
    """Highest-likelihood sample; ties broken uniformly at random."""
    lw = _log_weights(bank, pi, obs)
    best = np.flatnonzero(lw == lw.max())
    return bank.samples[best[rng.integers(best.size)] if best.size > 1 else best[0]]


def thompson_model(bank: SampleBank, pi, obs, rng: np.random.Generator) -> np.ndarray:
    """One sample drawn with probability proportional to its posterior weight."""
    w = np.exp(_log_weights(bank, pi, obs))
    return bank.samples[rng.choice(bank.k, p=w / w.sum())]
