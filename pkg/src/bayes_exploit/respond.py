"""Response functions and the posterior-mean meta-agent.

Expected payoff is linear in the opponent strategy, so the payoff against a
distribution over opponent strategies equals the payoff against its mean.
A responder therefore only ever needs one opponent strategy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .game import GameSpec, check_stochastic, expected_payoff, motivating_nash_response
from .posterior import posterior_mean_multi_obs

# (game, opponent model) -> our strategy
Responder = Callable[[GameSpec, np.ndarray], np.ndarray]


def best_response(g: GameSpec, model) -> tuple[np.ndarray, float]:
    """Pure best response to ``model``; returns ``(strategy, value)``.

    For each observed action ``j`` the candidate actions are scored by
    ``sum_i pi_i q_ij u_ijk`` (the unnormalised state posterior). Ties and
    zero-probability observations go to the lowest action index.
    """
    model = np.asarray(model, dtype=float)
    n, m, k = g.payoff.shape
    if model.shape != (n, m):
        raise ValueError(f"model shape {model.shape} != {(n, m)}")
    scores = np.einsum("i,ij,ijk->jk", g.pi, model, g.payoff)
    ours = np.zeros((m, k))
    ours[np.arange(m), np.argmax(scores, axis=1)] = 1.0
    return ours, expected_payoff(g, ours, model)


def best_responder(g: GameSpec, model) -> np.ndarray:
    return best_response(g, model)[0]


def fixed_responder(strategy) -> Responder:
    """A responder that ignores the model and always plays ``strategy``."""
    strategy = check_stochastic(strategy, "our strategy")

    def respond(g, model):
        return strategy

    return respond


def motivating_nash_responder() -> Responder:
    return fixed_responder(motivating_nash_response())


@dataclass(frozen=True)
class StrategyDistribution:
    """Finite-support distribution over opponent strategies."""

    support: tuple[np.ndarray, ...]
    weights: np.ndarray

    def __post_init__(self):
        if len(self.support) == 0:
            raise ValueError("strategy distribution needs at least one support point")
        support = tuple(check_stochastic(s, "support point") for s in self.support)
        weights = np.asarray(self.weights, dtype=float)
        if weights.shape != (len(support),) or np.any(weights < 0):
            raise ValueError("need one non-negative weight per support point")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if len({s.shape for s in support}) != 1:
            raise ValueError("support points must share a shape")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)


def mean_strategy(d: StrategyDistribution) -> np.ndarray:
    if not d.support:
        raise ValueError("empty support")
    return np.tensordot(d.weights, np.stack(d.support), axes=1)


def meta_agent_step(g: GameSpec, prior, cumulative_obs, responder: Responder = best_responder,
                    **posterior_kwargs) -> np.ndarray:
    """Respond to the posterior mean given the original prior and all counts so far."""
    model = posterior_mean_multi_obs(prior, g.pi, cumulative_obs, **posterior_kwargs)
    return responder(g, model)
