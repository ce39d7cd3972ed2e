"""Exact Bayesian best response against opponents with hidden private states."""

from .betaprod import beta_direct, log_beta, log_beta_product, log_beta_product_stirling
from .game import GameSpec, expected_payoff, make_motivating_game
from .posterior import (
    DirichletPrior,
    enumerate_compositions,
    posterior_mean_multi_obs,
    posterior_mean_single_obs,
)
from .respond import best_response, mean_strategy, meta_agent_step
from .uniform import VertexPrior, vertex_mean, vertex_posterior_update

__all__ = [
    "DirichletPrior",
    "GameSpec",
    "VertexPrior",
    "best_response",
    "beta_direct",
    "enumerate_compositions",
    "expected_payoff",
    "log_beta",
    "log_beta_product",
    "log_beta_product_stirling",
    "make_motivating_game",
    "mean_strategy",
    "meta_agent_step",
    "posterior_mean_multi_obs",
    "posterior_mean_single_obs",
    "vertex_mean",
    "vertex_posterior_update",
]
