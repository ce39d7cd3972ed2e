import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayes_exploit.game import (
    CALL,
    FOLD,
    GameSpec,
    expected_payoff,
    make_motivating_game,
    motivating_nash_opponent,
    motivating_nash_response,
    pure_responses,
)
from bayes_exploit.posterior import posterior_mean_multi_obs
from bayes_exploit.respond import (
    StrategyDistribution,
    best_response,
    fixed_responder,
    mean_strategy,
    meta_agent_step,
    motivating_nash_responder,
)

ALWAYS_CALL = np.array([[1.0, 0.0], [1.0, 0.0]])


class TestBestResponse:
    def test_uniform_model_always_call(self):
        ours, value = best_response(make_motivating_game(), np.full((2, 2), 0.5))
        np.testing.assert_array_equal(ours, ALWAYS_CALL)
        assert value == 0.0

    def test_nash_model(self):
        _, value = best_response(make_motivating_game(), motivating_nash_opponent())
        assert value == pytest.approx(-0.75, abs=1e-12)

    def test_deterministic_model(self):
        model = np.array([[1.0, 0.0], [0.0, 1.0]])  # b with K, s with J
        ours, value = best_response(make_motivating_game(), model)
        assert ours[0, FOLD] == 1.0 and ours[1, CALL] == 1.0
        assert value == pytest.approx(0.5)

    def test_tie_goes_to_lowest_index(self):
        g = GameSpec(pi=np.array([1.0]), payoff=np.zeros((1, 2, 3)))
        ours, _ = best_response(g, np.array([[0.5, 0.5]]))
        np.testing.assert_array_equal(ours, [[1, 0, 0], [1, 0, 0]])

    def test_shape_error(self):
        with pytest.raises(ValueError):
            best_response(make_motivating_game(), np.full((3, 2), 0.5))

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 3), m=st.integers(1, 3), k=st.integers(1, 3))
    def test_dominates_every_pure_response(self, seed, n, m, k):
        rng = np.random.default_rng(seed)
        g = GameSpec(pi=rng.dirichlet(np.ones(n)), payoff=rng.uniform(-3, 3, size=(n, m, k)))
        model = rng.dirichlet(np.ones(m), size=n)
        _, value = best_response(g, model)
        for pure in pure_responses(g):
            assert value >= expected_payoff(g, pure, model) - 1e-12


class TestMeanStrategy:
    def test_single_point(self):
        q = np.array([[0.2, 0.8], [0.6, 0.4]])
        np.testing.assert_array_equal(mean_strategy(StrategyDistribution((q,), [1.0])), q)

    def test_two_deterministic(self):
        b, s = np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([[0.0, 1.0], [0.0, 1.0]])
        np.testing.assert_allclose(mean_strategy(StrategyDistribution((b, s), [0.5, 0.5])), 0.5)

    def test_weighted(self):
        d = StrategyDistribution((np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])), [0.3, 0.7])
        np.testing.assert_allclose(mean_strategy(d), [[0.3, 0.7]])

    @pytest.mark.parametrize(
        "support,weights",
        [((), []), ((np.eye(2),), [0.5]), ((np.eye(2), np.eye(2)), [0.7, 0.7]), ((np.eye(2), np.eye(3)), [0.5, 0.5])],
    )
    def test_invalid(self, support, weights):
        with pytest.raises(ValueError):
            StrategyDistribution(support, weights)


class TestMeanEquivalence:
    def test_discrete(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n, m, k = rng.integers(1, 4, size=3)
            g = GameSpec(pi=rng.dirichlet(np.ones(n)), payoff=rng.uniform(-10, 10, size=(n, m, k)))
            size = int(rng.integers(1, 8))
            d = StrategyDistribution(
                tuple(rng.dirichlet(np.ones(m), size=n) for _ in range(size)), rng.dirichlet(np.ones(size))
            )
            ours = rng.dirichlet(np.ones(k), size=m)
            full = sum(w * expected_payoff(g, ours, q) for w, q in zip(d.weights, d.support))
            assert expected_payoff(g, ours, mean_strategy(d)) == pytest.approx(full, abs=1e-10)

    def test_monte_carlo_dirichlet(self):
        rng = np.random.default_rng(1)
        g = make_motivating_game()
        alpha = np.array([[2.0, 5.0], [3.0, 1.0]])
        q = np.stack([rng.dirichlet(row, size=100_000) for row in alpha], axis=1)
        ours = motivating_nash_response()
        vals = np.einsum("i,kij,jl,ijl->k", g.pi, q, ours, g.payoff)
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        target = expected_payoff(g, ours, alpha / alpha.sum(axis=1, keepdims=True))
        assert abs(vals.mean() - target) < 3 * se


class TestMetaAgent:
    def test_no_observations_calls(self):
        ours = meta_agent_step(make_motivating_game(), np.full((2, 2), 2.0), [0, 0])
        np.testing.assert_array_equal(ours, ALWAYS_CALL)

    def test_sees_posterior_mean(self):
        seen = {}

        def spy(g, model):
            seen["model"] = model
            return ALWAYS_CALL

        meta_agent_step(make_motivating_game(), np.array([[10.0, 3.0], [4.0, 9.0]]), [1, 0], responder=spy)
        assert seen["model"][1, 0] == pytest.approx(0.3218210361, abs=1e-9)

    def test_single_state_is_fictitious_play(self):
        # one state: the posterior mean is the normalized counter vector
        rng = np.random.default_rng(2)
        g = GameSpec(pi=np.array([1.0]), payoff=rng.uniform(-1, 1, size=(1, 3, 2)))
        alpha = np.array([[1.0, 2.0, 1.0]])
        counts = np.zeros(3, dtype=int)
        for _ in range(30):
            ours = meta_agent_step(g, alpha, counts)
            counters = (alpha[0] + counts) / (alpha[0] + counts).sum()
            np.testing.assert_array_equal(ours, best_response(g, counters[None, :])[0])
            counts[rng.integers(3)] += 1

    def test_nash_responder_is_static(self):
        g = make_motivating_game()
        responder = motivating_nash_responder()
        for obs in ([0, 0], [3, 1], [0, 7]):
            np.testing.assert_array_equal(meta_agent_step(g, np.full((2, 2), 2.0), obs, responder), motivating_nash_response())

    def test_fixed_responder_validates(self):
        with pytest.raises(ValueError):
            fixed_responder(np.array([[0.5, 0.6]]))

    def test_posterior_kwargs_forwarded(self):
        g = make_motivating_game()
        a = meta_agent_step(g, np.full((2, 2), 2.0), [3, 2], use_numba=False)
        b = best_response(g, posterior_mean_multi_obs(np.full((2, 2), 2.0), g.pi, [3, 2]))[0]
        np.testing.assert_array_equal(a, b)


def test_response_enumeration_matches_exhaustive():
    g = make_motivating_game()
    model = np.array([[0.7, 0.3], [0.2, 0.8]])
    best = max(expected_payoff(g, p, model) for p in pure_responses(g))
    assert best_response(g, model)[1] == pytest.approx(best)
    assert len(list(itertools.islice(pure_responses(g), 10))) == 4
