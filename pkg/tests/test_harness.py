import csv
import io
import json
import math

import numpy as np
import pytest

from bayes_exploit import cli
from bayes_exploit.game import expected_payoff, make_motivating_game, motivating_nash_response
from bayes_exploit.harness import (
    CSV_HEADER,
    RNG_NAME,
    TIMING_HEADER,
    EBBRAgent,
    ExperimentConfig,
    FixedAgent,
    MatchResult,
    play_opponent,
    run_match,
    run_table3,
    run_timing,
    summarize,
    table4_config,
    timing_trial,
)
from bayes_exploit.respond import best_response


def _rows(text):
    lines = text.splitlines()
    assert lines[0] == f"# rng: {RNG_NAME}"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def _small(**kw):
    params = dict(opponents=40, rounds=[0, 5], samples_k=50, seed=3)
    params.update(kw)
    return ExperimentConfig(**params)


class TestRunMatch:
    def test_nash_invariant_to_rounds(self):
        g = make_motivating_game()
        rng = np.random.default_rng(0)
        opp = np.array([[0.3, 0.7], [0.8, 0.2]])
        target = expected_payoff(g, motivating_nash_response(), opp)
        for rounds in (0, 1, 10, 25):
            res = run_match(g, FixedAgent("Nash", motivating_nash_response()), opp, rounds, rng)
            assert res.mean_payoff == target

    def test_full_br(self):
        g = make_motivating_game()
        opp = np.array([[0.9, 0.1], [0.2, 0.8]])
        ours, value = best_response(g, opp)
        res = run_match(g, FixedAgent("FullBR", ours), opp, 10, np.random.default_rng(0))
        assert res.mean_payoff == pytest.approx(value)

    def test_zero_rounds_scores_initial_strategy(self):
        g = make_motivating_game()
        opp = np.array([[0.9, 0.1], [0.2, 0.8]])
        res = run_match(g, EBBRAgent(g, np.full((2, 2), 2.0)), opp, 0, np.random.default_rng(0))
        assert res.mean_payoff == pytest.approx(expected_payoff(g, np.array([[1.0, 0], [1, 0]]), opp))

    def test_agent_only_sees_actions(self):
        g = make_motivating_game()
        seen = []

        class Spy(FixedAgent):
            def respond(self, counts):
                seen.append(counts.copy())
                return super().respond(counts)

        run_match(g, Spy("spy", motivating_nash_response()), np.full((2, 2), 0.5), 6, np.random.default_rng(1))
        assert [int(c.sum()) for c in seen] == list(range(6))
        assert all(c.shape == (2,) for c in seen)

    def test_direct_mode_flags_non_finite(self):
        g = make_motivating_game()
        agent = EBBRAgent(g, np.full((2, 2), 2.0), beta_mode="direct")
        res = run_match(g, agent, np.array([[1.0, 0.0], [1.0, 0.0]]), 400, np.random.default_rng(0))
        assert res.nonfinite and math.isnan(res.mean_payoff)


class TestPlayOpponent:
    def test_ebbr_independent_of_bank_size(self):
        a = play_opponent(_small(samples_k=10), 5, 7)[1]
        b = play_opponent(_small(samples_k=1000), 5, 7)[1]
        ebbr = [r for r in a if r.agent == "EBBR"][0], [r for r in b if r.agent == "EBBR"][0]
        assert ebbr[0] == ebbr[1]

    def test_opponent_streams_independent_of_order(self):
        cfg = _small()
        first = play_opponent(cfg, 5, 3)
        play_opponent(cfg, 5, 1)
        again = play_opponent(cfg, 5, 3)
        np.testing.assert_array_equal(first[0], again[0])
        assert first[1] == again[1]


class TestTables:
    def test_schema_and_determinism(self, tmp_path):
        out = tmp_path / "t3.csv"
        text = run_table3(_small(out=str(out)))
        assert out.read_text() == text
        rows = _rows(text)
        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) == 12
        assert run_table3(_small()) == text

    def test_byte_identical_across_workers(self):
        assert run_table3(_small(workers=1)) == run_table3(_small(workers=3))

    def test_nash_reference(self):
        rows = {(r["agent"], r["rounds"]): r for r in _rows(run_table3(_small(opponents=200, rounds=[0])))}
        assert float(rows["Nash", "0"]["mean_payoff"]) == pytest.approx(-0.375, abs=1e-6)
        assert float(rows["EBBR", "0"]["mean_payoff"]) == pytest.approx(0.0, abs=1e-6)
        assert float(rows["FullBR", "0"]["mean_payoff"]) > 0.3

    def test_plain_estimator(self):
        rows = _rows(run_table3(_small(opponents=300, rounds=[0], control_variate=False)))
        nash = [r for r in rows if r["agent"] == "Nash"][0]
        assert float(nash["mean_payoff"]) == pytest.approx(-0.375, abs=0.05)

    def test_six_significant_digits(self):
        for r in _rows(run_table3(_small(rounds=[5]))):
            mantissa = r["mean_payoff"].lstrip("-").split("e")[0]
            assert len(mantissa.replace(".", "").lstrip("0")) <= 6

    def test_table4_defaults(self):
        cfg = table4_config()
        assert cfg.samples_k == 10 and cfg.rounds == [0, 10, 25, 100]


class TestSummarize:
    def test_excludes_flagged(self):
        res = [MatchResult("a", 0, 1.0, 1), MatchResult("a", 1, math.nan, 1, True), MatchResult("a", 2, 3.0, 1)]
        s = summarize(res)
        assert s["mean_payoff"] == 2.0 and s["nonfinite_rate"] == pytest.approx(1 / 3)

    def test_control_variate_exact_for_linear(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(500, 2))
        vals = 1.5 + x @ np.array([2.0, -1.0])
        res = [MatchResult("a", i, float(v), 0) for i, v in enumerate(vals)]
        s = summarize(res, x, np.zeros(2))
        assert s["mean_payoff"] == pytest.approx(1.5, abs=1e-12)
        assert s["ci95"] < 1e-10


class TestConfig:
    def test_json_round_trip(self, tmp_path):
        cfg = _small(agents=["EBBR", "Nash"], beta_mode="direct")
        path = tmp_path / "c.json"
        path.write_text(cfg.to_json())
        assert ExperimentConfig.from_json(path) == cfg
        assert ExperimentConfig.from_json(cfg.to_json()) == cfg

    @pytest.mark.parametrize(
        "kw", [{"rounds": [-1]}, {"opponents": 0}, {"agents": ["Oracle"]}, {"beta_mode": "fast"}, {"game": "kuhn"}]
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)

    def test_unknown_field(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_json('{"colour": 1}')


class TestTiming:
    def test_trial(self):
        secs, finite = timing_trial(1, 20, "log", np.random.default_rng(0))
        assert secs >= 0 and finite

    def test_csv(self):
        rows = _rows(run_timing(1, sizes=[10], trials=5))
        assert tuple(rows[0]) == TIMING_HEADER
        assert [r["beta_mode"] for r in rows] == ["log", "direct"]

    def test_bad_table(self):
        with pytest.raises(ValueError):
            run_timing(3)


class TestCli:
    def test_posterior(self, capsys):
        assert cli.main(["posterior", "--alpha", "10,3,4,9", "--obs", "1,0"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["posterior_mean"][1][0] == pytest.approx(0.3218210361, abs=1e-9)

    def test_table3(self, tmp_path, capsys):
        out = tmp_path / "t3.csv"
        cli.main(["table3", "--opponents", "20", "--rounds", "0", "--samples-k", "20", "--seed", "5",
                  "--out", str(out)])
        rows = _rows(out.read_text())
        assert {r["seed"] for r in rows} == {"5"} and len(rows) == 6
        assert capsys.readouterr().out == ""

    def test_table4_stdout(self, capsys):
        cli.main(["table4", "--opponents", "10", "--rounds", "0", "--agents", "BBR,EBBR"])
        rows = _rows(capsys.readouterr().out)
        assert [r["agent"] for r in rows] == ["BBR", "EBBR"]

    def test_config_file(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text(_small(opponents=10, rounds=[0], agents=["Nash"]).to_json())
        cli.main(["table3", "--config", str(path), "--seed", "9"])
        rows = _rows(capsys.readouterr().out)
        assert rows[0]["seed"] == "9" and rows[0]["opponents"] == "10"

    @pytest.mark.parametrize("cmd", ["table1", "table2"])
    def test_timing(self, cmd, capsys):
        cli.main([cmd, "--sizes", "10", "--trials", "3", "--beta-mode", "log"])
        rows = _rows(capsys.readouterr().out)
        assert len(rows) == 1 and rows[0]["table"] == cmd[-1]

    def test_match(self, capsys):
        cli.main(["match", "--opponent", "2", "--rounds", "5", "--samples-k", "30"])
        data = json.loads(capsys.readouterr().out)
        assert data["opponent"] == 2 and len(data["results"]) == 6

    def test_module_entry(self):
        import subprocess
        import sys

        out = subprocess.run([sys.executable, "-m", "bayes_exploit", "posterior", "--alpha", "2,2",
                              "--states", "1", "--obs", "3,0"], capture_output=True, text=True, check=True)
        assert json.loads(out.stdout)["posterior_mean"][0][0] == pytest.approx(5 / 7)
