"""Match simulation and experiment tables.

Every simulated opponent owns RNG substreams derived from
``SeedSequence([seed, opponent_index])``, so results do not depend on the
order or the process in which matches run. Within one opponent all agents
face the same true strategy and the same sequence of public actions, which
makes agent comparisons paired.

Per-hand payoff is scored analytically: the expected payoff of the agent's
current strategy against the opponent's true strategy.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from .baselines import SampleBank, bbr_model, map_model, sample_strategies, thompson_model
from .game import GameSpec, expected_payoff, make_motivating_game, motivating_nash_response
from .posterior import posterior_mean_multi_obs, posterior_mean_single_obs
from .respond import best_response

log = logging.getLogger(__name__)

AGENTS = ("EBBR", "BBR", "MAP", "Thompson", "FullBR", "Nash")
SAMPLING_AGENTS = ("BBR", "MAP", "Thompson")
DEFAULT_OPPONENTS = {0: 10_000}
DEFAULT_OPPONENTS_LATER = 1_000
RNG_NAME = "numpy PCG64 via SeedSequence([seed, opponent])"
CSV_HEADER = ("agent", "rounds", "opponents", "mean_payoff", "ci95", "nonfinite_rate", "seed")
TIMING_HEADER = ("table", "n", "beta_mode", "trials", "mean_ms", "nonfinite_rate", "seed")

GAMES = {"motivating": make_motivating_game}


@dataclass
class ExperimentConfig:
    game: str = "motivating"
    alpha: list = field(default_factory=lambda: [[2.0, 2.0], [2.0, 2.0]])
    agents: list = field(default_factory=lambda: list(AGENTS))
    rounds: list = field(default_factory=lambda: [0, 10, 25])
    opponents: int | None = None
    samples_k: int = 1000
    seed: int = 0
    beta_mode: str = "log"
    out: str | None = None
    workers: int = 1
    control_variate: bool = True

    def __post_init__(self):
        if any(r < 0 for r in self.rounds):
            raise ValueError("rounds must be >= 0")
        if self.opponents is not None and self.opponents < 1:
            raise ValueError("opponents must be >= 1")
        unknown = set(self.agents) - set(AGENTS)
        if unknown:
            raise ValueError(f"unknown agents {sorted(unknown)}; choose from {AGENTS}")
        if self.beta_mode not in ("log", "direct"):
            raise ValueError("beta_mode must be 'log' or 'direct'")
        if self.game not in GAMES:
            raise ValueError(f"unknown game {self.game!r}")

    def opponents_for(self, rounds: int) -> int:
        if self.opponents is not None:
            return self.opponents
        return DEFAULT_OPPONENTS.get(rounds, DEFAULT_OPPONENTS_LATER)

    def make_game(self) -> GameSpec:
        return GAMES[self.game]()

    @classmethod
    def from_json(cls, source) -> "ExperimentConfig":
        if isinstance(source, Path) or not str(source).lstrip().startswith("{"):
            source = Path(source).read_text()
        data = json.loads(source)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class MatchResult:
    agent: str
    opponent: int
    mean_payoff: float
    rounds: int
    nonfinite: bool = False


# ---------------------------------------------------------------- agents


@lru_cache(maxsize=65536)
def _ebbr_strategy(game: str, alpha: tuple, counts: tuple, beta_mode: str):
    g = GAMES[game]()
    if beta_mode == "direct" and sum(counts) == 1:
        model = posterior_mean_single_obs(np.array(alpha), g.pi, counts.index(1), beta_mode="direct")
    else:
        model = posterior_mean_multi_obs(
            np.array(alpha), g.pi, np.array(counts), beta_mode=beta_mode, horizon=None
        )
    if not np.all(np.isfinite(model)):
        return None
    return best_response(g, model)[0]


class Agent:
    name = "agent"

    def respond(self, counts: np.ndarray) -> np.ndarray | None:
        """Our strategy given cumulative public counts; ``None`` if the model is non-finite."""
        raise NotImplementedError


class EBBRAgent(Agent):
    name = "EBBR"

    def __init__(self, g: GameSpec, alpha, beta_mode="log", game_id="motivating"):
        self.key = (game_id, tuple(map(tuple, np.asarray(alpha, dtype=float))), beta_mode)

    def respond(self, counts):
        game, alpha, mode = self.key
        return _ebbr_strategy(game, alpha, tuple(int(c) for c in counts), mode)


class BankAgent(Agent):
    def __init__(self, name, g: GameSpec, bank: SampleBank, rng: np.random.Generator):
        self.name = name
        self.g = g
        self.bank = bank
        self.rng = rng

    def respond(self, counts):
        if self.name == "BBR":
            model = bbr_model(self.bank, self.g.pi, counts)
        elif self.name == "MAP":
            model = map_model(self.bank, self.g.pi, counts, self.rng)
        else:
            model = thompson_model(self.bank, self.g.pi, counts, self.rng)
        return best_response(self.g, model)[0]


class FixedAgent(Agent):
    def __init__(self, name, strategy):
        self.name = name
        self.strategy = strategy

    def respond(self, counts):
        return self.strategy


def run_match(g: GameSpec, agent: Agent, true_opp, rounds: int, rng: np.random.Generator,
              opponent: int = 0) -> MatchResult:
    """Play ``rounds`` hands; the agent sees only the opponent's public actions.

    ``rounds == 0`` scores the initial strategy alone.
    """
    true_opp = np.asarray(true_opp, dtype=float)
    counts = np.zeros(g.n_opp_actions, dtype=np.int64)
    payoffs = []
    for _ in range(max(rounds, 1)):
        ours = agent.respond(counts)
        if ours is None:
            return MatchResult(agent.name, opponent, math.nan, rounds, nonfinite=True)
        payoffs.append(expected_payoff(g, ours, true_opp))
        if rounds:
            state = rng.choice(g.n_states, p=g.pi)
            counts[rng.choice(g.n_opp_actions, p=true_opp[state])] += 1
    return MatchResult(agent.name, opponent, math.fsum(payoffs) / len(payoffs), rounds)


def _streams(seed: int, opponent: int):
    opp_ss, hands_ss, bank_ss, choice_ss = np.random.SeedSequence([seed, opponent]).spawn(4)
    return opp_ss, hands_ss, bank_ss, choice_ss


def play_opponent(cfg: ExperimentConfig, rounds: int, opponent: int):
    """All configured agents against one sampled opponent.

    Returns ``(true_strategy, results)``.
    """
    g = cfg.make_game()
    alpha = np.asarray(cfg.alpha, dtype=float)
    opp_ss, hands_ss, bank_ss, choice_ss = _streams(cfg.seed, opponent)
    true_opp = sample_strategies(alpha, np.random.default_rng(opp_ss), 1)[0]
    bank = None
    if any(a in SAMPLING_AGENTS for a in cfg.agents):
        bank = SampleBank.draw(alpha, cfg.samples_k, np.random.default_rng(bank_ss))
    results = []
    for name in cfg.agents:
        if name == "EBBR":
            agent = EBBRAgent(g, alpha, cfg.beta_mode, cfg.game)
        elif name in SAMPLING_AGENTS:
            agent = BankAgent(name, g, bank, np.random.default_rng(choice_ss))
        elif name == "FullBR":
            agent = FixedAgent(name, best_response(g, true_opp)[0])
        else:
            agent = FixedAgent(name, motivating_nash_response())
        results.append(
            run_match(g, agent, true_opp, rounds, np.random.default_rng(hands_ss), opponent)
        )
    return true_opp, results


def _play_range(args):
    cfg, rounds, start, stop = args
    return [play_opponent(cfg, rounds, o) for o in range(start, stop)]


@dataclass
class Simulation:
    rounds: int
    results: dict[str, list[MatchResult]]
    opponents: np.ndarray  # (N, n, m) true strategies, by opponent index


def simulate(cfg: ExperimentConfig, rounds: int) -> Simulation:
    """Per-agent match results, ordered by opponent index."""
    total = cfg.opponents_for(rounds)
    if cfg.workers > 1:
        step = math.ceil(total / (cfg.workers * 4))
        jobs = [(cfg, rounds, s, min(s + step, total)) for s in range(0, total, step)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            per_opp = [r for chunk in pool.map(_play_range, jobs) for r in chunk]
    else:
        per_opp = _play_range((cfg, rounds, 0, total))
    out = {name: [] for name in cfg.agents}
    for _, results in per_opp:
        for res in results:
            out[res.agent].append(res)
    return Simulation(rounds, out, np.stack([opp for opp, _ in per_opp]))


def summarize(results: list[MatchResult], covariates=None, covariate_mean=None) -> dict:
    """Mean payoff over finite matches with a 95% normal CI.

    With ``covariates`` (one row per match) of known expectation
    ``covariate_mean``, the mean is regression-adjusted (control variates)
    and the CI comes from the regression residuals.
    """
    ok = np.array([not r.nonfinite for r in results], dtype=bool)
    vals = np.array([r.mean_payoff for r in results])[ok]
    n_bad = int((~ok).sum())
    n = vals.size
    if covariates is not None and n > covariates.shape[1] + 2:
        x = np.asarray(covariates, dtype=float)[ok] - covariate_mean
        design = np.column_stack([np.ones(n), x])
        coef, *_ = np.linalg.lstsq(design, vals, rcond=None)
        resid = vals - design @ coef
        mean = float(coef[0])
        ci = 1.96 * math.sqrt(resid @ resid / (n - design.shape[1]) / n)
    else:
        mean = math.fsum(vals) / n if n else math.nan
        ci = 1.96 * vals.std(ddof=1) / math.sqrt(n) if n > 1 else math.nan
    return {
        "opponents": len(results),
        "mean_payoff": mean,
        "ci95": ci,
        "nonfinite_rate": n_bad / len(results) if results else math.nan,
    }


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _write_csv(header, rows, out=None) -> str:
    buf = io.StringIO()
    buf.write(f"# rng: {RNG_NAME}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) for h in header])
    text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    return text


def run_table3(cfg: ExperimentConfig) -> str:
    """Mean per-hand payoff and 95% CI for every agent and round setting, as CSV."""
    rows = []
    for rounds in cfg.rounds:
        t0 = time.perf_counter()
        sim = simulate(cfg, rounds)
        log.info("rounds=%d done in %.1fs", rounds, time.perf_counter() - t0)
        cov, cov_mean = _covariates(cfg, sim) if cfg.control_variate else (None, None)
        for name in cfg.agents:
            rows.append({"agent": name, "rounds": rounds, "seed": cfg.seed,
                         **summarize(sim.results[name], cov, cov_mean)})
    return _write_csv(CSV_HEADER, rows, cfg.out)


def _covariates(cfg: ExperimentConfig, sim: Simulation):
    # free coordinates of each true opponent strategy; prior mean is known exactly
    alpha = np.asarray(cfg.alpha, dtype=float)
    prior_mean = alpha / alpha.sum(axis=1, keepdims=True)
    n_opp = sim.opponents.shape[0]
    return sim.opponents[:, :, :-1].reshape(n_opp, -1), prior_mean[:, :-1].ravel()


def table4_config(**overrides) -> ExperimentConfig:
    params = {"samples_k": 10, "rounds": [0, 10, 25, 100]}
    params.update(overrides)
    return ExperimentConfig(**params)


def run_table4(cfg: ExperimentConfig) -> str:
    return run_table3(cfg)


# ---------------------------------------------------------------- timing

TABLE1_SIZES = (10, 20, 50, 100, 200, 500)
TABLE2_SIZES = (10, 20, 50, 100, 200, 500, 1000)


def timing_trial(table: int, n: int, beta_mode: str, rng: np.random.Generator):
    """One timed posterior evaluation; returns ``(seconds, finite)``.

    Table 1: four prior counts uniform on {1..n}, one observed big bet.
    Table 2: all prior counts 2, both action counts uniform on {1..n}.
    """
    g = make_motivating_game()
    if table == 1:
        alpha = rng.integers(1, n + 1, size=(2, 2)).astype(float)
        t0 = time.perf_counter()
        model = posterior_mean_single_obs(alpha, g.pi, 0, beta_mode=beta_mode)
    else:
        theta = rng.integers(1, n + 1, size=2)
        t0 = time.perf_counter()
        model = posterior_mean_multi_obs(
            np.full((2, 2), 2.0), g.pi, theta, beta_mode=beta_mode, horizon=2 * n
        )
    return time.perf_counter() - t0, bool(np.all(np.isfinite(model)))


def run_timing(table: int, sizes=None, trials: int = 1000, seed: int = 0,
               beta_modes=("log", "direct"), out=None) -> str:
    """Mean wall time per posterior evaluation and non-finite rate, as CSV."""
    if table not in (1, 2):
        raise ValueError("timing tables are 1 and 2")
    sizes = sizes or (TABLE1_SIZES if table == 1 else TABLE2_SIZES)
    rows = []
    for n in sizes:
        for mode in beta_modes:
            # same draws for both modes
            rng = np.random.default_rng(np.random.SeedSequence([seed, table, n]))
            timing_trial(table, 1, mode, np.random.default_rng(0))  # JIT warm-up
            secs, bad = 0.0, 0
            for _ in range(trials):
                dt, finite = timing_trial(table, n, mode, rng)
                secs += dt
                bad += not finite
            rows.append({"table": table, "n": n, "beta_mode": mode, "trials": trials,
                         "mean_ms": 1e3 * secs / trials, "nonfinite_rate": bad / trials,
                         "seed": seed})
    return _write_csv(TIMING_HEADER, rows, out)
