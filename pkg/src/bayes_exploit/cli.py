"""Command-line entry point: ``bayes-exploit <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

import numpy as np

from . import harness
from .posterior import DEFAULT_HORIZON, posterior_mean_multi_obs


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _experiment_config(args, **defaults) -> harness.ExperimentConfig:
    base = harness.ExperimentConfig.from_json(args.config) if args.config else None
    params = asdict(base) if base else dict(defaults)
    for flag, key in (
        ("seed", "seed"),
        ("opponents", "opponents"),
        ("rounds", "rounds"),
        ("samples_k", "samples_k"),
        ("beta_mode", "beta_mode"),
        ("out", "out"),
        ("workers", "workers"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            params[key] = value
    if getattr(args, "agents", None):
        params["agents"] = args.agents.split(",")
    if getattr(args, "no_control_variate", False):
        params["control_variate"] = False
    return harness.ExperimentConfig(**params)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--config", help="JSON experiment config")


def _add_experiment(p: argparse.ArgumentParser):
    _add_common(p)
    p.add_argument("--opponents", type=int)
    p.add_argument("--rounds", type=_ints, help="comma-separated, e.g. 0,10,25")
    p.add_argument("--samples-k", type=int, dest="samples_k")
    p.add_argument("--beta-mode", choices=("log", "direct"), dest="beta_mode")
    p.add_argument("--agents", help="comma-separated subset of " + ",".join(harness.AGENTS))
    p.add_argument("--workers", type=int)
    p.add_argument("--no-control-variate", action="store_true", dest="no_control_variate")


def _add_timing(p: argparse.ArgumentParser):
    _add_common(p)
    p.add_argument("--sizes", type=_ints, help="comma-separated prior/observation sizes n")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--beta-mode", choices=("log", "direct"), dest="beta_mode",
                   help="only this mode (default: both)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bayes-exploit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_timing(sub.add_parser("table1", help="single-observation timing and non-finite rate"))
    _add_timing(sub.add_parser("table2", help="multi-observation timing and non-finite rate"))
    _add_experiment(sub.add_parser("table3", help="agent comparison, K=1000 sample banks"))
    _add_experiment(sub.add_parser("table4", help="agent comparison, K=10 sample banks"))

    p = sub.add_parser("posterior", help="one posterior-mean query")
    p.add_argument("--alpha", type=_floats, required=True,
                   help="row-major prior counts, e.g. 10,3,4,9")
    p.add_argument("--states", type=int, default=2)
    p.add_argument("--obs", type=_ints, required=True, help="action counts, e.g. 1,0")
    p.add_argument("--pi", type=_floats, help="state probabilities (default uniform)")
    p.add_argument("--beta-mode", choices=("log", "direct"), default="log", dest="beta_mode")
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)

    p = sub.add_parser("match", help="one simulated opponent against every agent")
    _add_experiment(p)
    p.add_argument("--opponent", type=int, default=0, help="opponent index")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    if args.command in ("table1", "table2"):
        table = int(args.command[-1])
        modes = (args.beta_mode,) if args.beta_mode else ("log", "direct")
        trials = args.trials or (1000 if table == 1 else 50)
        text = harness.run_timing(table, sizes=args.sizes, trials=trials,
                                  seed=args.seed or 0, beta_modes=modes, out=args.out)
    elif args.command == "table3":
        text = harness.run_table3(_experiment_config(args))
    elif args.command == "table4":
        text = harness.run_table4(_experiment_config(args, **asdict(harness.table4_config())))
    elif args.command == "posterior":
        alpha = np.asarray(args.alpha, dtype=float).reshape(args.states, -1)
        pi = args.pi or [1.0 / args.states] * args.states
        mean = posterior_mean_multi_obs(alpha, pi, args.obs, beta_mode=args.beta_mode,
                                        horizon=args.horizon)
        text = json.dumps({"alpha": alpha.tolist(), "pi": list(pi), "obs": args.obs,
                           "posterior_mean": mean.tolist()})
    else:
        cfg = _experiment_config(args)
        rounds = cfg.rounds[0] if cfg.rounds else 0
        true_opp, results = harness.play_opponent(cfg, rounds, args.opponent)
        text = json.dumps({"opponent": args.opponent, "true_strategy": true_opp.tolist(),
                           "results": [asdict(r) for r in results]}, indent=2)
    if args.command in ("posterior", "match") or not args.out:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
