"""Command-line front end.

    cqibeam simulate --config exp.cfg [--seed N] [--out results.csv]
    cqibeam betacheck --antennas 128 [--samples 10000] [...]
    cqibeam convergence --config exp.cfg [--seed N] [--out trace.csv]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .am import AmProblem, run_am
from .bayes import tune_lambda
from .channel import dft_pilot, make_dccm, pilot_for_round
from .codebook import build_single_layer
from .errors import ConfigError, NumericalError
from .feedback import make_feedback
from .harness import (ExperimentConfig, empirical_beta_check, load_config,
                      run_experiment)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqibeam",
        description="CQI-driven beamforming estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte-Carlo experiment")
    sim.add_argument("--config", required=True, help="key = value config file")
    sim.add_argument("--seed", type=int, help="override master_seed")
    sim.add_argument("--out", help="override output_path")

    beta = sub.add_parser("betacheck",
                          help="empirical check of the sphere moment claims")
    beta.add_argument("--antennas", type=int, required=True)
    beta.add_argument("--samples", type=int, default=10_000)
    beta.add_argument("--ports", type=int, default=16)
    beta.add_argument("--codebook", type=int, default=256)
    beta.add_argument("--seed", type=int, default=0)

    conv = sub.add_parser("convergence",
                          help="per-iteration objective trace of one run")
    conv.add_argument("--config", required=True)
    conv.add_argument("--seed", type=int, help="override master_seed")
    conv.add_argument("--out", help="trace CSV path (default: stdout)")
    return parser


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if getattr(args, "out", None):
        updates["output_path"] = args.out
    return dataclasses.replace(config, **updates) if updates else config


def _cmd_simulate(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    curves = run_experiment(config)
    for method in config.methods:
        curve = curves[method]
        print(f"{method}: mean precision {curve.precisions[-1]:.9g} "
              f"after {curve.n_rounds} rounds ({curve.trials} trials)")
    print(f"wrote {config.output_path}")
    return EXIT_OK


def _cmd_betacheck(args) -> int:
    report = empirical_beta_check(args.antennas, args.ports, args.codebook,
                                  args.samples, args.seed)
    print(f"samples: {report.samples}, dimension: {report.dimension}")
    print(f"mismatch mean: {report.mean_bm:.9g} "
          f"(theory {report.theory_mean_bm:.9g}, se {report.se_mean_bm:.3g})")
    print(f"mismatch variance: {report.var_bm:.9g} "
          f"(theory {report.theory_var_bm:.9g}, se {report.se_var_bm:.3g})")
    print(f"alignment mean: {report.mean_ac:.9g}, "
          f"variance: {report.var_ac:.9g}")
    return EXIT_OK


def _cmd_convergence(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    seed = np.random.SeedSequence(config.master_seed).spawn(1)[0]
    words = seed.generate_state(4)
    dccm = make_dccm(config.n_antennas, config.n_user, config.eigen_profile,
                     int(words[0]))
    codebook = build_single_layer(config.n_ports, config.codebook_size)
    q1 = dft_pilot(config.n_antennas, config.n_ports)
    records = [make_feedback(dccm,
                             pilot_for_round(t, config.n_antennas,
                                             config.n_ports, [q1],
                                             int(words[1])),
                             codebook)
               for t in range(1, config.rounds + 1)]
    reference = records[0].pilot.matrix @ records[0].codeword[:, 0]
    tuned = tune_lambda(records, None, reference, config.tuner())
    problem = AmProblem.from_records(records, tuned.lam)
    rng = np.random.default_rng(int(words[3]))
    init = rng.standard_normal(config.n_antennas) \
        + 1j * rng.standard_normal(config.n_antennas)
    _, trace = run_am(problem, init)
    lines = "\n".join(trace.csv_lines()) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(lines)
        print(f"wrote {args.out} ({trace.iterations} iterations, "
              f"lam {tuned.lam:.9g})")
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"simulate": _cmd_simulate, "betacheck": _cmd_betacheck,
                "convergence": _cmd_convergence}
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
