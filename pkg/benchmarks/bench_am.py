"""Timing comparison of the two inner-loop backends.

Runs the alternating-minimization estimator on seeded feedback-driven
problems once per backend (compiled Cython kernel vs pure NumPy) and
reports per-solve wall time and the speedup. Both backends execute the
same iteration, so the script also checks that iterates agree.

Usage:
    python3 benchmarks/bench_am.py [--repeats 5] [--seed 0]
"""

import argparse
import time

import numpy as np

from cqibeam.am import AmProblem, backend_name, run_am
from cqibeam.channel import dft_pilot, make_dccm, pilot_for_round
from cqibeam.codebook import build_single_layer
from cqibeam.feedback import make_feedback

CASES = [
    # (n_antennas, n_ports, rounds)
    (16, 4, 20),
    (32, 8, 40),
    (32, 8, 100),
    (64, 8, 100),
]


def build_problem(n_antennas, n_ports, rounds, seed):
    dccm = make_dccm(n_antennas, 2, (8.0, 1.0), seed)
    cb = build_single_layer(n_ports, 2 * n_ports)
    q1 = dft_pilot(n_antennas, n_ports)
    records = [make_feedback(dccm, pilot_for_round(t, n_antennas, n_ports,
                                                   [q1], seed + 1), cb)
               for t in range(1, rounds + 1)]
    rng = np.random.default_rng(seed + 2)
    init = rng.standard_normal(n_antennas) \
        + 1j * rng.standard_normal(n_antennas)
    return AmProblem.from_records(records, lam=1.0), init


def time_backend(problem, init, backend, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        w, trace = run_am(problem, init, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, w, trace


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per case (best is reported)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if backend_name() != "cython":
        print("compiled kernel not available; nothing to compare")
        return

    header = (f"{'case':>16} {'iters':>6} {'cython':>10} {'numpy':>10} "
              f"{'speedup':>8}  agreement")
    print(header)
    print("-" * len(header))
    for n_antennas, n_ports, rounds in CASES:
        problem, init = build_problem(n_antennas, n_ports, rounds, args.seed)
        t_cy, w_cy, tr_cy = time_backend(problem, init, "cython",
                                         args.repeats)
        t_np, w_np, tr_np = time_backend(problem, init, "numpy",
                                         args.repeats)
        diff = float(np.max(np.abs(w_cy - w_np)))
        same = tr_cy.iterations == tr_np.iterations and diff < 1e-10
        label = f"{n_antennas}x{n_ports} T={rounds}"
        print(f"{label:>16} {tr_cy.iterations:>6d} {t_cy * 1e3:>8.2f}ms "
              f"{t_np * 1e3:>8.2f}ms {t_np / t_cy:>7.2f}x  "
              f"{'ok' if same else f'DIFF {diff:.1e}'}")


if __name__ == "__main__":
    main()
