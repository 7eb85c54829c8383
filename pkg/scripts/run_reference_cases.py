"""Run the four reference boundary cases and print a summary table.

Configuration: L = 10 m, E = 1000, I = 1, n = 5 qubits, reps = 5, seeded
best-of-5-restart BFGS. Per-case artifacts (result.json, convergence.csv,
profile.csv) land in results/<case>/.
"""

import argparse
import sys
from pathlib import Path

from vqpde.cli import run_case

CASES = ("pbc", "ssb", "ffb", "cantilever")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--restarts", type=int, default=5)
    parser.add_argument("--max-iter", type=int, default=3000)
    parser.add_argument("--num-qubits", type=int, default=5)
    args = parser.parse_args(argv)

    rows = []
    for case in CASES:
        config = {
            "problem": {"length": 10.0, "youngs_modulus": 1000.0,
                        "second_moment": 1.0, "num_qubits": args.num_qubits,
                        "boundary_case": case},
            "ansatz": {"reps": 5},
            "optimizer": {"seed": args.seed, "restarts": args.restarts,
                          "max_iter": args.max_iter},
        }
        out = Path(args.output_dir) / case
        print(f"running {case} ...", flush=True)
        result = run_case(config, output_dir=str(out))
        m = result["metrics"]
        rows.append((case, result["convergence"]["iterations"],
                     m["accuracy_pct"], m["relative_error"], m["fidelity"],
                     result["wall_time_seconds"]))

    print(f"\n{'case':<12}{'iters':>7}{'accuracy %':>12}{'rel err':>12}"
          f"{'fidelity':>12}{'wall s':>9}")
    for case, iters, acc, rel, fid, wall in rows:
        print(f"{case:<12}{iters:>7}{acc:>12.4f}{rel:>12.6f}{fid:>12.8f}"
              f"{wall:>9.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
