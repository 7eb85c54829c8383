"""Show that the structured operator keeps a constant term count as the
register grows, while the dense matrix doubles in each dimension.

Also times one loss evaluation per size to illustrate the simulation cost.
"""

import argparse
import sys
import time

import numpy as np

from vqpde.driver import build_context, evaluate_loss
from vqpde.fem import BeamProblem, BoundaryCase


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--case", default="cantilever",
                        choices=[c.value for c in BoundaryCase])
    parser.add_argument("--max-qubits", type=int, default=10)
    args = parser.parse_args(argv)
    case = BoundaryCase(args.case)

    print(f"{'n':>3}{'dofs':>7}{'terms':>7}{'bc pairs':>10}{'loss eval ms':>14}")
    rng = np.random.default_rng(0)
    for n in range(3, args.max_qubits + 1):
        problem = BeamProblem(length=10.0, youngs_modulus=1000.0,
                              second_moment=1.0, num_qubits=n,
                              boundary_case=case)
        ctx = build_context(problem, reps=5)
        theta = rng.uniform(-np.pi, np.pi, ctx.n_params)
        evaluate_loss(theta, ctx)  # warm caches before timing
        t0 = time.perf_counter()
        reps = 20
        for _ in range(reps):
            evaluate_loss(theta, ctx)
        per_eval = (time.perf_counter() - t0) / reps * 1e3
        print(f"{n:>3}{2 ** n:>7}{len(ctx.structured.terms):>7}"
              f"{len(ctx.structured.bc_pairs):>10}{per_eval:>14.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
