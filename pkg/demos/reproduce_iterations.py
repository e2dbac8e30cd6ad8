"""Reproduce the 1D iteration-count table for a(x) = 1.

Runs unpreconditioned GMRES and the two block circulant preconditioners on
the all-at-once system, side by side with the published counts.

    python3 demos/reproduce_iterations.py [problem]
"""

import os
import sys

import numpy as np

from stfrac.gmres import gmres_solve
from stfrac.precond import KINDS, preconditioner_for
from stfrac.problems import discretize_1d, named_problem

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))
from reference_tables import ALPHAS, ITER_CONST1, ITER_XSQ, ITER_XSQ_PLUS1  # noqa: E402

TABLES = {"const1": ITER_CONST1, "xsq_plus1": ITER_XSQ_PLUS1, "xsq": ITER_XSQ}


def main(problem="const1"):
    table = TABLES[problem]
    print(f"problem {problem}: ours (published) for A, Strang, first column")
    for (N, M), ref in sorted(table.items()):
        if max(N, M) > 64:
            continue
        cells = []
        for ia, alpha in enumerate(ALPHAS):
            system, rhs, _ = discretize_1d(named_problem(problem, alpha), N, M)
            counts = [gmres_solve(system, rhs)[1].iterations]
            counts += [gmres_solve(system, rhs, preconditioner_for(system, k))[1].iterations for k in KINDS]
            cells.append(" ".join(f"{c}({r})" for c, r in zip(counts, ref[3 * ia:3 * ia + 3])))
        print(f"N={N:3d} M={M:3d} | " + " | ".join(cells))
    return 0


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    sys.exit(main(*sys.argv[1:]))
