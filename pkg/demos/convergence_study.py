"""First-order convergence of the Crank-Nicolson all-at-once scheme.

Solves the a(x) = x^2 problem on N = M = 16, 32, 64 with the Strang
preconditioner and reports the max-node error at the final time.
"""

import sys

import numpy as np

from stfrac.gmres import gmres_solve
from stfrac.precond import preconditioner_for
from stfrac.problems import discretize_1d, final_time_error, named_problem


def main(alpha=1.5, problem="xsq"):
    prob = named_problem(problem, float(alpha))
    sizes, errors = (16, 32, 64), []
    for n in sizes:
        system, rhs, grid = discretize_1d(prob, n, n)
        x, report = gmres_solve(system, rhs, preconditioner_for(system, "strang"), tol=1e-12)
        errors.append(final_time_error(prob, x, grid))
        print(f"N=M={n:3d}: {report.iterations:4d} iterations, error {errors[-1]:.3e}")
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    print("observed orders:", ", ".join(f"{r:.2f}" for r in rates))
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
