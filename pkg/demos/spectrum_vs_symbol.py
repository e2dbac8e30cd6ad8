"""Compare preconditioned spectra with the unit cluster and G_bar with f_alpha.

Writes two CSV files for plotting into the working directory:
``precond_spectrum.csv`` (eigenvalues of P^-1 A) and ``gbar_vs_falpha.csv``
(each eigenvalue of G_bar next to its nearest symbol sample).
"""

import csv
import sys

import numpy as np

from stfrac.diagnostics import cluster_fraction, dense_eigenvalues, symbol_spectrum_compare
from stfrac.operators import HessenbergToeplitz
from stfrac.precond import KINDS, preconditioner_for
from stfrac.problems import discretize_1d, named_problem
from stfrac.symbols import f_alpha


def main(alpha=1.5, n=32):
    alpha, n = float(alpha), int(n)
    system, _, _ = discretize_1d(named_problem("const1", alpha), n, n)
    A = system.dense()
    with open("precond_spectrum.csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["precond", "re", "im"])
        for kind in KINDS:
            lam = dense_eigenvalues(preconditioner_for(system, kind).apply_inverse(A)).eigenvalues
            for z in lam:
                out.writerow([kind, z.real, z.imag])
            for eps in (0.2, 0.5):
                m = cluster_fraction(lam, 1.0, eps)
                print(f"{kind:12s} eps={eps}: {m.inside_fraction:.3f} inside, {m.outlier_count} outliers")

    for size in (64, 128, 256):
        lam = dense_eigenvalues(HessenbergToeplitz(alpha, size).dense())
        xi = -np.pi + 2 * np.pi * (np.arange(size) + 0.5) / size
        cmp = symbol_spectrum_compare(lam, f_alpha(alpha, xi))
        print(f"G_bar order {size}: mean distance to f_alpha samples {cmp.mean_nn_distance:.3f}")
    with open("gbar_vs_falpha.csv", "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["eig_re", "eig_im", "symbol_re", "symbol_im"])
        out.writerows(cmp.csv_rows())
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
