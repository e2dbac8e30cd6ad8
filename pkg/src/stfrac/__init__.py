"""All-at-once solvers and circulant preconditioners for space-fractional
diffusion equations discretized by the shifted Grünwald formula in space and
the theta-method in time.
"""

from .diagnostics import (ClusterMetric, KroneckerSum, SpectrumReport, cluster_fraction,
                          condition_number_2, dense_eigenvalues, singular_value_distribution_check,
                          symbol_spectrum_compare, system_condition_number)
from .gmres import SolveReport, gmres_solve
from .grunwald import GrunwaldTable, coefficient_closed_form, coefficients
from .operators import (AllAtOnceSystem, HessenbergToeplitz, TimeOperators, aao_matvec, assemble_dense,
                        build_space_1d, build_time_q, build_U_2d, toeplitz_matvec)
from .precond import (CirculantPreconditioner, apply_inverse, build_preconditioner_1d,
                      build_preconditioner_2d, preconditioner_for)
from .problems import (ProblemSpec1D, ProblemSpec2D, assemble_rhs_1d, assemble_rhs_2d, discretize_1d,
                       discretize_2d, manufactured_f, manufactured_u, named_problem)
from .symbols import f_alpha, q_theta, sample_symbol_cloud

__version__ = "0.1.0"
