"""Manufactured test problems and all-at-once right-hand-side assembly.

The bundled 1D solution is ``u = t^2 x^2 (1-x)^2``. Its Riemann-Liouville
derivative of order alpha is the three-term bracket in :func:`rl_bracket`.
The 2D problems use ``u = t^2 X(x1) X(x2)`` with ``X(x) = x^2 (1-x)^2``,
and the derivative acts coordinate-wise.
"""

from dataclasses import dataclass
from math import gamma as Gamma
from typing import Callable, Optional

import numpy as np

from .grunwald import check_alpha
from .operators import (AllAtOnceSystem, SpaceOperator1D, SpaceOperator2D, TimeOperators,
                        gamma_ratio, sample_coefficient_1d, sample_coefficient_2d)


def _bump(x):
    x = np.asarray(x, dtype=float)
    return x**2 * (1.0 - x) ** 2


def rl_bracket(alpha, x):
    """Left Riemann-Liouville derivative of ``x^2 (1-x)^2`` on ``[0, x]``."""
    alpha = check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    return (2.0 / Gamma(3.0 - alpha) * x ** (2.0 - alpha)
            - 12.0 / Gamma(4.0 - alpha) * x ** (3.0 - alpha)
            + 24.0 / Gamma(5.0 - alpha) * x ** (4.0 - alpha))


def manufactured_u(x, t):
    return np.asarray(t, dtype=float) ** 2 * _bump(x)


def manufactured_f(a, alpha):
    """Source ``f(x, t) = 2t X(x) - a(x) t^2 D^alpha X(x)`` for the bundled solution."""
    alpha = check_alpha(alpha)

    def f(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return 2.0 * t * _bump(x) - _coef(a, x) * t**2 * rl_bracket(alpha, x)

    return f


def manufactured_u_2d(x1, x2, t):
    return np.asarray(t, dtype=float) ** 2 * _bump(x1) * _bump(x2)


def manufactured_f_2d(a, alpha1, alpha2):
    alpha1, alpha2 = check_alpha(alpha1), check_alpha(alpha2)

    def f(x1, x2, t):
        X1, X2 = _bump(x1), _bump(x2)
        frac = rl_bracket(alpha1, x1) * X2 + X1 * rl_bracket(alpha2, x2)
        return 2.0 * np.asarray(t) * X1 * X2 - _coef(a, x1, x2) * np.asarray(t) ** 2 * frac

    return f


def _coef(a, *x):
    if a is None:
        return 1.0
    if callable(a):
        return np.asarray(a(*x), dtype=float)
    return float(a)


def _zero(*args):
    return np.zeros(np.broadcast(*[np.asarray(a) for a in args]).shape)


@dataclass
class ProblemSpec1D:
    """``u_t = a(x) D^alpha u + f`` on ``interval x (0, T]`` with homogeneous Dirichlet data."""

    alpha: float
    theta: float = 0.5
    coefficient: Optional[Callable] = None
    source: Callable = _zero
    initial: Callable = _zero
    exact: Optional[Callable] = None
    interval: tuple = (0.0, 1.0)
    T: float = 1.0
    name: str = ""

    def __post_init__(self):
        self.alpha = check_alpha(self.alpha)
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if self.T <= 0 or self.interval[1] <= self.interval[0]:
            raise ValueError("empty space or time interval")


@dataclass
class ProblemSpec2D:
    alpha1: float
    alpha2: float
    theta: float = 0.5
    coefficient: Optional[Callable] = None
    source: Callable = _zero
    initial: Callable = _zero
    exact: Optional[Callable] = None
    rectangle: tuple = ((0.0, 1.0), (0.0, 1.0))
    T: float = 1.0
    name: str = ""

    def __post_init__(self):
        self.alpha1, self.alpha2 = check_alpha(self.alpha1), check_alpha(self.alpha2)
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if self.T <= 0:
            raise ValueError("T must be positive")


COEFFICIENTS_1D = {
    "const1": None,
    "xsq_plus1": lambda x: x**2 + 1.0,
    "xsq": lambda x: x**2,
}

COEFFICIENTS_2D = {
    "const1_2d": None,
    "radial_plus1_2d": lambda x1, x2: x1**2 + x2**2 + 1.0,
    "radial_2d": lambda x1, x2: x1**2 + x2**2,
}

PROBLEM_NAMES = tuple(COEFFICIENTS_1D) + tuple(COEFFICIENTS_2D)


def named_problem(name, alpha=1.5, theta=0.5, alpha2=None):
    """Bundled manufactured problem by name.

    Every problem shares the exact solution. The source is recomputed from
    the problem's own coefficient.
    """
    if name in COEFFICIENTS_1D:
        a = COEFFICIENTS_1D[name]
        return ProblemSpec1D(alpha, theta, a, manufactured_f(a, alpha), exact=manufactured_u, name=name)
    if name in COEFFICIENTS_2D:
        a = COEFFICIENTS_2D[name]
        alpha2 = alpha if alpha2 is None else alpha2
        return ProblemSpec2D(alpha, alpha2, theta, a, manufactured_f_2d(a, alpha, alpha2),
                             exact=manufactured_u_2d, name=name)
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")


@dataclass
class Grid1D:
    x: np.ndarray
    t: np.ndarray
    dx: float
    dt: float
    gamma: float


@dataclass
class Grid2D:
    x1: np.ndarray
    x2: np.ndarray
    t: np.ndarray
    dx: tuple
    dt: float
    gammas: tuple


def _theta_blocks(f_at, t, theta, dt):
    """``dt (theta f(t_m) + (1 - theta) f(t_{m-1}))`` for ``m = 1..M``, stacked time-major."""
    return np.stack([dt * (theta * f_at(t[m]) + (1.0 - theta) * f_at(t[m - 1])) for m in range(1, len(t))])


def _finish_rhs(blocks, space, theta, u0):
    """Add the initial-data term and apply ``I (x) H_theta^{-1}``.

    ``blocks`` has shape ``(M, n_space)`` (time-major). It is transposed
    to space-major before the time sweep.
    """
    blocks = np.array(blocks, dtype=float)
    if np.any(u0):
        blocks[0] += u0 + (1.0 - theta) * space.matvec(u0)
    F = blocks.T
    M = F.shape[1]
    return TimeOperators(theta, M).solve_h_theta(F).ravel()


def discretize_1d(problem, N, M):
    """All-at-once system, right-hand side and grid for a 1D problem."""
    if N < 2 or M < 2:
        raise ValueError("N and M must be at least 2")
    a1, b1 = problem.interval
    dx = (b1 - a1) / (N + 1)
    dt = problem.T / M
    gamma = gamma_ratio(dt, dx, problem.alpha)
    values, x = sample_coefficient_1d(problem.coefficient, N, problem.interval)
    space = SpaceOperator1D(problem.alpha, N, values, gamma)
    system = AllAtOnceSystem(space, TimeOperators(problem.theta, M))
    t = np.linspace(0.0, problem.T, M + 1)
    blocks = _theta_blocks(lambda tm: np.broadcast_to(problem.source(x, tm), x.shape), t, problem.theta, dt)
    u0 = np.broadcast_to(problem.initial(x, 0.0), x.shape).astype(float)
    rhs = _finish_rhs(blocks, space, problem.theta, u0)
    return system, rhs, Grid1D(x, t, dx, dt, gamma)


def assemble_rhs_1d(problem, N, M):
    return discretize_1d(problem, N, M)[1]


def discretize_2d(problem, N1, N2, M):
    if min(N1, N2, M) < 2:
        raise ValueError("N1, N2 and M must be at least 2")
    (a1, b1), (a2, b2) = problem.rectangle
    dx1, dx2 = (b1 - a1) / (N1 + 1), (b2 - a2) / (N2 + 1)
    dt = problem.T / M
    g1 = gamma_ratio(dt, dx1, problem.alpha1)
    g2 = gamma_ratio(dt, dx2, problem.alpha2)
    values, (x1, x2) = sample_coefficient_2d(problem.coefficient, N1, N2, problem.rectangle)
    space = SpaceOperator2D(problem.alpha1, problem.alpha2, N1, N2, g1, g2, values)
    system = AllAtOnceSystem(space, TimeOperators(problem.theta, M))
    t = np.linspace(0.0, problem.T, M + 1)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")

    def f_at(tm):
        return np.broadcast_to(problem.source(X1, X2, tm), X1.shape).ravel()

    blocks = _theta_blocks(f_at, t, problem.theta, dt)
    u0 = np.broadcast_to(problem.initial(X1, X2, 0.0), X1.shape).ravel().astype(float)
    rhs = _finish_rhs(blocks, space, problem.theta, u0)
    return system, rhs, Grid2D(x1, x2, t, (dx1, dx2), dt, (g1, g2))


def assemble_rhs_2d(problem, N1, N2, M):
    return discretize_2d(problem, N1, N2, M)[1]


def final_time_error(problem, solution, grid):
    """Max-node error of the computed solution at ``t = T``."""
    M = len(grid.t) - 1
    U = np.asarray(solution).reshape(-1, M)
    if isinstance(grid, Grid1D):
        exact = problem.exact(grid.x, grid.t[-1])
    else:
        X1, X2 = np.meshgrid(grid.x1, grid.x2, indexing="ij")
        exact = problem.exact(X1, X2, grid.t[-1]).ravel()
    return float(np.abs(U[:, -1] - exact).max())
