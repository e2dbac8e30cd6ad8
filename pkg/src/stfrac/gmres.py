"""Full (unrestarted) GMRES with optional left preconditioning."""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

BREAKDOWN_TOL = 1e-15


@dataclass
class SolveReport:
    """Outcome of one GMRES solve.

    ``relative_residuals[k]`` is the (preconditioned) relative residual after
    ``k + 1`` Arnoldi steps, as given by the Givens-rotated least-squares
    problem.
    """

    iterations: int
    relative_residuals: np.ndarray = field(repr=False)
    converged: bool
    wall_time: float
    breakdown: bool = False

    @property
    def final_relative_residual(self):
        if len(self.relative_residuals) == 0:
            return 0.0
        return float(self.relative_residuals[-1])


def _as_callable(op):
    if op is None:
        return None
    if callable(op) and not isinstance(op, np.ndarray):
        if hasattr(op, "apply_inverse"):
            return op.apply_inverse
        return op
    if hasattr(op, "apply_inverse"):
        return op.apply_inverse
    if hasattr(op, "matvec"):
        return op.matvec
    mat = np.asarray(op)
    return lambda v: mat @ v


def _operator(op):
    if hasattr(op, "matvec"):
        return op.matvec
    if isinstance(op, np.ndarray):
        return lambda v: op @ v
    if callable(op):
        return op
    mat = np.asarray(op)
    return lambda v: mat @ v


def _givens(a, b):
    if b == 0:
        return 1.0, 0.0
    r = np.hypot(abs(a), abs(b))
    return a / r, b / r


def gmres_solve(operator, b, preconditioner=None, tol=1e-8, max_iters=None, reorthogonalize=True):
    """Solve ``A x = b`` from a zero initial guess.

    ``operator`` is a matrix, an object with ``matvec`` or a callable.
    ``preconditioner`` applies ``P^{-1}`` (an object with ``apply_inverse`` or
    a callable); it is applied on the left, so convergence is judged on
    ``||P^{-1}(b - A x)|| / ||P^{-1} b||``. ``max_iters`` defaults to the
    system dimension. Arnoldi uses modified Gram-Schmidt, repeated once when
    the new vector loses more than half its norm.

    Returns ``(x, SolveReport)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    start = time.perf_counter()
    matvec = _operator(operator)
    prec = _as_callable(preconditioner)
    b = np.asarray(b)
    n = b.shape[0]
    max_iters = n if max_iters is None else int(max_iters)

    def apply(v):
        w = matvec(v)
        return prec(w) if prec is not None else w

    r0 = prec(b) if prec is not None else b
    beta = np.linalg.norm(r0)
    if beta == 0:
        raise ValueError("right-hand side must be nonzero")
    dtype = np.result_type(r0, float)
    x = np.zeros(n, dtype=dtype)

    # Krylov basis and Hessenberg storage grow on demand; max_iters may be
    # the full system dimension
    cap = min(max_iters, 64)
    V = np.zeros((cap + 1, n), dtype=dtype)
    H = np.zeros((cap + 1, cap), dtype=dtype)
    cs = np.zeros(max_iters, dtype=dtype)
    sn = np.zeros(max_iters, dtype=dtype)
    g = np.zeros(max_iters + 1, dtype=dtype)
    g[0] = beta
    V[0] = r0 / beta
    history = []
    converged = breakdown = False
    k = 0
    for j in range(max_iters):
        if j == cap:
            cap = min(2 * cap, max_iters)
            V = np.concatenate([V, np.zeros((cap + 1 - V.shape[0], n), dtype=dtype)])
            H = np.pad(H, ((0, cap + 1 - H.shape[0]), (0, cap - H.shape[1])))
        w = apply(V[j])
        norm_in = np.linalg.norm(w)
        for i in range(j + 1):
            h = np.vdot(V[i], w)
            H[i, j] += h
            w = w - h * V[i]
        norm_out = np.linalg.norm(w)
        if reorthogonalize and norm_out < 0.5 * norm_in:
            for i in range(j + 1):
                h = np.vdot(V[i], w)
                H[i, j] += h
                w = w - h * V[i]
            norm_out = np.linalg.norm(w)
        H[j + 1, j] = norm_out

        for i in range(j):
            hi, hi1 = H[i, j], H[i + 1, j]
            H[i, j] = np.conj(cs[i]) * hi + np.conj(sn[i]) * hi1
            H[i + 1, j] = -sn[i] * hi + cs[i] * hi1
        cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
        H[j, j] = np.conj(cs[j]) * H[j, j] + np.conj(sn[j]) * H[j + 1, j]
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = np.conj(cs[j]) * g[j]

        k = j + 1
        rel = abs(g[j + 1]) / beta
        history.append(rel)
        if rel <= tol:
            converged = True
            break
        if norm_out <= BREAKDOWN_TOL * max(norm_in, 1.0):
            converged = breakdown = True
            break
        V[j + 1] = w / norm_out

    if k:
        R = np.triu(H[:k, :k])
        if np.all(np.abs(np.diag(R)) > 0):
            y = scipy.linalg.solve_triangular(R, g[:k])
        else:  # singular operator: minimum-norm least squares in the subspace
            y = np.linalg.lstsq(R, g[:k], rcond=None)[0]
        x = V[:k].T @ y
    if not np.iscomplexobj(b) and np.iscomplexobj(x):
        x = x.real
    report = SolveReport(iterations=k, relative_residuals=np.array(history), converged=converged,
                         wall_time=time.perf_counter() - start, breakdown=breakdown)
    return x, report
