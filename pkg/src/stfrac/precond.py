"""Block circulant preconditioners ``s C (x) I_M + I (x) Q_{theta,M}``.

``C`` is a Strang-type circulant approximation of the Hessenberg Toeplitz
matrix (1D) or a Kronecker sum of two of them (2D). The inverse is applied
with FFTs in space and ``n_space`` independent lower-bidiagonal sweeps in
time, for a total of O(n_space M log n_space) work.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .grunwald import coefficients
from .operators import TimeOperators, check_dense_order

KINDS = ("strang", "first_column")
SINGULAR_TOL = 1e-14
IMAG_TOL = 1e-10


class SingularBlockError(ArithmeticError):
    pass


def strang_column(alpha, N):
    """First column of the Strang circulant of ``Gbar_{alpha,N}``.

    Diagonal ``k`` of the Toeplitz matrix is copied for ``0 <= k < N/2`` and
    the single superdiagonal ``g_0`` wraps to position ``N - 1``; all other
    entries are zero. For even ``N`` this leaves the ``k = N/2`` diagonal out.
    """
    N = int(N)
    if N < 4:
        raise ValueError("the Strang column needs N >= 4")
    g = coefficients(alpha, N + 1).coeffs
    col = np.zeros(N)
    keep = (N - 1) // 2 + 1
    col[:keep] = g[1:keep + 1]
    col[N - 1] = g[0]
    return col


def first_column_circulant(alpha, N):
    """Circulant column ``[g_1, .., g_{N-1}, g_0]`` (``g_N`` replaced by the wrapped ``g_0``)."""
    N = int(N)
    if N < 2:
        raise ValueError("N must be at least 2")
    g = coefficients(alpha, N + 1).coeffs
    col = g[1:N + 1].copy()
    col[N - 1] = g[0]
    return col


def circulant_column(kind, alpha, N):
    if kind == "strang":
        return strang_column(alpha, N)
    if kind == "first_column":
        return first_column_circulant(alpha, N)
    raise ValueError(f"unknown circulant kind {kind!r}; expected one of {KINDS}")


def circulant_eigenvalues(column):
    """Eigenvalues ``lambda_j = sum_k c_k exp(2 pi i j k / N)``.

    With this sign the circulant factors as ``F diag(lambda) F*`` for the
    unitary ``F[s, t] = exp(-2 pi i s t / N) / sqrt(N)``.
    """
    column = np.asarray(column)
    if column.size == 0:
        raise ValueError("empty circulant column")
    return len(column) * np.fft.ifft(column)


def fourier_matrix(N):
    s = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(s, s) / N) / np.sqrt(N)


def mean_coefficient(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty diagonal sampling")
    return float(values.mean())


def block_solve(s_lambda, theta, M, b):
    """Solve ``(s_lambda I + Q_{theta,M}) x = b`` with two bidiagonal sweeps.

    ``s_lambda`` may be an array of block shifts; ``b`` then has shape
    ``(len(s_lambda), M, ...)``. A scalar shift takes a plain length-``M``
    vector.
    """
    scalar = np.ndim(s_lambda) == 0
    s = np.atleast_1d(np.asarray(s_lambda, dtype=complex))
    b = np.asarray(b)
    if scalar:
        b = b[None]
    if b.shape[1] != M:
        raise ValueError(f"right-hand side has {b.shape[1]} time levels, expected {M}")
    pivot = 1.0 - s * theta
    if np.any(np.abs(pivot) <= SINGULAR_TOL):
        raise SingularBlockError("block s*lambda*H_theta + H is numerically singular")
    # (s H_theta + H) x = H_theta b; the left matrix has diagonal 1 - s*theta
    # and subdiagonal -(1 + s*(1 - theta)).
    time = TimeOperators(theta, M)
    rhs = time.apply_h_theta(b)
    shape = (-1,) + (1,) * (b.ndim - 2)
    diag = pivot.reshape(shape)
    sub = -(1.0 + s * (1.0 - theta)).reshape(shape)
    x = np.empty(rhs.shape, dtype=complex)
    x[:, 0] = rhs[:, 0] / diag
    for m in range(1, M):
        x[:, m] = (rhs[:, m] - sub * x[:, m - 1]) / diag
    return x[0] if scalar else x


@dataclass
class CirculantPreconditioner:
    """Block circulant preconditioner in factored form.

    ``eigenvalues`` are those of the space circulant (for 2D the Kronecker sum
    ``gamma1 Lambda_1 (+) gamma2 Lambda_2``, lexicographic), ``scale`` is the
    scalar in front of it (``gamma*d`` in 1D, ``d`` in 2D).
    """

    kind: str
    grid_shape: tuple
    eigenvalues: np.ndarray
    scale: float
    theta: float
    M: int
    mean: float
    columns: tuple
    gammas: tuple

    def __post_init__(self):
        self.time = TimeOperators(self.theta, self.M)
        pivots = 1.0 - self.scale * self.eigenvalues * self.theta
        if np.any(np.abs(pivots) <= SINGULAR_TOL):
            j = int(np.argmin(np.abs(pivots)))
            raise SingularBlockError(f"block {j} has |1 - s*lambda*theta| = {abs(pivots[j]):.3e}")

    @property
    def n_space(self):
        return int(np.prod(self.grid_shape))

    @property
    def order(self):
        return self.n_space * self.M

    @property
    def shape(self):
        return (self.order, self.order)

    def _spatial_fft(self, V, inverse):
        axes = tuple(range(len(self.grid_shape)))
        W = V.reshape(self.grid_shape + V.shape[1:])
        W = np.fft.ifftn(W, axes=axes) if inverse else np.fft.fftn(W, axes=axes)
        return W.reshape(V.shape)

    def _blocks(self, v):
        v = np.asarray(v)
        if v.shape[0] != self.order:
            raise ValueError(f"vector length {v.shape[0]} does not match preconditioner order {self.order}")
        return v.reshape((self.n_space, self.M) + v.shape[1:])

    def apply_inverse(self, v):
        """``P^{-1} v`` via FFT, block bidiagonal solves and inverse FFT.

        The unnormalised ``ifft``/``fft`` pair equals ``F* (x) I`` followed by
        ``F (x) I``; the ``sqrt(n)`` factors cancel.
        """
        real_input = not np.iscomplexobj(v)
        V = self._blocks(v)
        W = self._spatial_fft(V, inverse=True)
        W = block_solve(self.scale * self.eigenvalues, self.theta, self.M, W)
        X = self._spatial_fft(W, inverse=False)
        if real_input:
            residue = np.abs(X.imag).max(initial=0.0)
            if residue > IMAG_TOL * max(1.0, np.abs(X.real).max(initial=0.0)):
                raise ArithmeticError(f"imaginary residue {residue:.3e} in a real preconditioner solve")
            X = X.real
        return X.reshape(np.shape(v))

    __call__ = apply_inverse

    def matvec(self, v):
        """``P v`` (forward product, used for consistency checks)."""
        real_input = not np.iscomplexobj(v)
        V = self._blocks(v)
        W = self._spatial_fft(V, inverse=True)
        lam = (self.scale * self.eigenvalues).reshape((-1,) + (1,) * (W.ndim - 1))
        W = lam * W + self.time.apply_q(W)
        X = self._spatial_fft(W, inverse=False)
        return (X.real if real_input else X).reshape(np.shape(v))

    def space_dense(self):
        """Dense ``scale * C`` (1D) or ``scale * (gamma1 C1 (x) I + I (x) gamma2 C2)`` (2D)."""
        if len(self.grid_shape) == 1:
            return self.scale * self.gammas[0] * scipy.linalg.circulant(self.columns[0])
        (N1, N2), (g1, g2) = self.grid_shape, self.gammas
        C1 = scipy.linalg.circulant(self.columns[0])
        C2 = scipy.linalg.circulant(self.columns[1])
        return self.scale * (g1 * np.kron(C1, np.eye(N2)) + g2 * np.kron(np.eye(N1), C2))

    def kron_factors(self):
        return self.space_dense(), self.time.q_dense()

    def dense(self, cap=None):
        check_dense_order(self.order, cap)
        S, Q = self.kron_factors()
        return np.kron(S, np.eye(self.M)) + np.kron(np.eye(self.n_space), Q)

    def block(self, j):
        """Dense ``D_j = s lambda_j I + Q``."""
        return self.scale * self.eigenvalues[j] * np.eye(self.M) + self.time.q_dense()

    def fourier_basis(self):
        """Dense ``U = F_n (x) I_M`` with ``F_n`` the (Kronecker) Fourier matrix."""
        F = fourier_matrix(self.grid_shape[0])
        for n in self.grid_shape[1:]:
            F = np.kron(F, fourier_matrix(n))
        return np.kron(F, np.eye(self.M))


def build_preconditioner_1d(kind, alpha, N, M, theta, gamma, a_sampling):
    """Preconditioner ``gamma d C (x) I_M + I_N (x) Q`` with ``d`` the mean of ``a_sampling``."""
    if N < 2 or M < 2:
        raise ValueError("N and M must be at least 2")
    column = circulant_column(kind, alpha, N)
    d = mean_coefficient(a_sampling)
    return CirculantPreconditioner(
        kind=kind, grid_shape=(int(N),), eigenvalues=circulant_eigenvalues(column),
        scale=gamma * d, theta=float(theta), M=int(M), mean=d, columns=(column,), gammas=(1.0,))


def build_preconditioner_2d(kind, alpha1, alpha2, N1, N2, M, theta, gamma1, gamma2, a_sampling):
    """Preconditioner ``d (gamma1 C1 (x) I + I (x) gamma2 C2) (x) I_M + I (x) Q``."""
    if min(N1, N2, M) < 2:
        raise ValueError("N1, N2 and M must be at least 2")
    c1 = circulant_column(kind, alpha1, N1)
    c2 = circulant_column(kind, alpha2, N2)
    lam = (gamma1 * circulant_eigenvalues(c1)[:, None] + gamma2 * circulant_eigenvalues(c2)[None, :]).ravel()
    d = mean_coefficient(a_sampling)
    return CirculantPreconditioner(
        kind=kind, grid_shape=(int(N1), int(N2)), eigenvalues=lam, scale=d, theta=float(theta),
        M=int(M), mean=d, columns=(c1, c2), gammas=(float(gamma1), float(gamma2)))


def apply_inverse(P, v):
    return P.apply_inverse(v)


def preconditioner_for(system, kind):
    """Build the preconditioner of ``kind`` matching an :class:`AllAtOnceSystem`."""
    space = system.space
    if space.ndim == 1:
        return build_preconditioner_1d(kind, space.alpha, space.N, system.M, system.time.theta,
                                       space.gamma, space.coefficient)
    return build_preconditioner_2d(kind, *space.alphas, space.N1, space.N2, system.M,
                                   system.time.theta, *space.gammas, space.coefficient)
