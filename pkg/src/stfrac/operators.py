"""Space, time and all-at-once operators of the theta-method/Grünwald scheme.

Vectors of the all-at-once system are stored space-major, time-minor: entry
``i*M + m`` is the unknown at space index ``i`` and time level ``m + 1``.
Internally every operator works on arrays shaped ``(n_space, M, ...)`` so
that trailing axes can carry a batch of right-hand sides.
"""

import os

import numpy as np

from .grunwald import check_alpha, coefficients

DEFAULT_DENSE_CAP = 8192


def dense_cap():
    """Largest order allowed for dense assembly (``STFRAC_DENSE_CAP`` overrides)."""
    return int(os.environ.get("STFRAC_DENSE_CAP", DEFAULT_DENSE_CAP))


class DenseCapExceeded(ValueError):
    pass


def check_dense_order(order, cap=None):
    cap = dense_cap() if cap is None else cap
    if order > cap:
        raise DenseCapExceeded(f"dense order {order} exceeds the cap {cap}")


def gamma_ratio(delta_t, delta_x, alpha):
    """``delta_t / delta_x**alpha``."""
    if delta_t <= 0 or delta_x <= 0:
        raise ValueError("step sizes must be positive")
    return delta_t / delta_x**alpha


def _next_pow2(n):
    return 1 << (int(n) - 1).bit_length()


def toeplitz_matvec(first_column, first_row, v):
    """Multiply a Toeplitz matrix by ``v`` with an FFT circulant embedding.

    The embedding has length ``2N`` rounded up to a power of two; the gap
    between the column and the wrapped row is zero-filled. ``v`` may carry
    extra trailing axes, which are treated as a batch.
    """
    c = np.asarray(first_column)
    r = np.asarray(first_row)
    v = np.asarray(v)
    n = len(c)
    if len(r) != n:
        raise ValueError("first column and first row must have equal length")
    if v.shape[0] != n:
        raise ValueError(f"vector length {v.shape[0]} does not match order {n}")
    if c[0] != r[0]:
        raise ValueError("first column and first row disagree at entry (0, 0)")
    size = _next_pow2(2 * n)
    emb = np.zeros(size, dtype=np.result_type(c, r))
    emb[:n] = c
    if n > 1:
        emb[size - n + 1:] = r[:0:-1]
    shape = (size,) + (1,) * (v.ndim - 1)
    if np.iscomplexobj(emb) or np.iscomplexobj(v):
        out = np.fft.ifft(np.fft.fft(emb).reshape(shape) * np.fft.fft(v, n=size, axis=0), axis=0)
    else:
        out = np.fft.irfft(np.fft.rfft(emb).reshape((size // 2 + 1,) + shape[1:])
                           * np.fft.rfft(v, n=size, axis=0), n=size, axis=0)
    return out[:n]


class HessenbergToeplitz:
    """Lower-Hessenberg Toeplitz matrix ``[g_{i-j+1}]`` built from one Grünwald table.

    Only ``g_0 .. g_N`` are kept: the first column is ``g_1 .. g_N`` and the
    single superdiagonal holds ``g_0``.
    """

    def __init__(self, alpha, order):
        order = int(order)
        if order < 1:
            raise ValueError("order must be positive")
        self.alpha = check_alpha(alpha)
        self.order = order
        self.table = coefficients(self.alpha, order + 1)
        self.first_column = self.table.coeffs[1:]
        self.superdiagonal = self.table.coeffs[0]
        self.first_row = np.zeros(order)
        self.first_row[0] = self.first_column[0]
        if order > 1:
            self.first_row[1] = self.superdiagonal

    @property
    def shape(self):
        return (self.order, self.order)

    def matvec(self, v):
        """Apply along axis 0 of ``v``."""
        return toeplitz_matvec(self.first_column, self.first_row, v)

    def rmatvec(self, v):
        return toeplitz_matvec(self.first_row, self.first_column, v)

    def dense(self):
        n = self.order
        i, j = np.indices((n, n))
        k = i - j + 1
        out = np.zeros((n, n))
        mask = k >= 0
        out[mask] = self.table.coeffs[k[mask]]
        return out


def sample_coefficient_1d(a, N, interval=(0.0, 1.0)):
    """``a(x_i)`` at the interior nodes ``x_i = a1 + i*dx``, ``i = 1..N``."""
    a1, b1 = interval
    x = a1 + (b1 - a1) * np.arange(1, N + 1) / (N + 1)
    return _evaluate(a, x), x


def sample_coefficient_2d(a, N1, N2, rectangle=((0.0, 1.0), (0.0, 1.0))):
    """Lexicographic samples ``a(x1_{i1}, x2_{i2})`` with ``i2`` running fastest."""
    (a1, b1), (a2, b2) = rectangle
    x1 = a1 + (b1 - a1) * np.arange(1, N1 + 1) / (N1 + 1)
    x2 = a2 + (b2 - a2) * np.arange(1, N2 + 1) / (N2 + 1)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    return _evaluate(a, X1, X2).ravel(), (x1, x2)


def _evaluate(a, *coords):
    if a is None:
        return np.ones_like(coords[0])
    if np.isscalar(a):
        return np.full_like(coords[0], float(a))
    return np.broadcast_to(np.asarray(a(*coords), dtype=float), coords[0].shape).copy()


class SpaceOperator1D:
    """``gamma * diag(a(x_i)) * Gbar_{alpha,N}``, applied matrix-free."""

    ndim = 1

    def __init__(self, alpha, N, coefficient, gamma):
        if gamma < 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        coefficient = np.asarray(coefficient, dtype=float)
        if coefficient.shape != (N,):
            raise ValueError(f"coefficient sampling has shape {coefficient.shape}, expected ({N},)")
        self.gbar = HessenbergToeplitz(alpha, N)
        self.alpha = self.gbar.alpha
        self.N = int(N)
        self.coefficient = coefficient
        self.gamma = float(gamma)

    @property
    def order(self):
        return self.N

    @property
    def grid_shape(self):
        return (self.N,)

    def matvec(self, v):
        v = np.asarray(v)
        scale = (self.gamma * self.coefficient).reshape((-1,) + (1,) * (v.ndim - 1))
        return scale * self.gbar.matvec(v)

    def dense(self):
        return self.gamma * self.coefficient[:, None] * self.gbar.dense()


def build_space_1d(alpha, N, a_sampler=None, gamma=1.0, interval=(0.0, 1.0)):
    """Space operator of a 1D problem; ``a_sampler`` is a callable, a constant or ``None`` (a = 1)."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    values, _ = sample_coefficient_1d(a_sampler, N, interval)
    return SpaceOperator1D(alpha, N, values, gamma)


class SpaceOperator2D:
    """``diag(a) (gamma1 Gbar_1 (x) I + I (x) gamma2 Gbar_2)`` on lexicographic grids."""

    ndim = 2

    def __init__(self, alpha1, alpha2, N1, N2, gamma1, gamma2, coefficient=None):
        if gamma1 < 0 or gamma2 < 0:
            raise ValueError("gamma1 and gamma2 must be nonnegative")
        self.gbar1 = HessenbergToeplitz(alpha1, N1)
        self.gbar2 = HessenbergToeplitz(alpha2, N2)
        self.alphas = (self.gbar1.alpha, self.gbar2.alpha)
        self.N1, self.N2 = int(N1), int(N2)
        self.gammas = (float(gamma1), float(gamma2))
        if coefficient is None:
            coefficient = np.ones(self.N1 * self.N2)
        coefficient = np.asarray(coefficient, dtype=float)
        if coefficient.shape != (self.N1 * self.N2,):
            raise ValueError(f"coefficient sampling must have length {self.N1 * self.N2}")
        self.coefficient = coefficient

    @property
    def order(self):
        return self.N1 * self.N2

    @property
    def grid_shape(self):
        return (self.N1, self.N2)

    def matvec(self, v):
        v = np.asarray(v)
        rest = v.shape[1:]
        w = v.reshape((self.N1, self.N2) + rest)
        g1, g2 = self.gammas
        out = g1 * self.gbar1.matvec(w)
        out = out + g2 * np.moveaxis(self.gbar2.matvec(np.moveaxis(w, 1, 0)), 0, 1)
        out = out.reshape(v.shape)
        return self.coefficient.reshape((-1,) + (1,) * len(rest)) * out

    def dense(self):
        g1, g2 = self.gammas
        U = (g1 * np.kron(self.gbar1.dense(), np.eye(self.N2))
             + g2 * np.kron(np.eye(self.N1), self.gbar2.dense()))
        return self.coefficient[:, None] * U


def build_U_2d(alpha1, alpha2, N1, N2, gamma1=1.0, gamma2=1.0, coefficient=None):
    """Two-level Kronecker-sum space operator (unit diagonal sampling unless given)."""
    if N1 < 2 or N2 < 2:
        raise ValueError("N1 and N2 must be at least 2")
    return SpaceOperator2D(alpha1, alpha2, N1, N2, gamma1, gamma2, coefficient)


class TimeOperators:
    """Bidiagonal time matrices of the theta-method and ``Q = H_theta^{-1} H``.

    ``H`` has unit diagonal and ``-1`` below it. ``H_theta`` has ``-theta``
    on the diagonal and ``-(1 - theta)`` below it. All applications act on the
    time axis (axis 1) of arrays shaped ``(n_space, M, ...)``.
    """

    def __init__(self, theta, M):
        theta = float(theta)
        if not 0.0 < theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1]; theta = 0 makes H_theta singular (got {theta})")
        if M < 1:
            raise ValueError("M must be positive")
        self.theta = theta
        self.M = int(M)

    def h_dense(self):
        return np.eye(self.M) - np.eye(self.M, k=-1)

    def h_theta_dense(self):
        return -(self.theta * np.eye(self.M) + (1.0 - self.theta) * np.eye(self.M, k=-1))

    def q_dense(self):
        return self.solve_h_theta(self.h_dense()[None])[0]

    def q_first_column(self):
        m = np.arange(1, self.M)
        col = np.empty(self.M)
        col[0] = -1.0 / self.theta
        col[1:] = (self.theta - 1.0) ** (m - 1) / self.theta ** (m + 1)
        return col

    def apply_h(self, v):
        out = np.array(v, copy=True)
        out[:, 1:] -= v[:, :-1]
        return out

    def apply_h_theta(self, v):
        out = -self.theta * v
        out[:, 1:] -= (1.0 - self.theta) * v[:, :-1]
        return out

    def solve_h_theta(self, b):
        b = np.asarray(b)
        x = np.empty_like(b, dtype=np.result_type(b, float))
        x[:, 0] = -b[:, 0] / self.theta
        c = 1.0 - self.theta
        for m in range(1, b.shape[1]):
            x[:, m] = -(b[:, m] + c * x[:, m - 1]) / self.theta
        return x

    def apply_q(self, v):
        return self.solve_h_theta(self.apply_h(v))


def build_time_q(theta, M):
    return TimeOperators(theta, M)


class AllAtOnceSystem:
    """``A = G (x) I_M + I_n (x) Q_{theta,M}`` for a 1D or 2D space operator ``G``."""

    def __init__(self, space, time):
        self.space = space
        self.time = time

    @property
    def M(self):
        return self.time.M

    @property
    def n_space(self):
        return self.space.order

    @property
    def order(self):
        return self.space.order * self.time.M

    @property
    def shape(self):
        return (self.order, self.order)

    @property
    def dtype(self):
        return np.dtype(float)

    def _blocks(self, v):
        v = np.asarray(v)
        if v.shape[0] != self.order:
            raise ValueError(f"vector length {v.shape[0]} does not match system order {self.order}")
        return v.reshape((self.n_space, self.M) + v.shape[1:])

    def matvec(self, v):
        V = self._blocks(v)
        out = self.space.matvec(V) + self.time.apply_q(V)
        return out.reshape(np.shape(v))

    __call__ = matvec

    def __matmul__(self, v):
        return self.matvec(v)

    def kron_factors(self):
        """Dense ``(G, Q)`` with ``A = G (x) I + I (x) Q``."""
        return self.space.dense(), self.time.q_dense()

    def dense(self, cap=None):
        return assemble_dense(self, cap)


def aao_matvec(system, v):
    return system.matvec(v)


def assemble_dense(system, cap=None):
    """Dense realization of an all-at-once system; refuses orders above the cap."""
    check_dense_order(system.order, cap)
    G, Q = system.kron_factors()
    return np.kron(G, np.eye(system.M)) + np.kron(np.eye(system.n_space), Q)
