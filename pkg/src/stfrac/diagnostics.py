"""Spectral instrumentation: dense spectra, 2-norm condition numbers,
clustering metrics and symbol-versus-spectrum comparisons.

Everything here is desk scale. Dense routines refuse orders above the dense
cap. :class:`KroneckerSum` is the one exception. It estimates extreme singular
values of ``K2^{-1} K1`` for Kronecker-sum matrices ``S (x) I + I (x) T``
through Sylvester solves, which keeps condition numbers of order 4096-8192
systems within seconds.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .operators import check_dense_order

SINGULAR_RTOL = 1e-30
DENSE_SVD_LIMIT = 1024
_NN_CHUNK = 512


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    order: int
    source: str = ""

    def __post_init__(self):
        if len(self.eigenvalues) != self.order:
            raise ValueError("eigenvalue count does not match the matrix order")

    def __len__(self):
        return self.order


def dense_eigenvalues(matrix, source="", cap=None):
    """All eigenvalues of a dense matrix (LAPACK Hessenberg reduction + shifted QR)."""
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    check_dense_order(A.shape[0], cap)
    try:
        lam = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"QR iteration did not converge: {exc}") from exc
    return SpectrumReport(np.asarray(lam, dtype=complex), A.shape[0], source)


def _cond_from_sigma(smax, smin):
    if not np.isfinite(smax) or smin <= SINGULAR_RTOL * max(smax, 1.0):
        raise np.linalg.LinAlgError(f"matrix is numerically singular (sigma_min = {smin:.3e})")
    return float(smax / smin)


def condition_number_2(matrix, cap=None):
    """``sigma_max / sigma_min`` from the singular values of a dense matrix."""
    A = np.asarray(matrix)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    check_dense_order(A.shape[0], cap)
    s = np.linalg.svd(A, compute_uv=False)
    return _cond_from_sigma(s[0], s[-1])


class KroneckerSum:
    """``K = S (x) I_m + I_n (x) T`` acting on space-major vectors.

    A vector ``v`` of length ``n*m`` is viewed as the ``n x m`` matrix ``X``
    with ``v[i*m + j] = X[i, j]``. Then ``K v`` is ``S X + X T^T``, and
    solving with ``K`` is a Sylvester equation. It is reduced once to
    triangular form by complex Schur factorizations and then solved with
    LAPACK ``trsyl``.
    """

    def __init__(self, S, T):
        self.S = np.asarray(S)
        self.T = np.asarray(T)
        self.n, self.m = self.S.shape[0], self.T.shape[0]
        self._schur = {}

    @property
    def order(self):
        return self.n * self.m

    def _mat(self, v):
        return np.asarray(v).reshape(self.n, self.m)

    def matvec(self, v):
        X = self._mat(v)
        return (self.S @ X + X @ self.T.T).ravel()

    def rmatvec(self, v):
        # conjugate transpose; S and T are real in every use here
        X = self._mat(v)
        return (self.S.conj().T @ X + X @ self.T.conj()).ravel()

    def _factors(self, adjoint):
        if adjoint not in self._schur:
            S, Tt = (self.S.conj().T, self.T.conj()) if adjoint else (self.S, self.T.T)
            R, U = scipy.linalg.schur(S.astype(complex), output="complex")
            W, V = scipy.linalg.schur(Tt.astype(complex), output="complex")
            self._schur[adjoint] = (R, U, W, V)
        return self._schur[adjoint]

    def solve(self, v, adjoint=False):
        """``K^{-1} v`` (or ``K^{-H} v`` when ``adjoint``)."""
        R, U, W, V = self._factors(adjoint)
        C = U.conj().T @ self._mat(v) @ V
        Y, scale, info = scipy.linalg.lapack.ztrsyl(R, W, C)
        if info < 0:
            raise ValueError(f"trsyl argument error {info}")
        X = U @ (Y / scale) @ V.conj().T
        return X.ravel()

    def dense(self):
        return np.kron(self.S, np.eye(self.m)) + np.kron(np.eye(self.n), self.T)


def _extreme_sigma(matvec, rmatvec, order, tol):
    op = spla.LinearOperator((order, order), matvec=matvec, rmatvec=rmatvec, dtype=complex)
    v0 = np.ones(order, dtype=complex) / np.sqrt(order)
    s = spla.svds(op, k=1, which="LM", tol=tol, v0=v0, return_singular_vectors=False, solver="arpack")
    return float(s[0])


def structured_condition_number(K1, K2=None, tol=1e-10):
    """2-norm condition number of ``K2^{-1} K1`` for Kronecker sums.

    ``sigma_max`` comes from ARPACK on the operator and ``1/sigma_min`` from
    ARPACK on its inverse ``K1^{-1} K2``. ``K2 = None`` means the identity.
    """
    n = K1.order
    if K2 is None:
        fwd, fwd_h = K1.matvec, K1.rmatvec
        inv = K1.solve

        def inv_h(v):
            return K1.solve(v, adjoint=True)
    else:
        def fwd(v):
            return K2.solve(K1.matvec(v))

        def fwd_h(v):
            return K1.rmatvec(K2.solve(v, adjoint=True))

        def inv(v):
            return K1.solve(K2.matvec(v))

        def inv_h(v):
            return K2.rmatvec(K1.solve(v, adjoint=True))
    smax = _extreme_sigma(fwd, fwd_h, n, tol)
    inv_norm = _extreme_sigma(inv, inv_h, n, tol)
    return _cond_from_sigma(smax, 1.0 / inv_norm)


@dataclass
class ClusterMetric:
    center: object
    epsilon: float
    inside_fraction: float
    outlier_count: int
    order: int


def _nearest_distances(points, cloud):
    """Distance from every point to its nearest cloud member (chunked brute force)."""
    points = np.asarray(points, dtype=complex).ravel()
    cloud = np.asarray(cloud, dtype=complex).ravel()
    dist = np.empty(points.size)
    idx = np.empty(points.size, dtype=int)
    for start in range(0, points.size, _NN_CHUNK):
        block = np.abs(points[start:start + _NN_CHUNK, None] - cloud[None, :])
        idx[start:start + _NN_CHUNK] = block.argmin(axis=1)
        dist[start:start + _NN_CHUNK] = block.min(axis=1)
    return dist, idx


def _values(spectrum):
    return spectrum.eigenvalues if isinstance(spectrum, SpectrumReport) else np.asarray(spectrum)


def cluster_fraction(spectrum, center=1.0, epsilon=0.1):
    """Fraction of eigenvalues strictly within ``epsilon`` of ``center``.

    ``center`` is a point or an array of points (a sampled cloud), in which
    case distance is taken to the nearest point of the cloud.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lam = np.asarray(_values(spectrum), dtype=complex).ravel()
    if np.ndim(center) == 0:
        dist = np.abs(lam - center)
    else:
        dist, _ = _nearest_distances(lam, center)
    outliers = int(np.count_nonzero(dist >= epsilon))
    order = lam.size
    frac = 1.0 - outliers / order if order else 1.0
    return ClusterMetric(center, float(epsilon), frac, outliers, order)


@dataclass
class CloudComparison:
    """Summary of a spectrum-versus-symbol comparison.

    ``pairs`` holds ``(eigenvalue, nearest symbol sample)`` rows for plotting.
    """

    mean_nn_distance: float
    max_nn_distance: float
    max_sorted_modulus_gap: float
    pairs: np.ndarray = field(repr=False)

    def csv_rows(self):
        for lam, s in self.pairs:
            yield (lam.real, lam.imag, s.real, s.imag)


def _matched_sorted(a, n):
    """Sorted ``a`` resampled to ``n`` points at matching quantiles."""
    a = np.sort(a)
    if a.size == n:
        return a
    q = (np.arange(n) + 0.5) / n
    return np.interp(q, (np.arange(a.size) + 0.5) / a.size, a)


def symbol_spectrum_compare(spectrum, symbol_cloud):
    """Compare an eigenvalue multiset with a sampled symbol cloud.

    Two metrics: the mean (and max) distance from each eigenvalue to the
    nearest cloud point, and the largest gap between the sorted moduli of
    both sets after matching lengths by quantile.
    """
    lam = np.asarray(_values(spectrum), dtype=complex).ravel()
    cloud = np.asarray(symbol_cloud, dtype=complex).ravel()
    if lam.size == 0 or cloud.size == 0:
        raise ValueError("both point sets must be nonempty")
    dist, idx = _nearest_distances(lam, cloud)
    n = max(lam.size, cloud.size)
    gap = np.abs(_matched_sorted(np.abs(lam), n) - _matched_sorted(np.abs(cloud), n)).max()
    pairs = np.column_stack([lam, cloud[idx]])
    return CloudComparison(float(dist.mean()), float(dist.max()), float(gap), pairs)


def singular_value_distribution_check(matrix, symbol, sizes, kinds=("x", "xi"), cap=None):
    """Mean relative discrepancy between singular values and ``|symbol|`` samples.

    The symbol is sampled on the tensor grid ``sizes`` (kinds as in
    :func:`stfrac.symbols.sample_symbol_cloud`). Its sorted moduli are
    averaged in consecutive blocks so that there is one value per singular
    value, and the result is ``||sigma - s||_1 / ||s||_1`` (0 when both vanish).
    """
    from .symbols import sample_symbol_cloud

    A = np.asarray(matrix)
    check_dense_order(A.shape[0], cap)
    sigma = np.sort(np.linalg.svd(A, compute_uv=False))
    samples = np.sort(np.abs(sample_symbol_cloud(symbol, sizes, kinds)))
    n = sigma.size
    if samples.size % n == 0:
        s = samples.reshape(n, -1).mean(axis=1)
    else:
        s = _matched_sorted(samples, n)
    denom = np.abs(s).sum()
    diff = np.abs(sigma - s).sum()
    if denom == 0:
        return 0.0 if diff == 0 else float("inf")
    return float(diff / denom)


def preconditioned_dense(system, preconditioner, cap=None):
    """Dense ``P^{-1} A`` built column by column with the fast inverse."""
    A = system.dense(cap)
    return preconditioner.apply_inverse(A)


def system_condition_number(system, preconditioner=None, dense_limit=DENSE_SVD_LIMIT, cap=None):
    """cond_2 of ``A`` or ``P^{-1} A``.

    Dense SVD up to ``dense_limit``; above it the Kronecker-sum estimator.
    """
    if system.order <= dense_limit:
        M = system.dense(cap) if preconditioner is None else preconditioned_dense(system, preconditioner, cap)
        return condition_number_2(M, cap)
    check_dense_order(system.order, cap)
    K1 = KroneckerSum(*system.kron_factors())
    K2 = None if preconditioner is None else KroneckerSum(*preconditioner.kron_factors())
    return structured_condition_number(K1, K2)
