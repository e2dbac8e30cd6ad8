import numpy as np
import pytest
import scipy.linalg

from stfrac.grunwald import coefficients
from stfrac.operators import (DenseCapExceeded, HessenbergToeplitz, TimeOperators, assemble_dense,
                              build_space_1d, check_dense_order, gamma_ratio, toeplitz_matvec)

from conftest import make_system_1d, make_system_2d


def test_gbar_structure_n4():
    G = HessenbergToeplitz(1.5, 4).dense()
    g = coefficients(1.5, 5).coeffs
    ref = scipy.linalg.toeplitz(g[1:5], np.r_[g[1], g[0], 0.0, 0.0])
    np.testing.assert_array_equal(G, ref)
    assert G[0, 1] == 1.0 and G[0, 0] == -1.5 and G[3, 0] == g[4]
    assert np.all(np.triu(G, 2) == 0)


@pytest.mark.parametrize("n", [1, 5, 16, 33])
def test_toeplitz_matvec_matches_dense(n, rng):
    c = rng.standard_normal(n)
    r = np.r_[c[0], rng.standard_normal(n - 1)]
    v = rng.standard_normal((n, 3))
    np.testing.assert_allclose(toeplitz_matvec(c, r, v), scipy.linalg.toeplitz(c, r) @ v, atol=1e-12)


def test_toeplitz_matvec_validates():
    with pytest.raises(ValueError):
        toeplitz_matvec([1.0, 2.0], [1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        toeplitz_matvec([1.0, 2.0], [3.0, 2.0], [1.0, 1.0])


def test_hessenberg_rmatvec(rng):
    op = HessenbergToeplitz(1.7, 12)
    v = rng.standard_normal(12)
    np.testing.assert_allclose(op.rmatvec(v), op.dense().T @ v, atol=1e-13)


def test_gamma_ratio():
    assert gamma_ratio(0.1, 0.5, 1.5) == pytest.approx(0.1 / 0.5**1.5)
    with pytest.raises(ValueError):
        gamma_ratio(0.0, 0.5, 1.5)


def test_space_operator_scaling():
    a = lambda x: x**2 + 1
    op = build_space_1d(1.3, 6, a, gamma=2.5)
    x = np.arange(1, 7) / 7
    ref = 2.5 * np.diag(a(x)) @ HessenbergToeplitz(1.3, 6).dense()
    np.testing.assert_allclose(op.dense(), ref, atol=1e-14)
    with pytest.raises(ValueError):
        build_space_1d(1.3, 6, a, gamma=0.0)


def test_q_first_column_closed_form():
    for theta in (0.3, 0.5, 1.0):
        t = TimeOperators(theta, 7)
        Q = np.linalg.solve(t.h_theta_dense(), t.h_dense())
        np.testing.assert_allclose(t.q_dense(), Q, atol=1e-12)
        np.testing.assert_allclose(Q[:, 0], t.q_first_column(), atol=1e-12)
        # lower triangular Toeplitz
        np.testing.assert_allclose(Q, scipy.linalg.toeplitz(Q[:, 0], np.r_[Q[0, 0], np.zeros(6)]), atol=1e-12)


def test_backward_euler_q():
    Q = TimeOperators(1.0, 3).q_dense()
    np.testing.assert_allclose(Q, [[-1, 0, 0], [1, -1, 0], [0, 1, -1]], atol=1e-15)


@pytest.mark.parametrize("theta", [0.0, -0.1, 1.5])
def test_theta_validation(theta):
    with pytest.raises(ValueError):
        TimeOperators(theta, 4)


def test_time_operators_batch(rng):
    t = TimeOperators(0.5, 5)
    V = rng.standard_normal((3, 5, 2))
    for k in range(2):
        np.testing.assert_allclose(t.apply_q(V)[..., k], V[..., k] @ t.q_dense().T, atol=1e-12)
    np.testing.assert_allclose(t.apply_h_theta(t.solve_h_theta(V)), V, atol=1e-12)


def test_kronecker_ordering_small():
    system = make_system_1d(1.5, 3, 2)
    G, Q = system.kron_factors()
    A = assemble_dense(system)
    # block (i, j) of size M is G[i, j] I + delta_ij Q
    np.testing.assert_allclose(A[0:2, 2:4], G[0, 1] * np.eye(2))
    np.testing.assert_allclose(A[2:4, 2:4], G[1, 1] * np.eye(2) + Q)


def test_2d_lexicographic_ordering():
    system = make_system_2d(1.3, 1.7, 3, 4, 2, a=lambda x1, x2: 1 + x1 + 2 * x2)
    U = system.space.dense()
    G1 = HessenbergToeplitz(1.3, 3).dense()
    G2 = HessenbergToeplitz(1.7, 4).dense()
    g1, g2 = system.space.gammas
    x1, x2 = np.arange(1, 4) / 4, np.arange(1, 5) / 5
    a = (1 + x1[:, None] + 2 * x2[None, :]).ravel()
    ref = a[:, None] * (g1 * np.kron(G1, np.eye(4)) + g2 * np.kron(np.eye(3), G2))
    np.testing.assert_allclose(U, ref, atol=1e-12)


def test_dense_cap(monkeypatch):
    with pytest.raises(DenseCapExceeded):
        check_dense_order(10, cap=9)
    monkeypatch.setenv("STFRAC_DENSE_CAP", "50")
    with pytest.raises(DenseCapExceeded):
        make_system_1d(1.5, 8, 8).dense()


def test_matvec_rejects_wrong_length():
    with pytest.raises(ValueError):
        make_system_1d(1.5, 4, 4).matvec(np.ones(15))
