"""GLT symbols of the space, time, space-time and preconditioned sequences.

All functions broadcast over numpy arrays. Coefficient values ``a`` are
always given on the reference cube ``[0, 1]^d``; see :func:`rescale_coefficient`
for problems posed on other intervals.
"""

import itertools

import numpy as np

POLE_TOL = 1e-14


class SymbolPoleError(ZeroDivisionError):
    pass


def f_alpha(alpha, xi):
    """``exp(-i xi) (1 + exp(i(xi + pi)))**alpha`` on the principal branch."""
    xi = np.asarray(xi, dtype=float)
    base = 1.0 + np.exp(1j * (xi + np.pi))
    # base lies in the closed right half-plane, so the principal power is continuous there
    with np.errstate(divide="ignore", invalid="ignore"):
        power = np.where(base == 0, 0.0, np.exp(alpha * np.log(np.where(base == 0, 1.0, base))))
    out = np.exp(-1j * xi) * power
    return out[()] if out.ndim == 0 else out


def q_theta(theta, xi):
    """``(1 - e^{i xi}) / (theta + (1 - theta) e^{i xi})``."""
    z = np.exp(1j * np.asarray(xi, dtype=float))
    den = theta + (1.0 - theta) * z
    if np.any(np.abs(den) < POLE_TOL):
        raise SymbolPoleError(f"q_theta has a pole at theta={theta}, xi=+-pi")
    out = (1.0 - z) / den
    return out[()] if out.ndim == 0 else out


def spacetime_symbol_1d(gamma_star, a_value, alpha, theta, x=None, xi1=0.0, xi3=0.0):
    """``gamma* a(x) f_alpha(xi1) + q_theta(xi3)``.

    ``a_value`` is either a number/array of samples or a callable evaluated at ``x``.
    """
    if gamma_star < 0:
        raise ValueError("gamma_star must be nonnegative")
    a = a_value(x) if callable(a_value) else a_value
    return gamma_star * np.asarray(a) * f_alpha(alpha, xi1) + q_theta(theta, xi3)


def spacetime_symbol_2d(gamma1_star, gamma2_star, a_value, alpha1, alpha2, theta,
                        x1=None, x2=None, xi1=0.0, xi2=0.0, xi3=0.0):
    """``a(x1, x2) (gamma1* f_alpha1(xi1) + gamma2* f_alpha2(xi2)) + q_theta(xi3)``."""
    if gamma1_star < 0 or gamma2_star < 0:
        raise ValueError("gamma stars must be nonnegative")
    a = a_value(x1, x2) if callable(a_value) else a_value
    space = gamma1_star * f_alpha(alpha1, xi1) + gamma2_star * f_alpha(alpha2, xi2)
    return np.asarray(a) * space + q_theta(theta, xi3)


def _ratio(num, den):
    den = np.asarray(den)
    if np.any(np.abs(den) < POLE_TOL):
        raise SymbolPoleError("preconditioned symbol has a vanishing denominator")
    return num / den


def precond_ratio_symbol_1d(gamma_star, a_value, d_hat, alpha, theta, x=None, xi1=0.0, xi3=0.0):
    """Symbol of ``P^{-1} A`` in 1D: the space-time symbol over its ``a = d_hat`` version."""
    num = spacetime_symbol_1d(gamma_star, a_value, alpha, theta, x, xi1, xi3)
    den = spacetime_symbol_1d(gamma_star, d_hat, alpha, theta, x, xi1, xi3)
    return _ratio(num, den)


def precond_ratio_symbol_2d(gamma1_star, gamma2_star, a_value, d_hat, alpha1, alpha2, theta,
                            x1=None, x2=None, xi1=0.0, xi2=0.0, xi3=0.0):
    num = spacetime_symbol_2d(gamma1_star, gamma2_star, a_value, alpha1, alpha2, theta,
                              x1, x2, xi1, xi2, xi3)
    den = spacetime_symbol_2d(gamma1_star, gamma2_star, d_hat, alpha1, alpha2, theta,
                              x1, x2, xi1, xi2, xi3)
    return _ratio(num, den)


def rescale_coefficient(a, interval):
    """Pull ``a`` defined on ``[a1, b1]`` back to ``[0, 1]``."""
    a1, b1 = interval
    return lambda xhat: a(a1 + (b1 - a1) * np.asarray(xhat))


def space_grid(n):
    """``j/n`` for ``j = 1..n``."""
    return np.arange(1, n + 1) / n


def frequency_grid(n):
    """``-pi + 2 pi j/n`` for ``j = 1..n`` (the half-open interval ``(-pi, pi]``)."""
    return -np.pi + 2.0 * np.pi * np.arange(1, n + 1) / n


def sample_symbol_cloud(symbol, sizes, kinds=None):
    """Evaluate ``symbol`` on an equispaced tensor grid.

    ``sizes`` gives the number of samples per variable and ``kinds`` whether
    each variable is a space variable (``"x"``) or a frequency (``"xi"``);
    by default every variable is a frequency. The symbol is called with one
    array per variable and the result is flattened in lexicographic order.
    """
    sizes = [int(s) for s in sizes]
    if any(s < 1 for s in sizes):
        raise ValueError("grid sizes must be positive")
    kinds = ["xi"] * len(sizes) if kinds is None else list(kinds)
    if len(kinds) != len(sizes):
        raise ValueError("kinds and sizes differ in length")
    axes = []
    for n, kind in zip(sizes, kinds):
        if kind == "x":
            axes.append(space_grid(n))
        elif kind == "xi":
            axes.append(frequency_grid(n))
        else:
            raise ValueError(f"unknown variable kind {kind!r}")
    mesh = np.meshgrid(*axes, indexing="ij")
    values = np.broadcast_to(symbol(*mesh), mesh[0].shape)
    return np.asarray(values, dtype=complex).ravel()


def grid_points(sizes, kinds):
    """Coordinates matching :func:`sample_symbol_cloud`, one column per variable."""
    axes = [space_grid(n) if k == "x" else frequency_grid(n) for n, k in zip(sizes, kinds)]
    return np.array(list(itertools.product(*axes))).reshape(-1, len(sizes))
