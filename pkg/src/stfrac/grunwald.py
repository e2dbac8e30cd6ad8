"""Shifted Grünwald coefficients g_k for fractional orders 1 < alpha < 2."""

from dataclasses import dataclass

import numpy as np


def check_alpha(alpha):
    """Return ``alpha`` as a float, raising ``ValueError`` unless 1 < alpha < 2."""
    alpha = float(alpha)
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"fractional order must lie in the open interval (1, 2), got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class GrunwaldTable:
    """Coefficients ``g_0 .. g_K`` of the shifted Grünwald formula.

    ``coeffs`` is a read-only float64 array. ``g_0 = 1``, ``g_1 = -alpha``,
    every later entry is positive and strictly decreasing, and every partial
    sum from ``n = 1`` on is negative.
    """

    alpha: float
    coeffs: np.ndarray

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def partial_sums(self):
        return np.cumsum(self.coeffs)


def coefficients(alpha, count):
    """Compute ``g_0 .. g_{count-1}`` by the recurrence
    ``g_{k+1} = (1 - (alpha + 1)/(k + 1)) g_k``.
    """
    alpha = check_alpha(alpha)
    count = int(count)
    if count < 2:
        raise ValueError(f"need at least two coefficients, got count={count}")
    k = np.arange(1, count, dtype=float)
    factors = np.empty(count)
    factors[0] = 1.0
    # (k - 1 - alpha)/k equals 1 - (alpha + 1)/k but keeps the sign of
    # 1 - alpha exactly when alpha is within rounding of 1
    factors[1:] = (k - 1.0 - alpha) / k
    g = np.cumprod(factors)
    g.flags.writeable = False
    return GrunwaldTable(alpha, g)


def coefficient_closed_form(alpha, k):
    """``(-1)^k * binom(alpha, k)`` evaluated as a running product.

    This is the reference for :func:`coefficients` in the test-suite. It
    multiplies numerator and denominator factors pairwise so that large ``k``
    does not overflow.
    """
    alpha = check_alpha(alpha)
    k = int(k)
    if k < 0:
        raise ValueError("k must be nonnegative")
    value = 1.0
    for j in range(k):
        value *= (alpha - j) / (j + 1)
    return -value if k % 2 else value


def absolute_sum(table):
    """Sum of ``|g_k|`` over the table; tends to ``2*alpha`` from below."""
    if len(table) < 2:
        raise ValueError("table must hold at least two coefficients")
    return float(np.abs(table.coeffs).sum())
