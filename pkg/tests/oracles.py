"""Independent reference computations used by the tests.

Nothing here calls the package's integrator, so agreement is a genuine
cross-check.
"""

import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

TRUNCATION = 32


def mathieu_a_even(q, size=TRUNCATION):
    """a_0, a_2, a_4, ... for y'' + (a - 2q cos 2x) y = 0 (pi-periodic, even).

    Cosine series sum A_2r cos(2rx); the first coupling carries sqrt(2) after
    symmetrising the recurrence.
    """
    diag = (2.0 * np.arange(size)) ** 2
    off = np.full(size - 1, q)
    off[0] = math.sqrt(2.0) * q
    return eigh_tridiagonal(diag, off, eigvals_only=True)


def mathieu_a_odd(q, size=TRUNCATION):
    """a_1, a_3, ...: series sum A_{2r+1} cos((2r+1)x)."""
    diag = (2.0 * np.arange(size) + 1.0) ** 2
    diag[0] += q
    return eigh_tridiagonal(diag, np.full(size - 1, q), eigvals_only=True)


def mathieu_b_odd(q, size=TRUNCATION):
    """b_1, b_3, ...: series sum B_{2r+1} sin((2r+1)x)."""
    diag = (2.0 * np.arange(size) + 1.0) ** 2
    diag[0] -= q
    return eigh_tridiagonal(diag, np.full(size - 1, q), eigvals_only=True)


def mathieu_b_even(q, size=TRUNCATION):
    """b_2, b_4, ...: series sum B_{2r+2} sin((2r+2)x)."""
    diag = (2.0 * np.arange(size) + 2.0) ** 2
    return eigh_tridiagonal(diag, np.full(size - 1, q), eigvals_only=True)


def cos_mode0_edges():
    """Edges of the first two bands of -v'' + cos(z)^2 v = lambda v.

    cos^2 z = 1/2 + 1/2 cos 2z turns the equation into Mathieu's with
    a = lambda - 1/2 and q = 1/4, so every edge is a characteristic value
    shifted by 1/2.  Returns (a0, b1, a1, b2) + 1/2, in increasing order for
    small positive q.
    """
    q = 0.25
    return (mathieu_a_even(q)[0] + 0.5, mathieu_b_odd(q)[0] + 0.5,
            mathieu_a_odd(q)[0] + 0.5, mathieu_b_even(q)[0] + 0.5)


def constant_transfer(k, length):
    """Exact transfer matrix of v'' = k v over ``length`` as (t00, t01, t10, t11)."""
    if k > 0:
        w = math.sqrt(k)
        c, s = math.cosh(w * length), math.sinh(w * length)
        return c, s / w, w * s, c
    if k < 0:
        w = math.sqrt(-k)
        c, s = math.cos(w * length), math.sin(w * length)
        return c, s / w, -w * s, c
    return 1.0, length, 0.0, 1.0


def constant_discriminant(k, period):
    """gamma for the constant coefficient Q = k over one period."""
    t = constant_transfer(k, period)
    return 0.5 * (t[0] + t[3])


def log_linear_rate(z, y):
    """Plain least-squares rate r in |y| = C exp(-r z)."""
    return -np.polyfit(z, np.log(np.abs(y)), 1)[0]
