"""Small dense linear-algebra helpers shared across the modules.

Determinants and solves go through LU with partial pivoting; a pivot below
dim * eps * max|entry| is treated as singular rather than silently producing
garbage. An exact Fraction determinant is provided for the rational tests.
"""

import warnings
from fractions import Fraction

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

_EPS = np.finfo(float).eps


def quiet_lu_factor(a):
    """LU factorization without the exact-singularity warning; singular
    pivots are detected and handled by the callers."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        return lu_factor(a, check_finite=False)


def pivot_threshold(a):
    """Singularity threshold for an LU pivot of the matrix ``a``."""
    return a.shape[0] * _EPS * max(np.abs(a).max(), 1e-300)


def lu_det(a):
    """Determinant via LU with partial pivoting.

    Returns (det, smallest_pivot, threshold); the caller decides whether a
    small pivot is an error and which one to raise.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j, np.inf, 0.0
    lu, piv = quiet_lu_factor(a)
    diag = np.diag(lu)
    det = complex(np.prod(diag))
    # lu_factor pivot indices encode the row swaps; each swap flips the sign
    sign = 1 - 2 * (np.sum(piv != np.arange(n)) % 2)
    return sign * det, float(np.abs(diag).min()), pivot_threshold(a)


def checked_solve(a, b, exc, message):
    """Solve a @ x = b by LU, raising ``exc(message)`` on a tiny pivot."""
    a = np.asarray(a, dtype=complex)
    lu, piv = quiet_lu_factor(a)
    if np.abs(np.diag(lu)).min() <= pivot_threshold(a):
        raise exc(message)
    return lu_solve((lu, piv), np.asarray(b, dtype=complex), check_finite=False)


def fraction_det(rows):
    """Exact determinant of a square matrix of Fractions (or ints).

    Plain fraction-pivot Gaussian elimination; fine for the small matrices
    used in the rational cross-checks.
    """
    mat = [[Fraction(x) for x in row] for row in rows]
    n = len(mat)
    det = Fraction(1)
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != col:
            mat[col], mat[pivot_row] = mat[pivot_row], mat[col]
            det = -det
        pivot = mat[col][col]
        det *= pivot
        for r in range(col + 1, n):
            factor = mat[r][col] / pivot
            if factor:
                mat[r] = [mat[r][c] - factor * mat[col][c] for c in range(n)]
    return det
