"""Brute-force reference implementations for verifying the fast paths.

These are deliberately literal (explicit ``R``, explicit index loops) and
refuse inputs beyond small sizes.  They are meant for tests and for
re-verification by users, not for analysis.
"""

import itertools
import math

import numpy as np

TRACE_MAX_N = 64
LOOP_MAX_N = 20


def _guard(n, limit, what):
    if n > limit:
        raise ValueError(f"{what} is a test oracle limited to n <= {limit}, got n={n}")


def hsic_trace_naive(Kx, Ky, W):
    """``Tr(Kx R Ky R)`` with ``R = diag(W) - W^T W`` built explicitly."""
    Kx, Ky, W = np.asarray(Kx, float), np.asarray(Ky, float), np.asarray(W, float)
    n = W.shape[0]
    _guard(n, TRACE_MAX_N, "hsic_trace_naive")
    R = np.diag(W) - np.outer(W, W)
    return float(np.trace(Kx @ R @ Ky @ R))


def hsic_empirical_naive(Kx, Ky):
    """Empirical HSIC from its three literal index sums, O(n^4)."""
    Kx, Ky = np.asarray(Kx, float), np.asarray(Ky, float)
    n = Kx.shape[0]
    _guard(n, LOOP_MAX_N, "hsic_empirical_naive")
    a = b = c = 0.0
    for i in range(n):
        for j in range(n):
            a += Kx[i, j] * Ky[i, j]
            for q in range(n):
                c += Kx[i, j] * Ky[i, q]
                for r in range(n):
                    b += Kx[i, j] * Ky[q, r]
    return a / n**2 + b / n**4 - 2.0 * c / n**3


def theorem1_expanded(Kx, Ky, W):
    """Posterior HSIC as the weighted moment expansion with the prior atom dropped.

    ``sum_ij w_i w_j Kx_ij Ky_ij + (sum_ij w_i w_j Kx_ij)(sum_qr w_q w_r Ky_qr)
    - 2 sum_ijq w_i w_j w_q Kx_ij Ky_iq``, by explicit loops.
    """
    Kx, Ky, W = np.asarray(Kx, float), np.asarray(Ky, float), np.asarray(W, float)
    n = W.shape[0]
    _guard(n, LOOP_MAX_N, "theorem1_expanded")
    joint = sx = sy = cross = 0.0
    for i in range(n):
        for j in range(n):
            wij = W[i] * W[j]
            joint += wij * Kx[i, j] * Ky[i, j]
            sx += wij * Kx[i, j]
            sy += wij * Ky[i, j]
            for q in range(n):
                cross += wij * W[q] * Kx[i, j] * Ky[i, q]
    return joint + sx * sy - 2.0 * cross


def levenshtein_table(a, b):
    """Edit distance from the full ``(len(a)+1) x (len(b)+1)`` dynamic-programming table."""
    D = np.zeros((len(a) + 1, len(b) + 1), dtype=int)
    D[:, 0] = np.arange(len(a) + 1)
    D[0, :] = np.arange(len(b) + 1)
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            D[i, j] = min(D[i - 1, j] + 1, D[i, j - 1] + 1,
                          D[i - 1, j - 1] + (a[i - 1] != b[j - 1]))
    return int(D[-1, -1])


def gram_rbf_loop(points, ell):
    """Squared-exponential Gram matrix by a scalar double loop."""
    pts = [np.atleast_1d(np.asarray(p, float)) for p in points]
    n = len(pts)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d2 = sum((a - b) ** 2 for a, b in zip(pts[i], pts[j]))
            K[i, j] = math.exp(-d2 / (2.0 * ell * ell))
    return K


def dirichlet_second_moment(n, i, j):
    """``E[w_i w_j]`` under the flat Dirichlet over ``n`` atoms."""
    return (1.0 + (i == j)) / (n * (n + 1))


def all_permutations(n):
    return list(itertools.permutations(range(n)))
