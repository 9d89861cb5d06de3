"""Nystrom feature maps for low-rank posterior HSIC."""

import numpy as np

from .dp_posterior import _generator

# eigenvalues of K_mm below RANK_TOL * lambda_max are treated as null directions
RANK_TOL = 1e-10


def nystrom_from_landmarks(K_nm, K_mm, rank_tol=RANK_TOL):
    """Features ``phi = K_nm U diag(lambda)^{-1/2}`` on the retained eigenspace of ``K_mm``.

    ``phi @ phi.T`` equals ``K_nm pinv(K_mm) K_mn`` restricted to eigenvalues
    above ``rank_tol * lambda_max``.
    """
    K_mm = np.asarray(K_mm, dtype=float)
    K_nm = np.asarray(K_nm, dtype=float)
    lam, U = np.linalg.eigh(0.5 * (K_mm + K_mm.T))
    lmax = lam[-1] if lam.size else 0.0
    if not lmax > 0:
        raise ArithmeticError("landmark kernel matrix is numerically zero")
    keep = lam > rank_tol * lmax
    return (K_nm @ U[:, keep]) / np.sqrt(lam[keep])


def sample_landmarks(n, m, rng):
    """``m`` landmark indices drawn uniformly without replacement from ``range(n)``."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    return np.sort(_generator(rng).choice(n, size=m, replace=False))


def nystrom_features(values, kernel, m, rng, landmarks=None):
    """Nystrom feature matrix for one column.

    Parameters
    ----------
    values : array_like
        Column payload, ``n`` rows (numbers, vectors, labels or strings).
    kernel : KernelSpec
        Resolved kernel (lengthscale already fixed).
    m : int
        Number of landmarks, ``1 <= m <= n``.
    rng : RngStream or numpy Generator
        Source for the landmark draw.
    landmarks : array_like of int, optional
        Explicit landmark indices; overrides ``m`` and ``rng``.

    Returns
    -------
    (n, r) ndarray
        Features with ``r <= m`` and ``phi @ phi.T`` approximating the Gram matrix.
    """
    values = np.asarray(values) if not isinstance(values, list) else values
    n = len(values)
    if landmarks is None:
        landmarks = sample_landmarks(n, int(m), rng)
    landmarks = np.asarray(landmarks, dtype=int)
    sub = [values[i] for i in landmarks] if isinstance(values, list) else values[landmarks]
    K_nm = kernel.gram(values, sub)
    K_mm = K_nm[landmarks]
    return nystrom_from_landmarks(K_nm, K_mm)
