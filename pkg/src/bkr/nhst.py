"""Frequentist baseline: permutation test on empirical HSIC, Bonferroni correction."""

from dataclasses import dataclass

import numpy as np

from .dp_posterior import RngStream, sample_permutations
from .hsic import _check_square

DEFAULT_PERMUTATIONS = 500


@dataclass(frozen=True)
class NhstResult:
    statistic: float
    p_value: float
    n_permutations: int

    def rejected(self, alpha):
        return self.p_value < alpha


def _hsic_permuted(Kx, Ky, perms):
    """Empirical HSIC of ``(Kx, Ky[pi][:, pi])`` for each row ``pi`` of ``perms``."""
    n = Kx.shape[0]
    rx = Kx.sum(axis=1)
    ry = Ky.sum(axis=1)
    t1 = np.einsum("ij,tij->t", Kx, Ky[perms[:, :, None], perms[:, None, :]])
    t3 = ry[perms] @ rx
    return t1 / n**2 + rx.sum() * ry.sum() / n**4 - 2.0 * t3 / n**3


def hsic_permutation_test(Kx, Ky, n_perm=DEFAULT_PERMUTATIONS, rng=None):
    """Permutation p-value for ``H0: X independent of Y`` with empirical HSIC.

    ``Ky`` is re-indexed (rows and columns) by ``n_perm`` uniform
    permutations; ``p = (1 + #{HSIC_b >= HSIC_obs}) / (n_perm + 1)``, where
    values within ``1e-12`` of the kernel scale count as ties.
    """
    Kx = _check_square(Kx, "Kx")
    Ky = _check_square(Ky, "Ky")
    if Kx.shape != Ky.shape:
        raise ValueError(f"size mismatch: Kx {Kx.shape} vs Ky {Ky.shape}")
    n = Kx.shape[0]
    if n < 3:
        raise ValueError("permutation test needs n >= 3")
    n_perm = int(n_perm)
    if n_perm < 1:
        raise ValueError("n_perm must be positive")
    rng = rng if isinstance(rng, RngStream) else RngStream(0 if rng is None else rng)
    stat = float(_hsic_permuted(Kx, Ky, np.arange(n)[None])[0])
    # values equal up to summation-order roundoff count as ties
    tie_tol = 1e-12 * np.abs(Kx).mean() * np.abs(Ky).mean()
    perms = sample_permutations(n, n_perm, rng)
    block = max(1, (1 << 22) // (n * n))
    count = 0
    for start in range(0, n_perm, block):
        null = _hsic_permuted(Kx, Ky, perms[start:start + block])
        count += int(np.sum(null >= stat - tie_tol))
    return NhstResult(stat, (1 + count) / (n_perm + 1), n_perm)


def bonferroni(alpha, k):
    """Per-test level ``alpha / k`` for ``k`` comparisons."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if int(k) < 1:
        raise ValueError("k must be a positive integer")
    return alpha / int(k)
