"""Synthetic benchmark datasets with known pairwise dependence.

Both generators produce six variables::

    X ~ N(0, 1)                  continuous
    Y = B^{-1}(Phi(T)), T ~ N(0,1)  binary
    C_X   coupled to X           continuous
    D_X   coupled to X           binary
    D_Y   coupled to T           binary
    CC_X  coupled to X           1024-dim vector in [0, 1]

D1 couples through a Gaussian copula with correlation ``rho``; D2 replaces
every coupling by a Clayton copula with ``theta = 2 rho / (1 - rho)`` (so
Kendall's tau equals ``rho``).  Variables coupled to the same latent
(``X`` or ``T``) are dependent for ``rho > 0``; all other pairs are
independent.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .data import Column, Dataset
from .dp_posterior import _generator

NAMES = ("X", "Y", "C_X", "D_X", "D_Y", "CC_X")
IMAGE_DIM = 1024
# latent each variable is driven by
_GROUP = {"X": "X", "C_X": "X", "D_X": "X", "CC_X": "X", "Y": "T", "D_Y": "T"}


@dataclass(frozen=True)
class SyntheticTruth:
    """Ground-truth dependence for each of the 15 pairs, keyed by index pair ``(i, j)``."""

    dependent: dict

    @property
    def n_dependent(self):
        return sum(self.dependent.values())

    @property
    def n_independent(self):
        return len(self.dependent) - self.n_dependent


def truth(rho):
    dep = {}
    for i, j in itertools.combinations(range(len(NAMES)), 2):
        dep[(i, j)] = bool(rho > 0 and _GROUP[NAMES[i]] == _GROUP[NAMES[j]])
    return SyntheticTruth(dep)


def _check_rho(rho):
    rho = float(rho)
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    return rho


def bernoulli_inv(p):
    """Inverse CDF of Bernoulli(0.5): 1 where ``p >= 0.5``."""
    return (np.asarray(p) >= 0.5).astype(int)


def _dataset(x, y, cx, dx, dy, ccx):
    return Dataset([
        Column("X", "numeric", x),
        Column("Y", "categorical", y),
        Column("C_X", "numeric", cx),
        Column("D_X", "categorical", dx),
        Column("D_Y", "categorical", dy),
        Column("CC_X", "numeric-vector", ccx),
    ])


def generate_d1(n, rho, rng, dim=IMAGE_DIM):
    """Gaussian-copula dataset D1; returns ``(Dataset, SyntheticTruth)``."""
    rho = _check_rho(rho)
    g = _generator(rng)
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    s = np.sqrt(1.0 - rho * rho)
    x = g.standard_normal(n)
    t = g.standard_normal(n)
    w1, w2, w3 = g.standard_normal((3, n))
    ww = g.standard_normal((n, dim))
    y = bernoulli_inv(norm.cdf(t))
    cx = rho * x + s * w1
    dx = bernoulli_inv(norm.cdf(rho * x + s * w2))
    dy = bernoulli_inv(norm.cdf(rho * t + s * w3))
    ccx = norm.cdf(rho * x[:, None] + s * ww)
    return _dataset(x, y, cx, dx, dy, ccx), truth(rho)


def clayton_theta(rho):
    """Clayton parameter whose Kendall's tau equals ``rho``."""
    rho = _check_rho(rho)
    return 2.0 * rho / (1.0 - rho)


def clayton_conditional(u, w, theta):
    """Second Clayton coordinate given the first, by conditional inversion.

    ``u`` are the given uniforms, ``w`` independent uniforms; ``theta = 0``
    is the independence copula (returns ``w``).
    """
    if theta < 0:
        raise ValueError(f"Clayton theta must be >= 0, got {theta}")
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if theta == 0:
        return np.broadcast_to(w, np.broadcast(u, w).shape).copy()
    return ((w ** (-theta / (1.0 + theta)) - 1.0) * u ** (-theta) + 1.0) ** (-1.0 / theta)


def generate_d2(n, rho, rng, dim=IMAGE_DIM):
    """Clayton-copula dataset D2; returns ``(Dataset, SyntheticTruth)``."""
    theta = clayton_theta(rho)
    g = _generator(rng)
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    x = g.standard_normal(n)
    t = g.standard_normal(n)
    ux, ut = norm.cdf(x), norm.cdf(t)
    w1, w2, w3 = g.uniform(size=(3, n))
    ww = g.uniform(size=(n, dim))
    y = bernoulli_inv(ut)
    cx = norm.ppf(np.clip(clayton_conditional(ux, w1, theta), 1e-16, 1.0 - 1e-16))
    dx = bernoulli_inv(clayton_conditional(ux, w2, theta))
    dy = bernoulli_inv(clayton_conditional(ut, w3, theta))
    ccx = clayton_conditional(ux[:, None], ww, theta)
    return _dataset(x, y, cx, dx, dy, ccx), truth(rho)


GENERATORS = {"d1": generate_d1, "d2": generate_d2}
