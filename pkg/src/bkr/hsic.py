"""Posterior and empirical HSIC.

``hsic_sample`` evaluates ``Tr(Kx R Ky R)`` with ``R = diag(w) - w w^T``
without forming ``R``, through the Schur-product expansion

    w (Kx o Ky) w^T - 2 w (Kx w^T o Ky w^T) + (w Kx w^T)(w Ky w^T).

Every function accepts a single weight vector of shape ``(n,)`` or a batch
of draws of shape ``(B, n)``; the output has the matching shape ``()`` or
``(B,)``.
"""

import numpy as np

# roundoff band in which negative HSIC draws are snapped to zero
NEG_TOL = 1e-12


def _clamp(h):
    h = np.asarray(h, dtype=float)
    return np.where((h < 0) & (h >= -NEG_TOL), 0.0, h)


def _check_square(K, name):
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {K.shape}")
    return K


def _check_weights(W, n):
    W = np.asarray(W, dtype=float)
    if W.shape[-1] != n or W.ndim not in (1, 2):
        raise ValueError(f"weights of shape {W.shape} do not match n={n}")
    return W


def _rowdot(a, b):
    return np.einsum("...i,...i->...", a, b)


def hsic_terms(Kx, Ky, W, KxKy=None):
    """The three Schur-expansion terms ``(t1, t2, t3)`` for weight draws ``W``."""
    if KxKy is None:
        KxKy = Kx * Ky
    AX = W @ Kx
    AY = W @ Ky
    t1 = _rowdot(W @ KxKy, W)
    t2 = _rowdot(W, AX * AY)
    t3 = _rowdot(AX, W) * _rowdot(AY, W)
    return t1, t2, t3


def hsic_sample(Kx, Ky, W):
    """Posterior HSIC draw(s) for Gram matrices ``Kx``, ``Ky`` and weights ``W``.

    Parameters
    ----------
    Kx, Ky : (n, n) array_like
        Gram matrices over the same ``n`` paired observations.
    W : (n,) or (B, n) array_like
        Dirichlet weight vector(s).

    Returns
    -------
    float or (B,) ndarray
        ``Tr(Kx R Ky R)`` per draw, with roundoff negatives clamped to 0.
    """
    Kx = _check_square(Kx, "Kx")
    Ky = _check_square(Ky, "Ky")
    if Kx.shape != Ky.shape:
        raise ValueError(f"size mismatch: Kx {Kx.shape} vs Ky {Ky.shape}")
    W = _check_weights(W, Kx.shape[0])
    t1, t2, t3 = hsic_terms(Kx, Ky, W)
    h = _clamp(t1 - 2.0 * t2 + t3)
    return float(h) if h.ndim == 0 else h


def hsic_sample_lowrank(phiX, phiY, W):
    """Posterior HSIC draw(s) from feature matrices, ``||phiX^T R phiY||_F^2``.

    Costs ``O(n r r')`` per draw; ``R`` is never formed.
    """
    phiX = np.asarray(phiX, dtype=float)
    phiY = np.asarray(phiY, dtype=float)
    if phiX.ndim != 2 or phiY.ndim != 2:
        raise ValueError("feature matrices must be 2-d")
    if phiX.shape[0] != phiY.shape[0]:
        raise ValueError(f"row-count mismatch: {phiX.shape[0]} vs {phiY.shape[0]}")
    W = _check_weights(W, phiX.shape[0])
    single = W.ndim == 1
    W2 = np.atleast_2d(W)
    h = _lowrank_batch(phiX, phiY, W2)
    h = _clamp(h)
    return float(h[0]) if single else h


def _lowrank_batch(phiX, phiY, W):
    """``||phiX^T R_t phiY_t||_F^2`` for each row ``t`` of ``W``.

    ``phiY`` is either ``(n, r')`` / ``(1, n, r')`` shared by all draws or
    ``(B, n, r')`` with one (e.g. row-permuted) matrix per draw.
    """
    if phiY.ndim == 2:
        phiY = phiY[None]
    mx = W @ phiX                                   # (B, r)
    my = np.einsum("tn,tnj->tj", W, phiY) if phiY.shape[0] > 1 else W @ phiY[0]
    wx = W[:, :, None] * phiX[None]                 # (B, n, r)
    C = np.matmul(wx.transpose(0, 2, 1), phiY)      # (B, r, r')
    C -= mx[:, :, None] * my[:, None, :]
    return np.einsum("tij,tij->t", C, C)


def hsic_empirical(Kx, Ky):
    """Biased (V-statistic) empirical HSIC.

    ``(1/n^2) sum Kx o Ky + (1/n^4) sum Kx sum Ky - (2/n^3) sum_i (Kx 1)_i (Ky 1)_i``
    """
    Kx = _check_square(Kx, "Kx")
    Ky = _check_square(Ky, "Ky")
    if Kx.shape != Ky.shape:
        raise ValueError(f"size mismatch: Kx {Kx.shape} vs Ky {Ky.shape}")
    n = Kx.shape[0]
    if n < 2:
        raise ValueError("empirical HSIC needs n >= 2")
    rx = Kx.sum(axis=1)
    ry = Ky.sum(axis=1)
    return float(
        np.sum(Kx * Ky) / n**2 + rx.sum() * ry.sum() / n**4 - 2.0 * (rx @ ry) / n**3
    )
