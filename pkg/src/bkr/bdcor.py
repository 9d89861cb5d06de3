"""Posterior distribution of BdCor for one pair of variables, and ROPI decisions.

For each Monte Carlo iteration ``t`` a Dirichlet weight vector ``W_t`` and a
permutation ``pi_t`` are drawn.  With ``h(., .)`` the posterior HSIC under
``W_t``:

    V_t   = h(X, Y) / sqrt(h(X, X) h(Y, Y))
    tau_t = h(X, Y_pi) / sqrt(h(X, X) h(Y, Y))

and the BdCor draws are ``(V_t - E[tau]) / (1 - E[tau])`` where ``E[tau]`` is
the Monte Carlo mean of ``tau_t``.  Independent variables then give a
posterior centred at zero.
"""

from dataclasses import dataclass, field

import numpy as np

from .dp_posterior import RngStream, sample_permutations, sample_weights_batch
from .errors import DegenerateKernelError
from .hsic import NEG_TOL, _check_square, _lowrank_batch, _rowdot

# child-stream layout under a test's RngStream
WEIGHTS, PERMS, TAU_WEIGHTS, TAU_PERMS, LANDMARKS = range(5)

DEGENERATE_TOL = 1e-14
DEFAULT_MC = 1000
HIST_BINS = 50

# elements per gathered block; bounds memory of the batched permutation terms
_BLOCK = 1 << 22


def _clamp(h):
    return np.where((h < 0) & (h >= -NEG_TOL), 0.0, h)


class GramOperand:
    """Exact path: an ``(n, n)`` Gram matrix."""

    lowrank = False

    def __init__(self, K):
        self.K = _check_square(K, "Gram matrix")
        self.n = self.K.shape[0]

    def chunk(self):
        return max(1, _BLOCK // (self.n * self.n))

    def self_hsic(self, W):
        K = self.K
        A = W @ K
        t1 = _rowdot(W @ (K * K), W)
        t2 = _rowdot(W, A * A)
        s = _rowdot(A, W)
        return _clamp(t1 - 2.0 * t2 + s * s)

    def cross_hsic(self, other, W, perms=None):
        Kx, Ky = self.K, other.K
        AX = W @ Kx
        if perms is None:
            AY = W @ Ky
            t1 = _rowdot(W @ (Kx * Ky), W)
        else:
            # W-weighted Ky with rows and columns re-indexed by pi:
            # (W Ky_pi)_j = (U Ky)_{pi_j} where U[pi_i] = W[i]
            U = np.empty_like(W)
            np.put_along_axis(U, perms, W, axis=1)
            AY = np.take_along_axis(U @ Ky, perms, axis=1)
            n = self.n
            KyP = np.take(Ky.ravel(), perms[:, :, None] * n + perms[:, None, :])
            KyP *= Kx
            t1 = _rowdot(np.matmul(KyP, W[:, :, None])[..., 0], W)
        t2 = _rowdot(W, AX * AY)
        t3 = _rowdot(AX, W) * _rowdot(AY, W)
        return _clamp(t1 - 2.0 * t2 + t3)


class FeatureOperand:
    """Low-rank path: an ``(n, r)`` feature matrix with ``phi phi^T ~ K``."""

    lowrank = True

    def __init__(self, phi):
        phi = np.asarray(phi, dtype=float)
        if phi.ndim != 2 or phi.shape[1] < 1:
            raise ValueError(f"feature matrix must be (n, r) with r >= 1, got {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValueError("non-finite entries in feature matrix")
        self.phi = phi
        self.n = phi.shape[0]

    def chunk(self):
        return max(1, _BLOCK // (self.n * max(self.phi.shape[1], 1) * 2))

    def self_hsic(self, W):
        return _clamp(_lowrank_batch(self.phi, self.phi, W))

    def cross_hsic(self, other, W, perms=None):
        phiY = other.phi if perms is None else other.phi[perms]
        return _clamp(_lowrank_batch(self.phi, phiY, W))


def as_operand(obj):
    if isinstance(obj, (GramOperand, FeatureOperand)):
        return obj
    return GramOperand(obj)


def _chunks(total, size):
    for start in range(0, total, size):
        yield slice(start, min(total, start + size))


def self_hsic_draws(op, W):
    """Self-HSIC ``h(X, X)`` for every row of ``W``, evaluated in memory-bounded chunks."""
    out = np.empty(W.shape[0])
    for sl in _chunks(W.shape[0], op.chunk()):
        out[sl] = op.self_hsic(W[sl])
    return out


def cross_hsic_draws(opx, opy, W, perms=None):
    out = np.empty(W.shape[0])
    size = min(opx.chunk(), opy.chunk())
    for sl in _chunks(W.shape[0], size):
        out[sl] = opx.cross_hsic(opy, W[sl], None if perms is None else perms[sl])
    return out


def _check_self(h, name):
    bad = h < DEGENERATE_TOL
    if np.any(bad):
        raise DegenerateKernelError(name, float(h[bad].min()))


@dataclass
class PosteriorSamples:
    """Monte Carlo draws of BdCor for one pair.

    Attributes
    ----------
    samples : ndarray
        BdCor draws, one per iteration.
    tau_mean : float
        Estimated exchangeability correction ``E[tau]``.
    n_mc : int
        Number of Monte Carlo iterations.
    ratio : ndarray
        Uncorrected ratios ``V_t``.
    tau : ndarray
        Per-draw normalised permutation statistics ``tau_t``.
    """

    samples: np.ndarray
    tau_mean: float
    n_mc: int
    ratio: np.ndarray = field(default=None, repr=False)
    tau: np.ndarray = field(default=None, repr=False)

    @property
    def mean(self):
        return float(np.mean(self.samples))

    def quantiles(self, qs=(0.025, 0.5, 0.975)):
        return np.quantile(self.samples, qs)

    def histogram(self, bins=HIST_BINS):
        """Counts over ``bins`` uniform bins spanning the sample range."""
        lo, hi = float(self.samples.min()), float(self.samples.max())
        if hi <= lo:
            lo, hi = lo - 0.5e-3, hi + 0.5e-3
        return np.histogram(self.samples, bins=bins, range=(lo, hi))

    def prob_greater(self, ropi):
        return float(np.mean(self.samples > ropi))


def posterior_from_draws(opx, opy, W, perms, names=("X", "Y"), hx=None, hy=None,
                         tau_draws=None):
    """BdCor draws for given weight draws and permutations.

    ``hx``, ``hy`` may carry precomputed self-HSIC values for ``W``.
    ``tau_draws = (W_tau, perms_tau)`` estimates ``E[tau]`` from a separate
    budget instead of the coupled per-iteration permutations.
    """
    opx, opy = as_operand(opx), as_operand(opy)
    if opx.n != opy.n:
        raise ValueError(f"size mismatch: {opx.n} vs {opy.n}")
    if opx.n < 3:
        raise ValueError("BdCor needs at least 3 observations")
    W = np.atleast_2d(W)
    if hx is None:
        hx = self_hsic_draws(opx, W)
    if hy is None:
        hy = self_hsic_draws(opy, W)
    _check_self(hx, names[0])
    _check_self(hy, names[1])
    denom = np.sqrt(hx * hy)
    ratio = cross_hsic_draws(opx, opy, W) / denom
    if tau_draws is None:
        tau = cross_hsic_draws(opx, opy, W, perms) / denom
    else:
        Wt, Pt = tau_draws
        hxt, hyt = self_hsic_draws(opx, Wt), self_hsic_draws(opy, Wt)
        _check_self(hxt, names[0])
        _check_self(hyt, names[1])
        tau = cross_hsic_draws(opx, opy, Wt, Pt) / np.sqrt(hxt * hyt)
    tau_mean = float(np.mean(tau))
    if not tau_mean < 1.0:
        raise DegenerateKernelError(f"{names[0]}~{names[1]}")
    samples = (ratio - tau_mean) / (1.0 - tau_mean)
    return PosteriorSamples(samples, tau_mean, W.shape[0], ratio, tau)


def _draws(n, n_mc, rng, n_tau=None, pair=(0, 1)):
    rng = rng if isinstance(rng, RngStream) else RngStream(0 if rng is None else rng)
    W = sample_weights_batch(n, n_mc, rng.child(WEIGHTS))
    P = sample_permutations(n, n_mc, rng.child(PERMS, *pair))
    tau = None
    if n_tau:
        tau = (sample_weights_batch(n, n_tau, rng.child(TAU_WEIGHTS)),
               sample_permutations(n, n_tau, rng.child(TAU_PERMS, *pair)))
    return W, P, tau


def bdcor_posterior(Kx, Ky, n_mc=DEFAULT_MC, rng=None, n_tau=None, names=("X", "Y")):
    """Posterior BdCor draws from exact Gram matrices.

    Parameters
    ----------
    Kx, Ky : (n, n) array_like
        Gram matrices of the two variables over the same rows, ``n >= 3``.
    n_mc : int
        Monte Carlo iterations.
    rng : RngStream or int
        Weights come from child stream ``WEIGHTS`` and permutations from
        ``(PERMS, 0, 1)``, the same layout used for pair ``(0, 1)`` by
        :func:`bkr.multiple_comparisons.pairwise_matrix`.
    n_tau : int, optional
        Separate Monte Carlo budget for ``E[tau]``.  By default each
        iteration's permutation reuses that iteration's weights.
    names : pair of str
        Variable names used in error messages.

    Raises
    ------
    DegenerateKernelError
        If a self-HSIC draw falls below ``1e-14`` (e.g. a constant column).
    """
    opx, opy = GramOperand(Kx), GramOperand(Ky)
    if opx.n != opy.n:
        raise ValueError(f"size mismatch: {opx.n} vs {opy.n}")
    if int(n_mc) < 1:
        raise ValueError("n_mc must be positive")
    W, P, tau = _draws(opx.n, int(n_mc), rng, n_tau)
    return posterior_from_draws(opx, opy, W, P, names, tau_draws=tau)


def bdcor_posterior_lowrank(phiX, phiY, n_mc=DEFAULT_MC, rng=None, n_tau=None,
                            names=("X", "Y")):
    """Posterior BdCor draws from feature matrices (Nystrom path).

    Same stream layout as :func:`bdcor_posterior`; the permutation acts on
    the rows of ``phiY``.
    """
    opx, opy = FeatureOperand(phiX), FeatureOperand(phiY)
    if opx.n != opy.n:
        raise ValueError(f"row-count mismatch: {opx.n} vs {opy.n}")
    if int(n_mc) < 1:
        raise ValueError("n_mc must be positive")
    W, P, tau = _draws(opx.n, int(n_mc), rng, n_tau)
    return posterior_from_draws(opx, opy, W, P, names, tau_draws=tau)


@dataclass(frozen=True)
class Decision:
    label: str
    p_dependent: float
    p_independent: float
    ropi: float
    threshold: float


DEPENDENT, INDEPENDENT, UNDECIDED = "Dependent", "Independent", "Undecided"


def decide(samples, ropi=0.025, threshold=0.85):
    """ROPI decision from BdCor posterior draws.

    ``p_dependent`` is the fraction of draws strictly above ``ropi``.  The
    label is Dependent if it exceeds ``threshold``, Independent if
    ``1 - p_dependent`` does, Undecided otherwise.
    """
    if not 0.0 <= ropi <= 1.0:
        raise ValueError(f"ropi must lie in [0, 1], got {ropi}")
    if not 0.5 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0.5, 1), got {threshold}")
    s = samples.samples if isinstance(samples, PosteriorSamples) else np.asarray(samples)
    p_dep = float(np.mean(s > ropi))
    p_ind = 1.0 - p_dep
    if p_dep > threshold:
        label = DEPENDENT
    elif p_ind > threshold:
        label = INDEPENDENT
    else:
        label = UNDECIDED
    return Decision(label, p_dep, p_ind, float(ropi), float(threshold))
