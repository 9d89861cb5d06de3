"""Sampling from the limiting (s -> 0) Dirichlet-process posterior.

In that limit the posterior over the joint distribution is a random
discrete measure on the observed atoms with flat Dirichlet weights (the
Bayesian bootstrap).  Permutations of the observation indices give the
exchangeability correction used by BdCor.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream)``.

    Child streams are addressed by appending integers to ``stream``; distinct
    paths give statistically independent generators (Philox keyed through
    ``numpy.random.SeedSequence``), so work split across threads or
    iterations stays reproducible.

    >>> a = RngStream(7).child(3).generator().random()
    >>> b = RngStream(7, (3,)).generator().random()
    >>> a == b
    True
    """

    seed: int = 0
    stream: tuple = ()

    def __post_init__(self):
        if isinstance(self.stream, int):
            object.__setattr__(self, "stream", (self.stream,))
        object.__setattr__(self, "stream", tuple(int(s) for s in self.stream))
        object.__setattr__(self, "seed", int(self.seed) % 2**64)

    def child(self, *ids):
        return RngStream(self.seed, self.stream + tuple(int(i) for i in ids))

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(ss))


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return RngStream(0 if rng is None else rng).generator()


def _check_n(n):
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return n


def sample_weights_batch(n, size, rng):
    """``size`` flat-Dirichlet draws over ``n`` atoms, as a ``(size, n)`` array.

    Each row is ``n`` unit-rate exponentials divided by their sum.
    """
    n = _check_n(n)
    g = _generator(rng)
    e = g.standard_exponential((int(size), n))
    return e / e.sum(axis=1, keepdims=True)


def sample_weights(n, rng):
    """One weight vector ``W ~ Dir(1, ..., 1)`` over ``n`` observations."""
    return sample_weights_batch(n, 1, rng)[0]


def sample_permutations(n, size, rng):
    """``size`` independent uniform permutations of ``range(n)``, shape ``(size, n)``."""
    n = _check_n(n)
    g = _generator(rng)
    return g.permuted(np.tile(np.arange(n), (int(size), 1)), axis=1)


def sample_permutation(n, rng):
    """A uniform random permutation of ``range(n)`` (0-based)."""
    n = _check_n(n)
    return _generator(rng).permutation(n)
