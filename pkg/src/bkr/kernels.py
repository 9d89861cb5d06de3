"""Gram matrices for numeric, categorical and string data.

Three kernels are supported:

- ``rbf``: squared exponential ``exp(-||x - y||^2 / (2 l^2))`` on numeric
  vectors, with the lengthscale set by the median heuristic unless given;
- ``indicator``: ``1`` when two labels are equal, ``0`` otherwise;
- ``edit-rbf``: the squared exponential applied to the Levenshtein distance
  between strings.

All Gram matrices returned here are symmetric, PSD, with entries in
``[0, 1]`` and a unit diagonal.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

KERNELS = ("rbf", "indicator", "edit-rbf")


def _as_points(points):
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"points must be a 1-d or 2-d array, got shape {x.shape}")
    if x.shape[0] == 0:
        raise ValueError("empty input")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite values in points")
    return x


def _check_lengthscale(ell):
    ell = float(ell)
    if not np.isfinite(ell) or ell <= 0:
        raise ValueError(f"lengthscale must be positive and finite, got {ell}")
    return ell


def lower_median(values):
    """Lower median: element ``floor((m - 1) / 2)`` of the sorted values."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("median of an empty set")
    return float(v[(v.size - 1) // 2])


def median_from_distances(distances):
    """Median-heuristic lengthscale from a flat array of pairwise distances.

    Falls back to the smallest positive distance when the median is zero.
    """
    d = np.asarray(distances, dtype=float)
    positive = d[d > 0]
    if positive.size == 0:
        raise ValueError("all points are identical; no positive pairwise distance")
    med = lower_median(d)
    return med if med > 0 else float(positive.min())


def median_heuristic(points):
    """Median of the pairwise Euclidean distances between ``points``.

    Parameters
    ----------
    points : (n,) or (n, d) array_like
        At least two points.

    Returns
    -------
    float
        The lower median of the ``n(n-1)/2`` distances, or the smallest
        positive distance if that median is zero.
    """
    x = _as_points(points)
    if x.shape[0] < 2:
        raise ValueError("median heuristic needs at least two points")
    return median_from_distances(pdist(x))


def rbf_from_distances(dist, ell):
    ell = _check_lengthscale(ell)
    return np.exp(-np.square(dist) / (2.0 * ell * ell))


def gram_rbf(points, ell=None, other=None):
    """Squared-exponential Gram matrix.

    With ``other`` given, returns the ``(n, m)`` cross-kernel between
    ``points`` and ``other`` instead.  ``ell=None`` uses the median heuristic
    on ``points``.
    """
    x = _as_points(points)
    if ell is None:
        ell = median_heuristic(x)
    ell = _check_lengthscale(ell)
    if other is None:
        sq = cdist(x, x, "sqeuclidean")
        k = np.exp(-sq / (2.0 * ell * ell))
        # exact symmetry and unit diagonal regardless of cdist rounding
        k = np.triu(k) + np.triu(k, 1).T
        np.fill_diagonal(k, 1.0)
        return k
    y = _as_points(other)
    if y.shape[1] != x.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    return np.exp(-cdist(x, y, "sqeuclidean") / (2.0 * ell * ell))


def gram_indicator(labels, other=None):
    """Indicator (delta) kernel on categorical labels."""
    a = np.asarray(labels)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("labels must be a non-empty 1-d array")
    b = a if other is None else np.asarray(other)
    return (a[:, None] == b[None, :]).astype(float)


def levenshtein(a, b):
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def edit_distance_matrix(strings, other=None):
    """Pairwise Levenshtein distances as a float matrix."""
    s = [str(v) for v in strings]
    if other is None:
        n = len(s)
        d = np.zeros((n, n))
        cache = {}
        for i in range(n):
            for j in range(i + 1, n):
                key = (s[i], s[j])
                if key not in cache:
                    cache[key] = levenshtein(*key)
                d[i, j] = d[j, i] = cache[key]
        return d
    t = [str(v) for v in other]
    return np.array([[levenshtein(x, y) for y in t] for x in s], dtype=float)


def edit_median_heuristic(strings):
    """Median heuristic over pairwise edit distances."""
    d = edit_distance_matrix(strings)
    if d.shape[0] < 2:
        raise ValueError("median heuristic needs at least two strings")
    return median_from_distances(d[np.triu_indices_from(d, 1)])


def nearest_psd_correlation(K, tol=1e-10):
    """Clip negative eigenvalues of a symmetric matrix and restore a unit diagonal.

    Returns ``K`` unchanged when its smallest eigenvalue is above
    ``-tol * n``.
    """
    lam, U = np.linalg.eigh(K)
    if lam[0] >= -tol * K.shape[0]:
        return K
    P = (U * np.clip(lam, 0.0, None)) @ U.T
    d = np.sqrt(np.clip(np.diag(P), np.finfo(float).tiny, None))
    P = P / d[:, None] / d[None, :]
    P = 0.5 * (P + P.T)
    np.fill_diagonal(P, 1.0)
    return P


def gram_edit_rbf(strings, ell=None, other=None, psd=True):
    """Squared-exponential kernel over Levenshtein distances.

    Edit distance is not a Hilbertian metric, so the raw matrix can be
    indefinite.  With ``psd=True`` (default) a square Gram matrix is replaced
    by its nearest PSD correlation matrix (negative eigenvalues clipped, unit
    diagonal restored); entries then lie in ``[-1, 1]``.  Cross-kernels
    (``other`` given) are returned raw.
    """
    if len(strings) == 0:
        raise ValueError("empty input")
    if ell is None:
        ell = edit_median_heuristic(strings)
    k = rbf_from_distances(edit_distance_matrix(strings, other), ell)
    if other is None:
        np.fill_diagonal(k, 1.0)
        if psd:
            k = nearest_psd_correlation(k)
    return k


@dataclass(frozen=True)
class KernelSpec:
    """A resolved kernel: its kind and (for RBF kinds) a fixed lengthscale."""

    kind: str
    lengthscale: float = None

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; expected one of {KERNELS}")
        if self.kind != "indicator" and self.lengthscale is not None:
            _check_lengthscale(self.lengthscale)

    def gram(self, values, other=None):
        if self.kind == "rbf":
            return gram_rbf(values, self.lengthscale, other)
        if self.kind == "indicator":
            return gram_indicator(values, other)
        return gram_edit_rbf(values, self.lengthscale, other)


def default_kernel(kind):
    """Kernel kind used for a column type under ``auto``."""
    return {
        "numeric": "rbf",
        "numeric-vector": "rbf",
        "categorical": "indicator",
        "string": "edit-rbf",
    }[kind]


def resolve_kernel(values, kind, lengthscale=None):
    """Fix the lengthscale of an RBF-type kernel from the data if not given."""
    if kind == "indicator":
        return KernelSpec("indicator")
    if lengthscale is None:
        if kind == "rbf":
            lengthscale = median_heuristic(values)
        else:
            lengthscale = edit_median_heuristic(values)
    return KernelSpec(kind, float(lengthscale))
