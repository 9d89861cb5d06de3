"""All-pairs BdCor with shared posterior draws, and joint acceptance of statements.

Every pair is evaluated on the same Dirichlet weight draws ``W_t``, so the
event "all accepted statements hold" can be checked iteration by iteration
and its posterior probability read off as a plain fraction.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bdcor import (
    DEFAULT_MC,
    LANDMARKS,
    PERMS,
    TAU_PERMS,
    TAU_WEIGHTS,
    WEIGHTS,
    FeatureOperand,
    GramOperand,
    posterior_from_draws,
    self_hsic_draws,
)
from .dp_posterior import RngStream, sample_permutations, sample_weights_batch
from .errors import DataError
from .nystrom import nystrom_features

GREATER, LESS_EQUAL = ">", "<="
DEFAULT_GAMMA = 0.9


def column_operand(column, rows=None, nystrom_rank=None, rng=None):
    """Gram matrix (exact) or Nystrom features for one column.

    The exact path is used when ``nystrom_rank`` is None or not smaller than
    the number of rows.
    """
    if rows is None:
        rows = np.arange(len(column))
    spec = column.kernel_spec(rows)
    values = column.values[rows]
    if column.kind == "string":
        values = list(values)
    n = len(rows)
    if nystrom_rank is not None and int(nystrom_rank) < n:
        return FeatureOperand(nystrom_features(values, spec, int(nystrom_rank), rng))
    return GramOperand(spec.gram(values))


@dataclass
class PairwiseResult:
    """Per-pair BdCor posteriors over ``k`` variables.

    ``dependent[(i, j)]`` holds, per Monte Carlo iteration, whether
    ``BdCor_ij > ropi``.  ``shared`` is True when all pairs used the same
    weight draws (complete-case analysis), which joint acceptance requires.
    """

    names: list
    n_mc: int
    ropi: float
    shared: bool
    dependent: dict = field(default_factory=dict)
    means: dict = field(default_factory=dict)
    tau_means: dict = field(default_factory=dict)
    posteriors: dict = field(default_factory=dict)

    @property
    def pairs(self):
        return sorted(self.dependent)

    def p_dependent(self, pair):
        return float(np.mean(self.dependent[pair]))

    def mean_matrix(self):
        """``k x k`` posterior means of BdCor, with 1 on the diagonal."""
        k = len(self.names)
        out = np.eye(k)
        for (i, j), m in self.means.items():
            out[i, j] = out[j, i] = m
        return out

    def probability_matrix(self):
        """``k x k`` posterior probabilities of ``BdCor > ropi``, 1 on the diagonal."""
        k = len(self.names)
        out = np.eye(k)
        for (i, j) in self.dependent:
            out[i, j] = out[j, i] = self.p_dependent((i, j))
        return out


def pairwise_matrix(dataset, n_mc=DEFAULT_MC, ropi=0.025, rng=None, nystrom_rank=None,
                    pairwise_complete=False, n_tau=None, keep_samples=True, threads=1):
    """BdCor posteriors for all ``k(k-1)/2`` column pairs of ``dataset``.

    One weight draw per iteration is shared by every pair; permutations are
    drawn per pair from stream ``(PERMS, i, j)``.  Each column's kernel is
    built once.  With ``pairwise_complete=True`` incomplete data is allowed:
    each pair drops its own missing rows and uses its own weight stream
    ``(WEIGHTS, i, j)``, and the result is flagged as not shared.

    Raises
    ------
    DataError
        Fewer than two columns, or missing values without ``pairwise_complete``.
    DegenerateKernelError
        A column has a constant kernel.
    """
    k = len(dataset.columns)
    if k < 2:
        raise DataError("need at least two columns")
    rng = rng if isinstance(rng, RngStream) else RngStream(0 if rng is None else rng)
    pairs = list(itertools.combinations(range(k), 2))
    names = dataset.names
    n_mc = int(n_mc)

    if dataset.is_complete():
        shared = True
        n = dataset.n
        ops = [column_operand(c, None, nystrom_rank, rng.child(LANDMARKS, i))
               for i, c in enumerate(dataset.columns)]
        W = sample_weights_batch(n, n_mc, rng.child(WEIGHTS))
        selfs = [self_hsic_draws(op, W) for op in ops]
        Wt = sample_weights_batch(n, n_tau, rng.child(TAU_WEIGHTS)) if n_tau else None

        def run(pair):
            i, j = pair
            P = sample_permutations(n, n_mc, rng.child(PERMS, i, j))
            tau = (Wt, sample_permutations(n, n_tau, rng.child(TAU_PERMS, i, j))) if n_tau else None
            return posterior_from_draws(ops[i], ops[j], W, P, (names[i], names[j]),
                                        selfs[i], selfs[j], tau)
    elif pairwise_complete:
        shared = False

        def run(pair):
            i, j = pair
            rows = dataset.complete_rows([names[i], names[j]])
            n = len(rows)
            if n < 3:
                raise DataError(f"pair ({names[i]}, {names[j]}): fewer than 3 complete rows")
            sub = rng.child(WEIGHTS, i, j)
            opx = column_operand(dataset[i], rows, nystrom_rank, sub.child(LANDMARKS, 0))
            opy = column_operand(dataset[j], rows, nystrom_rank, sub.child(LANDMARKS, 1))
            W = sample_weights_batch(n, n_mc, sub)
            P = sample_permutations(n, n_mc, rng.child(PERMS, i, j))
            tau = None
            if n_tau:
                tau = (sample_weights_batch(n, n_tau, rng.child(TAU_WEIGHTS, i, j)),
                       sample_permutations(n, n_tau, rng.child(TAU_PERMS, i, j)))
            return posterior_from_draws(opx, opy, W, P, (names[i], names[j]), tau_draws=tau)
    else:
        raise DataError("dataset has missing values; joint analysis needs complete cases "
                        "(use pairwise_complete=True for marginal-only results)")

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            posts = list(pool.map(run, pairs))
    else:
        posts = [run(p) for p in pairs]

    result = PairwiseResult(list(names), n_mc, float(ropi), shared)
    for pair, post in zip(pairs, posts):
        result.dependent[pair] = post.samples > ropi
        result.means[pair] = post.mean
        result.tau_means[pair] = post.tau_mean
        if keep_samples:
            result.posteriors[pair] = post
    return result


@dataclass(frozen=True)
class PairStatement:
    """``BdCor_ij > ropi`` (direction ``">"``) or ``BdCor_ij <= ropi`` (``"<="``)."""

    pair: tuple
    direction: str
    probability: float


@dataclass
class JointReport:
    accepted: list
    joint_probability: float
    gamma: float
    statements: list
    joint_curve: np.ndarray
    mean_matrix: np.ndarray = None
    probability_matrix: np.ndarray = None

    @property
    def n_dependent(self):
        return sum(s.direction == GREATER for s in self.accepted)

    @property
    def n_independent(self):
        return sum(s.direction == LESS_EQUAL for s in self.accepted)


def majority_statements(result):
    """The majority-direction statement for each pair, with its per-iteration truth."""
    statements, holds = [], []
    for pair in result.pairs:
        dep = result.dependent[pair]
        p = float(np.mean(dep))
        if p > 0.5:
            statements.append(PairStatement(pair, GREATER, p))
            holds.append(dep)
        else:
            statements.append(PairStatement(pair, LESS_EQUAL, 1.0 - p))
            holds.append(~dep)
    return statements, np.array(holds, dtype=bool).T


def accept_statements(statements, holds, gamma=DEFAULT_GAMMA):
    """Accept the longest prefix of sorted statements whose joint probability exceeds ``gamma``.

    Parameters
    ----------
    statements : list of PairStatement
        One statement per pair, ``probability`` being its marginal.
    holds : (N, k) bool array
        Whether each statement is true in each of ``N`` shared Monte Carlo
        iterations.
    gamma : float
        Required joint posterior probability.

    Returns
    -------
    JointReport
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    holds = np.asarray(holds, dtype=bool)
    order = sorted(range(len(statements)),
                   key=lambda s: (-statements[s].probability, statements[s].pair))
    ordered = [statements[s] for s in order]
    if ordered:
        joint = np.logical_and.accumulate(holds[:, order], axis=1).mean(axis=0)
    else:
        joint = np.zeros(0)
    ell = int(np.sum(joint > gamma))  # joint is non-increasing along the prefix
    jp = float(joint[ell - 1]) if ell else 0.0
    return JointReport(ordered[:ell], jp, float(gamma), ordered, joint)


def joint_accept(result, gamma=DEFAULT_GAMMA):
    """Joint dependence/independence statements for a :class:`PairwiseResult`.

    Raises
    ------
    ValueError
        If the pairs were not computed on shared weight draws.
    """
    if not result.shared:
        raise ValueError("joint acceptance needs pairs computed on shared weight draws "
                         "(complete-case analysis)")
    statements, holds = majority_statements(result)
    report = accept_statements(statements, holds, gamma)
    report.mean_matrix = result.mean_matrix()
    report.probability_matrix = result.probability_matrix()
    return report
