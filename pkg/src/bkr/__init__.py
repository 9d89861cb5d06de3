"""Bayesian kernel test of (in)dependence for mixed-type data.

The posterior of the Hilbert-Schmidt independence criterion under a
Dirichlet-process (Bayesian bootstrap) model yields BdCor, a bias-corrected
Bayesian distance correlation.  Decisions of dependence *or* independence
are read off the posterior against a region of practical independence
(ROPI), one pair at a time or jointly over many pairs.
"""

from .bdcor import (
    Decision,
    PosteriorSamples,
    bdcor_posterior,
    bdcor_posterior_lowrank,
    decide,
)
from .data import Column, Dataset, load_dataset, write_dataset
from .dp_posterior import RngStream, sample_permutation, sample_weights
from .errors import DataError, DegenerateKernelError
from .hsic import hsic_empirical, hsic_sample, hsic_sample_lowrank
from .kernels import gram_edit_rbf, gram_indicator, gram_rbf, levenshtein, median_heuristic
from .multiple_comparisons import JointReport, PairStatement, joint_accept, pairwise_matrix
from .nhst import NhstResult, bonferroni, hsic_permutation_test
from .nystrom import nystrom_features
from .synthetic import SyntheticTruth, generate_d1, generate_d2

__version__ = "0.1.0"
