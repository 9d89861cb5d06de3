"""What a permutation test can and cannot say.

Both methods see the same independent pair. The HSIC permutation test
returns a large p-value, which is only an absence of evidence. The
Bayesian test puts most posterior mass inside the ROPI and so states
independence outright.
"""
import numpy as np

from bkr import RngStream, bdcor_posterior, decide, gram_rbf, hsic_permutation_test

rng = np.random.default_rng(11)
for n in (30, 100, 300):
    x, y = rng.standard_normal(n), rng.standard_normal(n)
    Kx, Ky = gram_rbf(x), gram_rbf(y)
    test = hsic_permutation_test(Kx, Ky, n_perm=500, rng=RngStream(n))
    d = decide(bdcor_posterior(Kx, Ky, 1000, RngStream(n)))
    print(f"n={n:4d}  HSIC p={test.p_value:.3f} ({'reject' if test.rejected(0.05) else 'no call'})"
          f"   BKR P(independent)={d.p_independent:.3f} -> {d.label}")

# Evidence for independence accumulates with n; the p-value does not.
