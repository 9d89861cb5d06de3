"""Decision counts on the six-variable synthetic benchmark.

Fifteen pairs, seven dependent at rho > 0. BKR can make both kinds of
call; the Bonferroni-corrected HSIC test only rejects. A few repetitions
keep this quick; `bkr benchmark --repetitions 100` runs the full version.
"""
from bkr.cli import RunConfig, cmd_benchmark

# The smallest permutation p-value is 1/(n_perm+1); it must fall below
# the Bonferroni level 0.05/15 for HSIC to reject at all.
cfg = RunConfig(gamma=0.85, n_mc=500, n_perm=500)
rep = cmd_benchmark("d1", n=100, rhos=[0.0, 0.5, 0.9], repetitions=3, cfg=cfg)

print(f"{'rho':>5} {'BKR dep':>8} {'BKR ind':>8} {'BKR all':>8} {'HSIC':>6}")
for row in rep["rows"]:
    print(f"{row['rho']:5.1f} {row['bkr_dep']:8.2f} {row['bkr_ind']:8.2f} "
          f"{row['bkr_all']:8.2f} {row['hsic_dep']:6.2f}")
