"""Command-line front end: ``bkr test | matrix | baseline | benchmark | generate``.

All structured output is JSON (stdout or ``--out``); the benchmark table can
additionally be written as CSV.  Exit codes: 0 success, 1 usage or
configuration error, 2 data error, 3 numeric degeneracy.
"""

import argparse
import csv
import itertools
import json
import os
import sys
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .bdcor import DEFAULT_MC, HIST_BINS, LANDMARKS, _draws, decide, posterior_from_draws
from .data import load_dataset, write_dataset
from .dp_posterior import RngStream
from .errors import DataError
from .multiple_comparisons import column_operand, joint_accept, pairwise_matrix
from .nhst import DEFAULT_PERMUTATIONS, bonferroni, hsic_permutation_test
from .synthetic import GENERATORS

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    ropi: float = 0.025
    threshold: float = 0.85
    gamma: float = 0.9
    n_mc: int = DEFAULT_MC
    nystrom_rank: int = 128  # None selects the exact path
    n_perm: int = DEFAULT_PERMUTATIONS
    seed: int = 0
    threads: int = 1
    alpha: float = 0.05
    n_tau: int = None

    def validate(self):
        if not 0.0 <= self.ropi <= 1.0:
            raise ConfigError(f"--ropi must lie in [0, 1], got {self.ropi}")
        if not 0.5 < self.threshold < 1.0:
            raise ConfigError(f"--threshold must lie in (0.5, 1), got {self.threshold}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"--gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"--alpha must lie in (0, 1), got {self.alpha}")
        if self.n_mc < 1 or self.n_perm < 1:
            raise ConfigError("--mc-samples and --permutations must be positive")
        if self.nystrom_rank is not None and self.nystrom_rank < 1:
            raise ConfigError("--nystrom-rank must be a positive integer or 'exact'")
        if self.n_tau is not None and self.n_tau < 1:
            raise ConfigError("--tau-samples must be positive")
        if self.threads < 1:
            raise ConfigError("--threads must be positive")
        return self

    @property
    def rng(self):
        return RngStream(self.seed)


def _f(x):
    return float(x)


def _posterior_summary(post, cfg):
    d = decide(post, cfg.ropi, cfg.threshold)
    counts, edges = post.histogram(HIST_BINS)
    q = post.quantiles((0.025, 0.5, 0.975))
    return {
        "posterior_mean": post.mean,
        "tau_mean": post.tau_mean,
        "quantiles": {"2.5": _f(q[0]), "50": _f(q[1]), "97.5": _f(q[2])},
        "histogram": {"edges": [_f(e) for e in edges], "counts": [int(c) for c in counts]},
        "p_dependent": d.p_dependent,
        "p_independent": d.p_independent,
        "decision": d.label,
    }


def _config_dict(cfg):
    return {
        "ropi": cfg.ropi, "threshold": cfg.threshold, "gamma": cfg.gamma,
        "mc_samples": cfg.n_mc,
        "nystrom_rank": "exact" if cfg.nystrom_rank is None else cfg.nystrom_rank,
        "permutations": cfg.n_perm, "seed": cfg.seed,
    }


def cmd_test(dataset, pair, cfg):
    """BdCor posterior and ROPI decision for one column pair (pairwise-complete rows)."""
    a, b = pair
    if a == b:
        raise ConfigError("test needs two distinct columns")
    rows = dataset.complete_rows([a, b])
    if len(rows) < 3:
        raise DataError(f"pair ({a}, {b}) has fewer than 3 complete rows")
    rng = cfg.rng
    opx = column_operand(dataset[a], rows, cfg.nystrom_rank, rng.child(LANDMARKS, 0))
    opy = column_operand(dataset[b], rows, cfg.nystrom_rank, rng.child(LANDMARKS, 1))
    W, P, tau = _draws(len(rows), cfg.n_mc, rng, cfg.n_tau)
    post = posterior_from_draws(opx, opy, W, P, (a, b), tau_draws=tau)
    out = {"command": "test", "pair": [a, b], "n": int(len(rows)),
           "lowrank": bool(opx.lowrank)}
    out.update(_posterior_summary(post, cfg))
    out["config"] = _config_dict(cfg)
    return out


def _pairwise(dataset, cfg, pairwise_complete=False, rng=None):
    return pairwise_matrix(dataset, cfg.n_mc, cfg.ropi, rng or cfg.rng, cfg.nystrom_rank,
                           pairwise_complete=pairwise_complete, n_tau=cfg.n_tau,
                           keep_samples=False, threads=cfg.threads)


def _matrix(m):
    return [[_f(v) for v in row] for row in m]


def cmd_matrix(dataset, cfg, pairwise_complete=False):
    """All-pairs posterior means, probabilities and joint statements.

    The ``posterior_mean`` matrix is the heatmap value and ``p_dependent`` its
    colour.  Joint acceptance is only reported for complete-case analyses.
    """
    res = _pairwise(dataset, cfg, pairwise_complete)
    names = res.names
    pairs = []
    for (i, j) in res.pairs:
        p = res.p_dependent((i, j))
        label = "Dependent" if p > cfg.threshold else (
            "Independent" if 1.0 - p > cfg.threshold else "Undecided")
        pairs.append({"pair": [names[i], names[j]], "posterior_mean": res.means[(i, j)],
                      "tau_mean": res.tau_means[(i, j)], "p_dependent": p,
                      "decision": label})
    out = {"command": "matrix", "columns": names, "n": int(dataset.n),
           "posterior_mean": _matrix(res.mean_matrix()),
           "p_dependent": _matrix(res.probability_matrix()),
           "pairs": pairs}
    if res.shared:
        rep = joint_accept(res, cfg.gamma)
        out["joint"] = {
            "gamma": rep.gamma,
            "joint_probability": rep.joint_probability,
            "accepted": [{"pair": [names[s.pair[0]], names[s.pair[1]]],
                          "statement": f"BdCor {s.direction} ROPI",
                          "probability": s.probability} for s in rep.accepted],
        }
    else:
        out["joint"] = None
    out["config"] = _config_dict(cfg)
    return out


def _gram(column):
    return column.kernel_spec().gram(
        list(column.values) if column.kind == "string" else column.values)


def cmd_baseline(dataset, pair, cfg):
    """HSIC permutation test for one pair, rejecting at ``alpha``."""
    a, b = pair
    rows = dataset.complete_rows([a, b])
    if len(rows) < 3:
        raise DataError(f"pair ({a}, {b}) has fewer than 3 complete rows")
    ca, cb = dataset[a].take(rows), dataset[b].take(rows)
    res = hsic_permutation_test(_gram(ca), _gram(cb), cfg.n_perm, cfg.rng)
    return {"command": "baseline", "pair": [a, b], "n": int(len(rows)),
            "statistic": res.statistic, "p_value": res.p_value,
            "n_permutations": res.n_permutations, "alpha": cfg.alpha,
            "rejected": bool(res.rejected(cfg.alpha)), "config": _config_dict(cfg)}


BENCH_FIELDS = ["rho", "repetitions", "bkr_ind", "bkr_dep", "bkr_all", "hsic_dep",
                "bkr_ind_accuracy", "bkr_dep_accuracy", "hsic_dep_accuracy",
                "bkr_false_ind", "bkr_false_dep", "hsic_false_dep"]


def benchmark_run(dataset, truth, cfg, rng, n_tests=None):
    """Decision counts for one synthetic instance: BKR (joint) and Bonferroni HSIC."""
    res = _pairwise(dataset, cfg, rng=rng.child(0))
    rep = joint_accept(res, cfg.gamma)
    k = len(dataset.columns)
    pairs = list(itertools.combinations(range(k), 2))
    alpha = bonferroni(cfg.alpha, n_tests or len(pairs))
    grams = [_gram(c) for c in dataset.columns]
    hsic_dep = set()
    for (i, j) in pairs:
        r = hsic_permutation_test(grams[i], grams[j], cfg.n_perm, rng.child(1, i, j))
        if r.rejected(alpha):
            hsic_dep.add((i, j))
    dep = {s.pair for s in rep.accepted if s.direction == ">"}
    ind = {s.pair for s in rep.accepted if s.direction == "<="}
    true_dep = {p for p, v in truth.dependent.items() if v}
    true_ind = set(truth.dependent) - true_dep
    return {
        "bkr_ind": len(ind), "bkr_dep": len(dep), "bkr_all": len(ind) + len(dep),
        "hsic_dep": len(hsic_dep),
        "bkr_ind_correct": len(ind & true_ind), "bkr_dep_correct": len(dep & true_dep),
        "hsic_dep_correct": len(hsic_dep & true_dep),
        "n_true_ind": len(true_ind), "n_true_dep": len(true_dep),
    }


def _ratio(num, den):
    return num / den if den else None


def cmd_benchmark(generator, n, rhos, repetitions, cfg, emit_dir=None, progress=None):
    """Average decision counts over ``repetitions`` synthetic instances per ``rho``."""
    if generator not in GENERATORS:
        raise ConfigError(f"unknown generator {generator!r}; expected one of {sorted(GENERATORS)}")
    if repetitions < 1 or n < 3:
        raise ConfigError("--repetitions must be >= 1 and --n >= 3")
    gen = GENERATORS[generator]
    if 1.0 / (cfg.n_perm + 1) >= bonferroni(cfg.alpha, 15):
        warnings.warn(f"--permutations {cfg.n_perm} is too few for the HSIC baseline to reject "
                      f"at the Bonferroni level {bonferroni(cfg.alpha, 15):.4g}")
    rows = []
    for a, rho in enumerate(rhos):
        runs = []
        for r in range(repetitions):
            ds, tr = gen(n, rho, RngStream(cfg.seed, (100, a, r)))
            if emit_dir:
                os.makedirs(emit_dir, exist_ok=True)
                stem = os.path.join(emit_dir, f"{generator}_rho{rho:g}_rep{r:03d}")
                write_dataset(ds, stem + ".csv", stem + ".schema.json")
            runs.append(benchmark_run(ds, tr, cfg, RngStream(cfg.seed, (101, a, r))))
            if progress:
                progress(rho, r)
        tot = {key: sum(run[key] for run in runs) for key in runs[0]}
        m = len(runs)
        rows.append({
            "rho": float(rho), "repetitions": m,
            "bkr_ind": tot["bkr_ind"] / m, "bkr_dep": tot["bkr_dep"] / m,
            "bkr_all": tot["bkr_all"] / m, "hsic_dep": tot["hsic_dep"] / m,
            "bkr_ind_accuracy": _ratio(tot["bkr_ind_correct"], tot["n_true_ind"]),
            "bkr_dep_accuracy": _ratio(tot["bkr_dep_correct"], tot["n_true_dep"]),
            "hsic_dep_accuracy": _ratio(tot["hsic_dep_correct"], tot["n_true_dep"]),
            "bkr_false_ind": (tot["bkr_ind"] - tot["bkr_ind_correct"]) / m,
            "bkr_false_dep": (tot["bkr_dep"] - tot["bkr_dep_correct"]) / m,
            "hsic_false_dep": (tot["hsic_dep"] - tot["hsic_dep_correct"]) / m,
        })
    return {"command": "benchmark", "generator": generator, "n": int(n),
            "bonferroni_alpha": bonferroni(cfg.alpha, 15), "rows": rows,
            "config": _config_dict(cfg)}


def write_benchmark_csv(report, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in report["rows"]:
            w.writerow({k: ("" if row[k] is None else row[k]) for k in BENCH_FIELDS})


def cmd_generate(generator, n, rho, cfg, csv_path, schema_path):
    ds, tr = GENERATORS[generator](n, rho, RngStream(cfg.seed))
    write_dataset(ds, csv_path, schema_path)
    names = ds.names
    return {"command": "generate", "generator": generator, "n": int(n), "rho": float(rho),
            "csv": csv_path, "schema": schema_path,
            "truth": [{"pair": [names[i], names[j]], "dependent": v}
                      for (i, j), v in sorted(tr.dependent.items())]}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rank(text):
    if text.lower() == "exact":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'exact', got {text!r}") from None


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--ropi", type=float, default=0.025)
    g.add_argument("--threshold", type=float, default=0.85)
    g.add_argument("--gamma", type=float, default=0.9)
    g.add_argument("--mc-samples", type=int, default=DEFAULT_MC, dest="n_mc")
    g.add_argument("--tau-samples", type=int, default=None, dest="n_tau",
                   help="separate Monte Carlo budget for E[tau] (default: coupled)")
    g.add_argument("--nystrom-rank", type=_rank, default=128,
                   help="landmarks per variable, or 'exact' (default 128)")
    g.add_argument("--permutations", type=int, default=DEFAULT_PERMUTATIONS, dest="n_perm")
    g.add_argument("--alpha", type=float, default=0.05)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    g.add_argument("--out", default=None, help="write JSON here instead of stdout")

    data = _Parser(add_help=False)
    data.add_argument("csv")
    data.add_argument("--schema", required=True)

    pair = _Parser(add_help=False)
    pair.add_argument("--pair", nargs=2, required=True, metavar=("COL_A", "COL_B"))

    p = _Parser(prog="bkr", description="Bayesian kernel test of (in)dependence.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("test", parents=[data, pair, common], help="posterior BdCor for one pair")
    m = sub.add_parser("matrix", parents=[data, common], help="all pairs + joint statements")
    m.add_argument("--pairwise-complete", action="store_true",
                   help="allow missing values; each pair drops its own incomplete rows "
                        "(no joint statements)")
    m.add_argument("--drop-incomplete", action="store_true",
                   help="drop every row with a missing value before analysis")
    sub.add_parser("baseline", parents=[data, pair, common], help="HSIC permutation test")
    b = sub.add_parser("benchmark", parents=[common], help="synthetic D1/D2 benchmark")
    b.add_argument("--generator", choices=sorted(GENERATORS), default="d1")
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--rho", type=float, nargs="+", default=[0.0, 0.3, 0.6, 0.9])
    b.add_argument("--repetitions", type=int, default=100)
    b.add_argument("--csv-out", default=None, help="also write the table as CSV")
    b.add_argument("--emit-dir", default=None, help="write every generated dataset here")
    b.add_argument("--progress", action="store_true")
    gen = sub.add_parser("generate", parents=[common], help="write one synthetic dataset")
    gen.add_argument("--generator", choices=sorted(GENERATORS), default="d1")
    gen.add_argument("--n", type=int, default=100)
    gen.add_argument("--rho", type=float, default=0.5)
    gen.add_argument("--csv-out", required=True)
    gen.add_argument("--schema-out", required=True)
    return p


def _emit(obj, path):
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    ds = load_dataset(args.csv, args.schema)
    if getattr(args, "pair", None):
        for name in args.pair:
            if name not in ds.names:
                raise ConfigError(f"unknown column {name!r}; columns are {ds.names}")
    return ds


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        cfg = RunConfig(args.ropi, args.threshold, args.gamma, args.n_mc, args.nystrom_rank,
                        args.n_perm, args.seed, args.threads, args.alpha, args.n_tau).validate()
        if args.command == "test":
            out = cmd_test(_load(args), tuple(args.pair), cfg)
        elif args.command == "baseline":
            out = cmd_baseline(_load(args), tuple(args.pair), cfg)
        elif args.command == "matrix":
            ds = _load(args)
            if args.drop_incomplete:
                ds = ds.take(ds.complete_rows())
            out = cmd_matrix(ds, cfg, args.pairwise_complete)
        elif args.command == "benchmark":
            progress = None
            if args.progress:
                start = time.time()

                def progress(rho, r):
                    print(f"rho={rho:g} rep={r + 1}/{args.repetitions} "
                          f"{time.time() - start:.0f}s", file=sys.stderr)
            out = cmd_benchmark(args.generator, args.n, args.rho, args.repetitions, cfg,
                                args.emit_dir, progress)
            if args.csv_out:
                write_benchmark_csv(out, args.csv_out)
        else:
            out = cmd_generate(args.generator, args.n, args.rho, cfg, args.csv_out,
                               args.schema_out)
    except (ConfigError, KeyError) as exc:
        print(f"bkr: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"bkr: numeric degeneracy: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError, ValueError) as exc:
        print(f"bkr: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _emit(out, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
