"""
Command-line front end.

Usage examples::

    watsonmle solve-kappa --a 0.5 --c 5 --r 0.6
    watsonmle bench-approx --c 10,100 --out bench.csv
    watsonmle sample --p 30 --kappa 100 --n 200 --seed 7 > a.txt
    watsonmle fit a.txt
    watsonmle mixture data.txt --k 2 --labels labels.txt --restarts 10
    watsonmle diametrical data.txt --k 2
    watsonmle metrics data.txt --partition part.txt --centroids cent.txt

Model objects are written as JSON, tables and matrices as CSV.  Every JSON
document carries a ``config`` entry with the fully resolved options; for CSV
output the config is echoed to stderr instead.

Exit status: 0 on success, 1 for usage and input-format errors, 2 when the
computation itself fails (domain or convergence errors).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys

import numpy as np

from . import kappa as kp
from .kummer import kummer_ratio
from .linalg import unit_rows
from .mixture import (
    PER_COMPONENT,
    EmConfig,
    Init,
    Mode,
    SharedFixed,
    diametrical,
    em_fit,
    label_accuracy,
    metrics,
)
from .watson import CLAMP_CONTROLS, CLAMP_EPS, WatsonParams, fit, sample

BENCH_HEADER = ["c", "kappa_star", "r", "method", "estimate", "rel_error"]
BENCH_METHODS = [kp.Method.BBG, kp.Method.L, kp.Method.B, kp.Method.U, kp.Method.COMBINED, kp.Method.NEWTON]

EXIT_USAGE = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    """Bad flags or unreadable input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- input / output -------------------------------------------------------------

_SPLIT = re.compile(r"[,\s]+")


def parse_matrix(text, skip_header=False):
    """Parse whitespace- or comma-delimited numbers, one row per line.

    Blank lines and lines starting with ``#`` are ignored.
    """
    rows = []
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if skip_header:
        lines = lines[1:]
    for lineno, line in enumerate(lines, 1):
        try:
            rows.append([float(tok) for tok in _SPLIT.split(line.strip()) if tok])
        except ValueError as exc:
            raise UsageError(f"line {lineno}: {exc}") from None
    if not rows:
        raise UsageError("input contains no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise UsageError(f"rows have differing lengths {sorted(widths)}")
    X = np.array(rows, dtype=float)
    if not np.all(np.isfinite(X)):
        raise UsageError("input contains non-finite values")
    return X


def read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def read_matrix(path, skip_header=False):
    return parse_matrix(read_text(path), skip_header)


def read_labels(path):
    toks = [t for t in _SPLIT.split(read_text(path).strip()) if t]
    if not toks:
        raise UsageError(f"{path} contains no labels")
    return np.array(toks)


def normalize_rows(X):
    norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise UsageError(f"cannot normalize zero rows: indices {zero[:20].tolist()}")
    return X / norms[:, None]


def format_matrix(X, fmt):
    if fmt == "json":
        return json.dumps(X.tolist()) + "\n"
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in X)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None


def _finite_or_none(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    return obj


def _emit_json(doc, out):
    # strict JSON: undefined quantities (e.g. a closed form's residual) become null
    _emit(json.dumps(_finite_or_none(doc), indent=2, allow_nan=False) + "\n", out)


def _echo_config(config):
    sys.stderr.write("# config " + json.dumps(config, sort_keys=True) + "\n")


def _config(args):
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load_data(args):
    X = read_matrix(args.input, args.header == "skip")
    if args.normalize:
        return normalize_rows(X)
    try:
        return unit_rows(X)
    except ValueError as exc:
        raise UsageError(f"{exc}; pass --normalize to rescale them") from None


# -- commands --------------------------------------------------------------------


def _method_name(text):
    for m in kp.Method:
        if m.value.lower() == text.lower():
            return m
    raise argparse.ArgumentTypeError(f"unknown method {text!r}")


def cmd_solve_kappa(args):
    r = args.r
    eval_controls = None
    if args.clamp_r:
        r = min(max(r, CLAMP_EPS), 1.0 - CLAMP_EPS)
        # a clamped r can put kappa near c / CLAMP_EPS
        eval_controls = CLAMP_CONTROLS
    if args.method is kp.Method.NEWTON:
        report = kp.solve_newton(args.a, args.c, r, eval_controls=eval_controls)
    else:
        report = kp.estimate(args.a, args.c, r, args.method)
    doc = {"config": _config(args), "r": r, **report.as_dict()}
    if report.method is kp.Method.COMBINED:
        doc["selected"] = kp.combined_choice(args.a, args.c, r).value
    doc["estimates"] = {m.value: kp.estimate(args.a, args.c, r, m).kappa
                        for m in (kp.Method.L, kp.Method.B, kp.Method.U, kp.Method.BBG, kp.Method.COMBINED)}
    _emit_json(doc, args.out)


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def bench_rows(c_values, a=0.5, kmin=1e-2, kmax=200.0, grid_size=64):
    """Rows (c, kappa*, r, method, estimate, rel_error) of the approximation benchmark.

    For each c, kappa* runs over ``grid_size`` geometrically spaced values in
    [-kmax c, -kmin c] and as many in [kmin c, kmax c].  ``r`` is the Kummer
    ratio at kappa*; every estimator is then asked to recover kappa* from r.
    """
    rows = []
    for c in c_values:
        pos = np.geomspace(kmin * c, kmax * c, grid_size)
        for kstar in np.concatenate([-pos[::-1], pos]):
            kstar = float(kstar)
            r = kummer_ratio(a, c, kstar)
            for m in BENCH_METHODS:
                try:
                    est = kp.estimate(a, c, r, m).kappa
                except (ArithmeticError, ValueError):
                    est = math.nan
                rows.append((float(c), kstar, r, m.value, est, abs(est - kstar) / abs(kstar)))
    return rows


def cmd_bench_approx(args):
    if args.grid_size < 2:
        raise UsageError("--grid-size must be at least 2")
    if not 0 < args.kappa_min_multiple < args.kappa_range:
        raise UsageError("need 0 < --kappa-min-multiple < --kappa-range")
    rows = bench_rows(args.c, args.a, args.kappa_min_multiple, args.kappa_range, args.grid_size)
    if args.format == "json":
        _emit_json({"config": _config(args), "rows": [dict(zip(BENCH_HEADER, r)) for r in rows]}, args.out)
        return
    _echo_config(_config(args))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    for c, kstar, r, m, est, err in rows:
        w.writerow([repr(c), repr(kstar), repr(r), m, repr(est), repr(err)])
    _emit(buf.getvalue(), args.out)


def cmd_fit(args):
    X = _load_data(args)
    report = fit(X, clamp_r=args.clamp_r)
    _emit_json({"config": _config(args), "n": X.shape[0], "p": X.shape[1], **report.as_dict()}, args.out)


def _partition_doc(X, labels, centroids, truth):
    doc = {
        "assignments": labels.tolist(),
        "metrics": metrics(X, labels, centroids).as_dict(),
    }
    if truth is not None:
        doc["accuracy"] = label_accuracy(labels, truth)
    return doc


def _truth(args, n):
    if args.labels is None:
        return None
    truth = read_labels(args.labels)
    if truth.size != n:
        raise UsageError(f"{args.labels} has {truth.size} labels for {n} rows")
    return truth


def cmd_mixture(args):
    X = _load_data(args)
    truth = _truth(args, X.shape[0])
    policy = PER_COMPONENT if args.shared_kappa is None else SharedFixed(args.shared_kappa)
    best = None
    for i in range(args.restarts):
        cfg = EmConfig(
            mode=Mode.HARD if args.mode == "hard" else Mode.SOFT,
            max_iters=args.max_iters,
            ll_rel_tol=args.tol,
            seed=args.seed + i,
            init=Init.DIAMETRICAL_WARM_START if args.init == "diametrical" else Init.RANDOM_POINTS,
            kappa_policy=policy,
            equal_priors=args.equal_priors,
        )
        res = em_fit(X, args.k, cfg)
        # strict comparison keeps the earliest restart on ties
        if best is None or res.ll_trace[-1] > best[1].ll_trace[-1]:
            best = (i, res)
    i, res = best
    labels = res.responsibilities.labels
    doc = {
        "config": _config(args),
        "restart": i,
        "log_likelihood": res.ll_trace[-1],
        "iterations": len(res.ll_trace),
        "model": res.model.as_dict(),
        **_partition_doc(X, labels, res.model.mus, truth),
        "ll_trace": res.ll_trace,
    }
    _emit_json(doc, args.out)


def cmd_diametrical(args):
    X = _load_data(args)
    truth = _truth(args, X.shape[0])
    res = diametrical(X, args.k, args.seed, max_iters=args.max_iters)
    doc = {
        "config": _config(args),
        "iterations": res.iterations,
        "centroids": res.centroids.tolist(),
        **_partition_doc(X, res.partition, res.centroids, truth),
        "homogeneity_trace": res.h_trace,
    }
    _emit_json(doc, args.out)


def _parse_mu(spec, p, seed):
    if spec == "random":
        v = np.random.default_rng(seed).standard_normal(p)
    elif re.fullmatch(r"e\d+", spec):
        i = int(spec[1:])
        if not 1 <= i <= p:
            raise UsageError(f"--mu {spec} is out of range for p={p}")
        v = np.eye(p)[i - 1]
    else:
        try:
            v = np.array(_float_list(spec))
        except argparse.ArgumentTypeError as exc:
            raise UsageError(str(exc)) from None
        if v.size != p:
            raise UsageError(f"--mu has {v.size} entries, expected p={p}")
    if not np.linalg.norm(v) > 0:
        raise UsageError("--mu must be nonzero")
    return v / np.linalg.norm(v)


def cmd_sample(args):
    if args.p < 2 or args.n < 1:
        raise UsageError("need --p >= 2 and --n >= 1")
    # the axis uses its own stream so that it does not shift the draws
    mu = _parse_mu(args.mu, args.p, args.seed + 1_000_003)
    X = sample(WatsonParams(mu, args.kappa), args.n, args.seed)
    config = _config(args)
    config["mu_resolved"] = mu.tolist()
    if args.format == "json":
        _emit_json({"config": config, "rows": X.tolist()}, args.out)
        return
    _echo_config(config)
    _emit(format_matrix(X, "csv"), args.out)


def cmd_metrics(args):
    X = _load_data(args)
    labels = read_labels(args.partition)
    try:
        labels = labels.astype(float)
    except ValueError:
        raise UsageError("partition must contain integer labels") from None
    if not np.all(labels == np.round(labels)):
        raise UsageError("partition must contain integer labels")
    C = read_matrix(args.centroids)
    if args.normalize:
        C = normalize_rows(C)
    if labels.size != X.shape[0]:
        raise UsageError(f"partition has {labels.size} labels for {X.shape[0]} rows")
    if C.shape[1] != X.shape[1]:
        raise UsageError("centroids and data have different dimensions")
    m = metrics(X, labels.astype(int), C)
    _emit_json({"config": _config(args), **m.as_dict()}, args.out)


# -- parser -----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--normalize", action="store_true", help="rescale input rows to unit norm")
    g.add_argument("--clamp-r", action="store_true",
                   help=f"clamp r into [{CLAMP_EPS:g}, 1 - {CLAMP_EPS:g}] instead of failing")
    g.add_argument("--out", default=None, help="output path (default stdout)")
    g.add_argument("--format", choices=["json", "csv"], default=None,
                   help="output format for tables and matrices")
    g.add_argument("--header", choices=["none", "skip"], default="none",
                   help="'skip' drops the first input line")

    parser = _Parser(prog="watsonmle", description="Watson distribution MLE, mixtures and clustering.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve-kappa", parents=[common], help="invert the Kummer ratio")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--method", type=_method_name, default=kp.Method.NEWTON,
                   help="L, B, U, BBG, Combined or Newton (default)")
    p.set_defaults(func=cmd_solve_kappa)

    p = sub.add_parser("bench-approx", parents=[common], help="relative errors of the kappa estimators")
    p.add_argument("--c", type=_float_list, default=[10.0, 100.0, 1000.0, 10000.0],
                   help="comma-separated c values (default 10,100,1000,10000)")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--kappa-range", type=float, default=200.0, help="largest |kappa*| as a multiple of c")
    p.add_argument("--kappa-min-multiple", type=float, default=1e-2,
                   help="smallest |kappa*| as a multiple of c")
    p.add_argument("--grid-size", type=int, default=64, help="points per sign per c")
    p.set_defaults(func=cmd_bench_approx)

    p = sub.add_parser("fit", parents=[common], help="fit one Watson distribution")
    p.add_argument("input", help="data file, '-' for stdin")
    p.set_defaults(func=cmd_fit)

    for name, func, helptext in (
        ("mixture", cmd_mixture, "EM for a mixture of Watson distributions"),
        ("diametrical", cmd_diametrical, "diametrical clustering"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("input", help="data file, '-' for stdin")
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--labels", default=None, help="true labels, adds an accuracy field")
        p.set_defaults(func=func)
        if name == "mixture":
            p.add_argument("--mode", choices=["soft", "hard"], default="soft")
            p.add_argument("--max-iters", type=int, default=200)
            p.add_argument("--tol", type=float, default=1e-8, help="relative log-likelihood tolerance")
            p.add_argument("--init", choices=["random", "diametrical"], default="random")
            p.add_argument("--shared-kappa", type=float, default=None,
                           help="fix every kappa to this value")
            p.add_argument("--equal-priors", action="store_true")
            p.add_argument("--restarts", type=int, default=1,
                           help="seeds seed..seed+restarts-1; keeps the best log-likelihood")
        else:
            p.add_argument("--max-iters", type=int, default=1000)

    p = sub.add_parser("sample", parents=[common], help="draw from a Watson distribution")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", default="e1", help="'eK', 'random' or comma-separated entries (default e1)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("metrics", parents=[common], help="homogeneity and separation of a partition")
    p.add_argument("input", help="data file, '-' for stdin")
    p.add_argument("--partition", required=True, help="one integer label per row")
    p.add_argument("--centroids", required=True, help="one centroid per row")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "mixture" and (args.k < 1 or args.restarts < 1):
        parser.error("--k and --restarts must be positive")
    try:
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"watsonmle: error: {exc}\n")
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        # covers the domain and convergence errors of every module
        sys.stderr.write(f"watsonmle: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
