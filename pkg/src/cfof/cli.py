"""Command-line driver: ``cfof gen|score|eval|theory``.

Every output file is written to a temporary name and renamed into place, so
a zero exit status means all outputs are complete.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import baselines, dataset, evaluation, exact, fast, synthgen, theory
from .scoreset import ScoreSet

log = logging.getLogger("cfof")

KINDS = ("unimodal", "clust2", "multimodal", "multimodal-art", "mixture")
METHODS = ("cfof", "fast-cfof", "odin", "antihub2", "aknn", "lof")
METRICS = ("auc", "prec", "spearman", "cr")
THEORY = ("cdf", "pdf", "expected", "separation", "allocation")


class UsageError(Exception):
    pass


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _atomic(path, write) -> None:
    """Call ``write(tmp_path)`` then move the result to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=path.suffix)
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _write_rows(path, header, rows) -> None:
    def write(tmp):
        with open(tmp, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(v if isinstance(v, str) else repr(float(v)) for v in row) + "\n")

    if path is None:
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join(v if isinstance(v, str) else repr(float(v)) for v in row) + "\n")
    else:
        _atomic(path, write)


# ------------------------------------------------------------------------ gen

def cmd_gen(args) -> None:
    labels = None
    if args.kind == "unimodal":
        ds = synthgen.gen_unimodal(args.n, args.d, args.seed)
    elif args.kind == "clust2":
        ds = synthgen.gen_clust2(args.n, args.d, args.seed)
    elif args.kind in ("multimodal", "multimodal-art"):
        ds, labels, cid = synthgen.gen_multimodal(args.n, args.d, args.seed, args.alpha)
        if args.kind == "multimodal-art":
            ds = synthgen.make_artificial(ds, labels, cid)
    else:
        if args.spec is None:
            raise UsageError("--kind mixture requires --spec")
        clusters = json.loads(Path(args.spec).read_text())
        if isinstance(clusters, dict):
            clusters = clusters["clusters"]
        spec = synthgen.MixtureSpec(tuple(clusters), args.n, args.d, args.seed)
        ds, _ = synthgen.gen_mixture(spec)
    _atomic(args.out, lambda tmp: dataset.save(ds, tmp))
    if args.labels is not None:
        if labels is None:
            raise UsageError(f"--kind {args.kind} has no labels")
        _atomic(args.labels, lambda tmp: dataset.save_labels(labels, tmp))


# ---------------------------------------------------------------------- score

def cmd_score(args) -> None:
    cfof_like = args.method in ("cfof", "fast-cfof")
    if cfof_like and args.k is not None:
        raise UsageError(f"--k does not apply to --method {args.method}; use --rho")
    if not cfof_like:
        if args.k is None:
            raise UsageError(f"--method {args.method} requires --k")
        if args.rho is not None:
            raise UsageError(f"--rho does not apply to --method {args.method}; use --k")
    rhos = args.rho if args.rho is not None else fast.DEFAULT_RHOS

    streamed = args.method == "fast-cfof" and Path(args.input).suffix == ".bin"
    if streamed:
        source = args.input
    else:
        source = dataset.load(args.input, has_header=args.header) \
            if Path(args.input).suffix != ".bin" else dataset.load(args.input)

    if args.method == "cfof":
        ss = exact.hard_cfof(source, rhos, mode=args.mode, threads=args.threads)
    elif args.method == "fast-cfof":
        params = fast.FastParams(rho_list=rhos, epsilon=args.epsilon, delta=args.delta,
                                 bins=args.bins, c=args.c, seed=args.seed, threads=args.threads,
                                 sample_size=args.sample_size, shuffle=args.shuffle)
        ss = fast.fast_cfof(source, params)
    else:
        ss = baselines.METHODS[args.method](source, args.k, threads=args.threads)
    _atomic(args.out, ss.to_csv)


# ----------------------------------------------------------------------- eval

def cmd_eval(args) -> None:
    ss = ScoreSet.from_csv(args.scores)
    metrics = args.metric or ["auc", "prec"]
    labels = None
    if {"auc", "prec"} & set(metrics):
        if args.labels is None:
            raise UsageError("auc/prec need --labels")
        labels = dataset.load_labels(args.labels)
        if labels.size != ss.n:
            raise UsageError(f"{args.labels}: {labels.size} labels for {ss.n} scored points")
    other = None
    if "spearman" in metrics:
        if args.against is None:
            raise UsageError("--metric spearman needs --against SCORES")
        other = ScoreSet.from_csv(args.against)
    report = evaluation.EvalReport()
    method = args.name or Path(args.scores).stem
    for value, col in zip(ss.param_values, ss.scores.T):
        for metric in metrics:
            if metric == "auc":
                v = evaluation.auc(col, labels)
            elif metric == "prec":
                v = evaluation.prec_at(col, labels, args.alpha)
            elif metric == "cr":
                v = theory.concentration_ratio(col, args.alpha)
            else:
                v = evaluation.spearman(col, other.column(value))
            report.add(method, value, metric, v)
    if args.out is None:
        _write_rows(None, ["method", "param", "metric", "value"],
                    [(m, evaluation._fmt(p), k, v) for m, p, k, v in report.rows])
    else:
        _atomic(args.out, report.to_csv)


# --------------------------------------------------------------------- theory

def cmd_theory(args) -> None:
    kappa, rho = args.kappa, args.rho
    if args.what == "expected":
        z = np.linspace(args.zmin, args.zmax, args.points)
        rows = [(zz, theory.cfof_expected(kappa, rho, zz)) for zz in z]
        header = ["z", "score"]
    elif args.what in ("cdf", "pdf"):
        s = np.linspace(0.0, 1.0, args.points + 2)[1:-1]
        fn = theory.cfof_cdf if args.what == "cdf" else theory.cfof_pdf
        vals = fn(s, kappa, rho)
        rows = list(zip(s, vals))
        header = ["s", args.what]
    elif args.what == "separation":
        rows = [(kappa, rho, args.z0, theory.separation(kappa, rho, args.z0))]
        header = ["kappa", "rho", "z0", "separation"]
    else:
        pis = args.pis or (0.5, 0.5)
        kappas = args.kappas or tuple(kappa for _ in pis)
        shares = theory.cluster_allocation(pis, kappas, rho, args.alpha)
        rows = [(str(i), p, k, a) for i, (p, k, a) in enumerate(zip(pis, kappas, shares))]
        header = ["cluster", "pi", "kappa", "alpha_i"]
    _write_rows(args.out, header, rows)


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfof", description="CFOF outlier scores and experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alpha", type=float, default=0.05)
    g.add_argument("--out", required=True, help=".bin for binary, otherwise CSV")
    g.add_argument("--labels")
    g.add_argument("--spec", help="JSON list of clusters for --kind mixture")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("score", help="score a dataset")
    s.add_argument("--input", required=True)
    s.add_argument("--method", required=True, choices=METHODS)
    s.add_argument("--rho", type=_floats)
    s.add_argument("--k", type=_ints)
    s.add_argument("--epsilon", type=float, default=0.01)
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--bins", type=int, default=1000)
    s.add_argument("--c", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sample-size", type=int)
    s.add_argument("--shuffle", action="store_true")
    s.add_argument("--mode", choices=("auto", "matrix", "streaming"), default="auto")
    s.add_argument("--header", action="store_true", help="CSV input has a header line")
    s.add_argument("--threads", type=int, default=int(os.environ.get("CFOF_THREADS", "1")))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_score)

    e = sub.add_parser("eval", help="evaluate a score file")
    e.add_argument("--scores", required=True)
    e.add_argument("--labels")
    e.add_argument("--alpha", type=float, default=0.05)
    e.add_argument("--metric", choices=METRICS, action="append")
    e.add_argument("--against", help="reference scores for spearman")
    e.add_argument("--name", help="method column (default: score file stem)")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("theory", help="emit closed-form curves")
    t.add_argument("what", choices=THEORY)
    t.add_argument("--kappa", type=float, required=True)
    t.add_argument("--rho", type=float, required=True)
    t.add_argument("--points", type=int, default=99)
    t.add_argument("--zmin", type=float, default=-4.0)
    t.add_argument("--zmax", type=float, default=4.0)
    t.add_argument("--z0", type=float, default=0.0)
    t.add_argument("--pis", type=_floats)
    t.add_argument("--kappas", type=_floats)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--out")
    t.set_defaults(func=cmd_theory)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"cfof {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0
