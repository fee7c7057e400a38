"""Command-line entry point: ``xgl <subcommand> ...``.

Every subcommand prints one JSON object (or a CSV table with
``--format csv``).  Exit codes: 0 ok, 2 bad input, 3 solver or
capacity failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import approxnorm, bounds, compiler, nlbox, xorgame
from .boolfn import BoolFn, Density, fwht, library
from .errors import CapacityError, GuaranteeViolation, InconsistencyError, SolverError

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3
CSV_DIGITS = 12


class UsageError(ValueError):
    pass


# -- argument resolution ------------------------------------------------------

def load_fn(ref: str, n: int | None) -> BoolFn:
    """A truth-table file, a hex table (needs n), or a builtin name (needs n)."""
    path = Path(ref)
    if path.is_file():
        f = BoolFn.from_text(path.read_text())
    else:
        if n is None:
            raise UsageError(f"--n is required for {ref!r}")
        if ref.lower().startswith("0x"):
            f = BoolFn.from_int(n, int(ref, 16))
        else:
            f = library(ref, n)
    if n is not None and f.n != n:
        raise UsageError(f"function has arity {f.n}, expected {n}")
    return f


def load_density(ref: str, n: int) -> Density:
    """``uniform``, ``product:NU0``, or a density file."""
    if ref == "uniform":
        return Density.uniform(n)
    if ref.startswith("product:"):
        return Density.product(float(ref.split(":", 1)[1]), n)
    q = Density.from_text(Path(ref).read_text())
    if q.n != n:
        raise UsageError(f"density has arity {q.n}, expected {n}")
    return q


def load_pair_distribution(ref: str, n: int) -> np.ndarray:
    """Pair distribution as an [x, y] array.

    Files use the density layout (``n=<2n>`` header) indexed x | (y << n);
    any non-negative weights are accepted and normalized.
    """
    N = 1 << n
    if ref == "uniform":
        return np.full((N, N), 1.0 / (N * N))
    head, *body = Path(ref).read_text().split()
    if head != f"n={2 * n}":
        raise UsageError(f"pair distribution must start with n={2 * n}")
    q = Density.from_probabilities([float(t) for t in body])
    if q.n != 2 * n:
        raise UsageError(f"pair distribution needs {N * N} weights")
    return q.probabilities.reshape(N, N).T.copy()


def _threads(value):
    if value is not None:
        return value
    return int(os.environ.get("XGL_THREADS", "1") or 1)


# -- output -------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.{CSV_DIGITS}g}"
    return str(v)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def emit(record, fmt: str, out, columns=None, rows=None):
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        if rows is None:
            flat = {k: v for k, v in record.items() if not isinstance(v, (list, dict))}
            columns, rows = list(flat), [list(flat.values())]
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        out.write(json.dumps(_clean(record)) + "\n")


# -- subcommands --------------------------------------------------------------

def cmd_fourier(args, out):
    f = load_fn(args.fn, args.n)
    s = fwht(f)
    record = {"n": f.n, "coeffs": s.coeffs, "l1": s.l1, "linf": s.linf, "l0": s.l0}
    rows = [[S, c] for S, c in enumerate(s.coeffs)]
    emit(record, args.format, out, ["set", "coeff"], rows if args.format == "csv" else None)


def cmd_norms(args, out):
    f = load_fn(args.fn, args.n)
    s = fwht(f)
    record = {"n": f.n, "l1": s.l1, "linf": s.linf, "l0": s.l0}
    if args.epsilon is not None:
        res = approxnorm.approx_l1(f, args.epsilon)
        record.update(epsilon=args.epsilon, approx_l1=res.value, tight=res.tight,
                      fstar_min_l1=approxnorm.fstar_min_l1(f))
    emit(record, args.format, out)


def cmd_bias(args, out):
    g = load_fn(args.g, args.n)
    q = load_density(args.q, g.n)
    beta, S = xorgame.bias_xor_form(g, q)
    emit({"beta": beta, "argmax_set": S}, args.format, out)


def cmd_worst(args, out):
    g = load_fn(args.g, args.n)
    q, beta = xorgame.worst_distribution(g)
    record = {"beta": beta, "argmax_set": xorgame.bias_xor_form(g, q)[1], "q": q.weights}
    rows = [[z, w] for z, w in enumerate(q.weights)]
    emit(record, args.format, out, ["z", "q"], rows if args.format == "csv" else None)


def cmd_eq_lambda(args, out):
    lam, beta = xorgame.eq_worst_product_lambda(args.n)
    emit({"n": args.n, "lambda": lam, "beta": beta}, args.format, out)


def cmd_chsh(args, out):
    box = nlbox.IsotropicBox(args.delta).distribution()
    emit({"p_chsh": nlbox.chsh_probability(box)}, args.format, out)


def cmd_compile(args, out):
    path = Path(args.tree)
    tree = compiler.ProtocolTree.from_json(path.read_text(), base=path.parent)
    strategy = compiler.compile(tree)
    f = load_fn(args.fn, 2 * tree.n) if args.fn else tree.function()
    mu = load_pair_distribution(args.mu, tree.n)
    record = {
        "n": tree.n,
        "depth": tree.depth,
        "boxes": strategy.num_boxes,
        "delta": args.delta,
        "exact_bias": compiler.exact_bias(strategy, f, mu, args.delta),
    }
    threads = _threads(args.threads)
    if args.simulate:
        rep = compiler.simulate(strategy, f, mu, args.delta, args.simulate, args.seed, threads)
        record["simulation"] = rep.as_dict()
        if args.baseline:
            base = compiler.buhrman_baseline(tree, f, mu, args.simulate, args.seed, threads)
            record["baseline"] = base.as_dict()
    emit(record, args.format, out)


def classify_rows(n: int, epsilon: float = approxnorm.KKT_EPSILON, indices=None):
    """Per-function rows (fn_index, member, l1, approx_l1, tight)."""
    if indices is None:
        indices = range(1 << (1 << n))
    for t in indices:
        f = BoolFn.from_int(n, int(t))
        member, _ = approxnorm.in_fstarstar(f, cross_check=False)
        res = approxnorm.approx_l1(f, epsilon)
        yield [int(t), member, fwht(f).l1, res.value, res.tight]


def cmd_classify(args, out):
    threads = _threads(args.threads)
    mode = "sample" if args.sample else "full"
    if args.format == "csv":
        if mode == "sample":
            rng = np.random.default_rng(args.seed)
            idx = rng.integers(0, 1 << (1 << args.n), size=args.sample, dtype=np.uint64)
        else:
            idx = range(min(1 << (1 << args.n), args.budget or (1 << (1 << args.n))))
        rows = classify_rows(args.n, args.epsilon, idx)
        emit({}, "csv", out, ["fn_index", "member", "l1", "approx_l1", "tight"], rows)
        return
    res = approxnorm.classify_all(
        args.n, mode, args.budget, sample=args.sample or 0, seed=args.seed,
        symmetry=args.symmetry, cross_check=args.cross_check,
        checkpoint=args.checkpoint, threads=threads,
    )
    emit(res.as_dict(), "json", out)


def _bound_record(name, inputs, value):
    return bounds.BoundReport(name, inputs, value).as_dict()


def cmd_bound(args, out):
    kind = args.kind
    if kind == "discrepancy":
        rec = _bound_record(kind, {"rho": args.rho, "beta": args.beta},
                            bounds.discrepancy_bound(args.rho, args.beta))
    elif kind == "nlbox":
        rec = _bound_record(kind, {"rho": args.rho, "delta": args.delta, "beta_nl": args.beta},
                            bounds.nlbox_bound(args.rho, args.delta, args.beta))
    elif kind == "exm":
        general, product = bounds.equality_constants()
        rec = {"name": kind, "inputs": {}, "general": general, "product": product}
    elif kind == "ls":
        g = load_fn(args.g, args.n)
        rec = _bound_record(kind, {"g": args.g, "n": g.n, "epsilon": args.epsilon},
                            bounds.ls_xor_bound(g, args.epsilon))
    else:
        lam, value = bounds.ic_bound_maximize(args.extra)
        rec = {"name": kind, "inputs": {"extra": args.extra}, "lambda_star": lam, "value": value}
    emit(rec, args.format, out)


# -- parser -------------------------------------------------------------------

def _common(p):
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xgl", description="XOR games, nonlocal boxes and communication lower bounds.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = _common(sub.add_parser("fourier", help="Fourier spectrum of a boolean function"))
    p.add_argument("--fn", required=True, help="truth-table file, hex table, or builtin name")
    p.add_argument("--n", type=int, help="arity (needed for builtins and hex)")
    p.set_defaults(run=cmd_fourier)

    p = _common(sub.add_parser("norms", help="spectral norms and the approximate l1 norm"))
    p.add_argument("--fn", required=True, help="truth-table file, hex table, or builtin name")
    p.add_argument("--n", type=int, help="arity (needed for builtins and hex)")
    p.add_argument("--epsilon", type=float, help="approximation radius (enables the LP)")
    p.set_defaults(run=cmd_norms)

    p = _common(sub.add_parser("bias", help="bias of the XOR game g(x^y) under density q"))
    p.add_argument("--g", required=True, help="truth-table file, hex table, or builtin name")
    p.add_argument("--n", type=int, help="arity")
    p.add_argument("--q", default="uniform", help="uniform, product:NU0, or density file")
    p.set_defaults(run=cmd_bias)

    p = _common(sub.add_parser("worst-dist", help="density minimizing the XOR-game bias"))
    p.add_argument("--g", required=True, help="truth-table file, hex table, or builtin name")
    p.add_argument("--n", type=int, help="arity")
    p.set_defaults(run=cmd_worst)

    p = _common(sub.add_parser("eq-lambda", help="worst i.i.d. bit distribution for equality"))
    p.add_argument("--n", type=int, required=True, help="input length (>= 2)")
    p.set_defaults(run=cmd_eq_lambda)

    p = _common(sub.add_parser("chsh", help="CHSH winning probability of an isotropic box"))
    p.add_argument("--delta", type=float, required=True, help="box bias in [0, 1]")
    p.set_defaults(run=cmd_chsh)

    p = _common(sub.add_parser("compile", help="compile a protocol tree into a box strategy"))
    p.add_argument("--tree", required=True, help="protocol tree JSON file")
    p.add_argument("--delta", type=float, required=True, help="box bias in [0, 1]")
    p.add_argument("--mu", default="uniform", help="uniform or pair-density file (arity 2n)")
    p.add_argument("--fn", help="target pair function (default: the tree's own function)")
    p.add_argument("--simulate", type=int, metavar="N", help="Monte Carlo samples")
    p.add_argument("--baseline", action="store_true", help="also run the transcript-guessing baseline")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=int, help="worker threads (default $XGL_THREADS or 1)")
    p.set_defaults(run=cmd_compile)

    p = _common(sub.add_parser("classify", help="count functions in f** by enumeration or sampling"))
    p.add_argument("--n", type=int, required=True, help="arity (<= 5)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--full", action="store_true", help="enumerate every function (default)")
    mode.add_argument("--sample", type=int, metavar="K", help="test K random functions")
    p.add_argument("--budget", type=int, help="stop full enumeration after this many tables")
    p.add_argument("--checkpoint", help="directory for resumable progress")
    p.add_argument("--symmetry", action="store_true", help="test one function per symmetry orbit")
    p.add_argument("--cross-check", action="store_true", help="compare with approximate-norm tightness")
    p.add_argument("--epsilon", type=float, default=approxnorm.KKT_EPSILON, help="radius for CSV rows")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--threads", type=int, help="worker processes (default $XGL_THREADS or 1)")
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("bound", help="closed-form lower bounds in bits")
    kinds = p.add_subparsers(dest="kind", required=True, metavar="KIND")
    k = _common(kinds.add_parser("discrepancy", help="log(rho / beta)"))
    k.add_argument("--rho", type=float, required=True)
    k.add_argument("--beta", type=float, required=True)
    k = _common(kinds.add_parser("nlbox", help="log(rho / beta) / log(1 / delta)"))
    k.add_argument("--rho", type=float, required=True)
    k.add_argument("--delta", type=float, required=True)
    k.add_argument("--beta", type=float, required=True, help="box-assisted bias")
    _common(kinds.add_parser("exm", help="equality constants with Tsirelson boxes"))
    k = _common(kinds.add_parser("ls", help="spectral-norm bound for XOR functions"))
    k.add_argument("--g", required=True, help="truth-table file, hex table, or builtin name")
    k.add_argument("--n", type=int, help="arity")
    k.add_argument("--epsilon", type=float, default=0.0)
    k = _common(kinds.add_parser("ic", help="maximize h(l) + extra (1 - l)"))
    k.add_argument("--extra", type=float, required=True, help="extra bits per direction")
    p.set_defaults(run=cmd_bound)
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    buf = io.StringIO()
    try:
        args.run(args, buf)
    except (CapacityError, SolverError, InconsistencyError, GuaranteeViolation) as exc:
        err.write(f"xgl: {exc}\n")
        return EXIT_SOLVER
    except (ValueError, OSError, KeyError) as exc:
        err.write(f"xgl: {exc}\n")
        return EXIT_INPUT
    out.write(buf.getvalue())
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
