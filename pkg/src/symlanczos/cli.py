"""``slq`` command line: Estrada index, variance and error experiments, quadrature inspection.

Exit codes: 0 success, 2 bad input (arguments or file), 3 estimator and
matrix structure do not fit, 4 numerical failure, 5 dense oracle too large.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import (
    EstimatorConfig,
    ScalarFunction,
    SampleStream,
    estrada_index,
    spectral_radius,
)
from .experiments import (
    ORACLE_LIMIT,
    error_vs_queries,
    reference_case,
    sample_variance,
    summarize_errors,
    synthetic_jordan_wielandt,
    variance_experiment,
)
from .lanczos import tridiagonalize
from .linop import (
    DenseSymmetric,
    JordanWielandtOperator,
    MatrixMarketError,
    as_operator,
    detect_jordan_wielandt_split,
    read_matrix_market,
    split_jordan_wielandt,
)
from .quadrature import (
    QuadratureEvaluationError,
    classify_symmetry,
    golub_welsch,
    measure_oracle,
)
from .spectral import ConvergenceError

__all__ = ["main", "build_parser", "cmd_estrada", "cmd_variance", "cmd_error_vs_queries", "cmd_inspect"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STRUCTURE = 3
EXIT_NUMERICAL = 4
EXIT_ORACLE = 5

ESTIMATORS = {
    "hutchinson": ("slq", "full_rademacher"),
    "partial-upper": ("slq", "upper_partial"),
    "partial-lower": ("slq", "lower_partial"),
    "hutchpp": ("hutchpp", "full_rademacher"),
}
FAMILY_LABELS = {"lower_partial": "lower", "upper_partial": "upper", "full_rademacher": "full"}


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# matrix loading


def _load_matrix(path):
    try:
        return read_matrix_market(path)
    except FileNotFoundError:
        raise CliError(EXIT_INPUT, f"cannot read {path}: no such file") from None
    except (OSError, MatrixMarketError) as exc:
        raise CliError(EXIT_INPUT, f"cannot parse {path}: {exc}") from None


def _file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _as_jordan_wielandt(mat, bipartize=False, split=None):
    """Rectangular ``B`` or a stored ``[[0, B], [B^T, 0]]`` as an operator."""
    n_rows, n_cols = mat.shape
    if bipartize:
        if n_rows != n_cols:
            raise CliError(EXIT_STRUCTURE, f"--bipartize needs a square adjacency matrix, got {n_rows}x{n_cols}")
        return JordanWielandtOperator(mat)
    if n_rows != n_cols:
        return JordanWielandtOperator(mat)
    if split is None:
        split = detect_jordan_wielandt_split(mat)
        if split is None:
            raise CliError(
                EXIT_STRUCTURE,
                "matrix is not of the form [[0, B], [B^T, 0]] under any split; "
                "use --bipartize for a directed adjacency matrix or a full-Rademacher estimator",
            )
    try:
        return split_jordan_wielandt(mat, int(split))
    except ValueError as exc:
        raise CliError(EXIT_STRUCTURE, f"--split {split}: {exc}") from None


def _as_symmetric(mat, bipartize=False):
    n_rows, n_cols = mat.shape
    if bipartize or n_rows != n_cols:
        return _as_jordan_wielandt(mat, bipartize=bipartize)
    if not mat.is_symmetric():
        raise CliError(EXIT_STRUCTURE, "matrix is not symmetric; pass --bipartize for a directed graph")
    return as_operator(mat)


def _operator_for(mat, family, bipartize, split):
    if family == "full_rademacher":
        return _as_symmetric(mat, bipartize)
    return _as_jordan_wielandt(mat, bipartize, split)


def _resolve_seed(flag):
    if flag is not None:
        return flag
    env = os.environ.get("SLQ_SEED")
    if env is None or env == "":
        return 0
    try:
        seed = int(env)
    except ValueError:
        raise CliError(EXIT_INPUT, f"SLQ_SEED must be an integer, got {env!r}") from None
    if seed < 0:
        raise CliError(EXIT_INPUT, "SLQ_SEED must be nonnegative")
    return seed


def _reorth(value):
    return None if value == "auto" else value


# ---------------------------------------------------------------------------
# output


def _finite_or_fail(value, what):
    if not math.isfinite(value):
        raise CliError(EXIT_NUMERICAL, f"{what} is not finite ({value!r}); try a smaller beta")
    return value


def _manifest(command, args, seed, extra=None):
    # the output location is not part of the computation, so reruns into other files match
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "command", "out")}
    flags["seed"] = seed
    out = {"command": command, "flags": flags, "seed": seed, "version": __version__}
    if extra:
        out.update(extra)
    return out


def _json_text(payload):
    # repr-based floats: shortest string that round-trips the double
    return json.dumps(payload, indent=2, allow_nan=False, sort_keys=False) + "\n"


def _csv_text(header, rows, manifest):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(x) for x in row])
    pad = [""] * (len(header) - 3)
    for key, value in manifest.items():
        writer.writerow(["#manifest", key, json.dumps(value, sort_keys=True)] + pad)
    return buf.getvalue()


def _csv_cell(x):
    if isinstance(x, float):
        return format(x, ".12g")
    return "" if x is None else x


def _emit(text, out, manifest, started, summary):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text, newline="")
    elapsed = time.perf_counter() - started
    sidecar = dict(manifest, wall_clock_seconds=elapsed)
    Path(str(path) + ".manifest.json").write_text(_json_text(sidecar))
    print(f"{summary}; wrote {path} in {elapsed:.3f} s")


# ---------------------------------------------------------------------------
# commands


def cmd_estrada(args) -> int:
    started = time.perf_counter()
    seed = _resolve_seed(args.seed)
    method, family = ESTIMATORS[args.estimator]
    mat = _load_matrix(args.matrix)
    op = _operator_for(mat, family, args.bipartize, args.split)
    lmax = None
    if args.beta_over_lmax is not None:
        lmax = spectral_radius(op)
        beta = args.beta_over_lmax / lmax if lmax > 0 else 0.0
    else:
        beta = args.beta
    if method == "hutchpp" and args.N < 3:
        raise CliError(EXIT_INPUT, "hutchpp needs --N >= 3 (the total query budget)")
    cfg = EstimatorConfig(args.N, args.m, seed, family, ScalarFunction("exp", beta), _reorth(args.reorth), method)
    report = estrada_index(op, beta, cfg)
    _finite_or_fail(report.estimate, "estimate")

    info = {
        "estimator": args.estimator,
        "beta": beta,
        "lambda_max": lmax,
        "dimension": op.dimension,
        "n1": getattr(op, "n1", None),
        "n2": getattr(op, "n2", None),
    }
    manifest = _manifest("estrada", args, seed, {"matrix_sha256": _file_digest(args.matrix)})
    if args.format == "json":
        payload = dict(report.to_dict(), **info, manifest=manifest)
        text = _json_text(payload)
    else:
        rows = [
            ("estimate", None, report.estimate),
            ("std_error", None, report.std_error),
            ("sample_variance", None, report.sample_variance),
            ("constant_term", None, report.constant_term),
            ("beta", None, float(beta)),
        ]
        if lmax is not None:
            rows.append(("lambda_max", None, float(lmax)))
        rows.extend(("sample", i, float(v)) for i, v in enumerate(report.samples))
        text = _csv_text(["quantity", "index", "value"], rows, manifest)
    summary = f"estimate={report.estimate:.12g} std_error={report.std_error:.3g}"
    _emit(text, args.out, manifest, started, summary)
    return EXIT_OK


def _function_from(args, op):
    scale = args.beta
    if getattr(args, "beta_over_lmax", None) is not None:
        lmax = spectral_radius(op)
        scale = args.beta_over_lmax / lmax if lmax > 0 else 0.0
    return ScalarFunction(args.function, scale)


def _experiment_operator(args, need_jw=True, limit=None):
    if args.synthetic is not None:
        if args.matrix is not None:
            raise CliError(EXIT_INPUT, "give either MATRIX or --synthetic, not both")
        n1, n2, seed = args.synthetic
        if n1 < 1 or n2 < 1 or seed < 0:
            raise CliError(EXIT_INPUT, "--synthetic needs positive block sizes and a nonnegative seed")
        if limit is not None and n1 + n2 > limit:
            _oracle_too_large(n1 + n2)
        return synthetic_jordan_wielandt(n1, n2, seed), None
    if args.matrix is None:
        raise CliError(EXIT_INPUT, "give a MATRIX file or --synthetic N1 N2 SEED")
    mat = _load_matrix(args.matrix)
    if need_jw:
        return _as_jordan_wielandt(mat, args.bipartize, args.split), _file_digest(args.matrix)
    return _as_symmetric(mat, args.bipartize), _file_digest(args.matrix)


def cmd_variance(args) -> int:
    started = time.perf_counter()
    seed = _resolve_seed(args.seed)
    op, digest = _experiment_operator(args)
    f = _function_from(args, op)
    samples = variance_experiment(op, args.trials, args.m, f, seed, _reorth(args.reorth))
    variances = {FAMILY_LABELS[k]: sample_variance(v) for k, v in samples.items()}
    for fam, v in samples.items():
        if not np.all(np.isfinite(v)):
            raise CliError(EXIT_NUMERICAL, f"non-finite samples for the {FAMILY_LABELS[fam]} family")
    manifest = _manifest("variance", args, seed, {"matrix_sha256": digest, "function_scale": f.scale})
    order = sorted(samples, key=lambda k: FAMILY_LABELS[k])
    if args.format == "json":
        payload = {
            "function": f.describe(),
            "trials": args.trials,
            "samples": {FAMILY_LABELS[k]: [float(x) for x in samples[k]] for k in order},
            "variances": {FAMILY_LABELS[k]: variances[FAMILY_LABELS[k]] for k in order},
            "manifest": manifest,
        }
        text = _json_text(payload)
    else:
        rows = []
        for k in order:
            rows.extend(("sample", t, FAMILY_LABELS[k], float(x)) for t, x in enumerate(samples[k]))
        rows.extend(("variance", None, FAMILY_LABELS[k], variances[FAMILY_LABELS[k]]) for k in order)
        text = _csv_text(["record", "trial", "family", "value"], rows, manifest)
    summary = " ".join(f"var({k})={v:.6g}" for k, v in sorted(variances.items()))
    _emit(text, args.out, manifest, started, summary)
    return EXIT_OK


def _oracle_too_large(n):
    raise CliError(
        EXIT_ORACLE,
        f"dimension {n} exceeds the dense-oracle limit {ORACLE_LIMIT}; "
        "relative errors need the exact trace, use the variance command instead",
    )


def cmd_error_vs_queries(args) -> int:
    started = time.perf_counter()
    seed = _resolve_seed(args.seed)
    need_jw = any(e.startswith("partial") for e in args.estimators)
    op, digest = _experiment_operator(args, need_jw=need_jw, limit=ORACLE_LIMIT)
    if op.dimension > ORACLE_LIMIT:
        _oracle_too_large(op.dimension)
    if "hutchpp" in args.estimators and min(args.queries) < 3:
        raise CliError(EXIT_INPUT, "hutchpp needs every query budget >= 3")
    f = _function_from(args, op)
    rows = error_vs_queries(op, args.queries, args.trials, args.m, f, seed, tuple(args.estimators),
                            _reorth(args.reorth))
    if not all(math.isfinite(r.estimate) for r in rows):
        raise CliError(EXIT_NUMERICAL, "an estimate is not finite")
    table = summarize_errors(rows)
    manifest = _manifest("error-vs-queries", args, seed, {"matrix_sha256": digest, "function_scale": f.scale})
    if args.format == "json":
        payload = {
            "function": f.describe(),
            "rows": [dict(zip(("estimator", "queries", "p25", "p50", "p75"), r)) for r in table],
            "manifest": manifest,
        }
        text = _json_text(payload)
    else:
        text = _csv_text(["estimator", "queries", "p25", "p50", "p75"], table, manifest)
    summary = f"{len(table)} rows, {len(rows)} trials"
    _emit(text, args.out, manifest, started, summary)
    return EXIT_OK


def _inspect_vector(args, op):
    spec = args.vector
    n = op.dimension
    if spec == "ones":
        return np.ones(n)
    if spec.startswith("file:"):
        path = spec[5:]
        try:
            v = np.loadtxt(path, dtype=float, ndmin=1)
        except (OSError, ValueError) as exc:
            raise CliError(EXIT_INPUT, f"cannot read vector file {path}: {exc}") from None
        if v.shape != (n,) or not np.all(np.isfinite(v)) or not np.any(v != 0):
            raise CliError(EXIT_INPUT, f"vector file must hold {n} finite values, not all zero")
        return v
    if spec in ("partial-upper", "partial-lower"):
        if not isinstance(op, JordanWielandtOperator):
            raise CliError(EXIT_STRUCTURE, f"--vector {spec} needs a [[0, B], [B^T, 0]] matrix")
        fam = "upper_partial" if spec == "partial-upper" else "lower_partial"
        seed = _resolve_seed(args.seed)
        v = np.zeros(n)
        if fam == "upper_partial":
            v[: op.n1] = SampleStream(seed, fam).vector(0, op.n1)
        else:
            v[op.n1 :] = SampleStream(seed, fam).vector(0, op.n2)
        return v
    raise CliError(EXIT_INPUT, f"unknown --vector {spec!r}")


def cmd_inspect(args) -> int:
    started = time.perf_counter()
    seed = _resolve_seed(args.seed)
    digest = None
    if args.case is not None:
        if args.matrix is not None:
            raise CliError(EXIT_INPUT, "give either MATRIX or --case, not both")
        case = reference_case(args.case)
        op = DenseSymmetric(case.matrix)
        v = case.vector if args.vector is None else _inspect_vector(args, op)
    else:
        if args.matrix is None:
            raise CliError(EXIT_INPUT, "give a MATRIX file or --case")
        mat = _load_matrix(args.matrix)
        digest = _file_digest(args.matrix)
        partial = args.vector in ("partial-upper", "partial-lower")
        op = _as_jordan_wielandt(mat, args.bipartize, args.split) if partial else _as_symmetric(mat, args.bipartize)
        v = _inspect_vector(args, op) if args.vector else np.ones(op.dimension)
    n = op.dimension
    result = tridiagonalize(op, v, min(args.m, n), reorth=_reorth(args.reorth))
    rule = golub_welsch(result.jacobi)

    oracle = None
    if n <= ORACLE_LIMIT:
        lam, Q = np.linalg.eigh(op.toarray() if hasattr(op, "toarray") else op.matmat(np.eye(n)))
        mu = Q.T @ (v / np.linalg.norm(v))
        oracle = measure_oracle(lam, mu)
    if args.shift == "auto":
        if oracle is not None:
            shift = 0.5 * (oracle.breakpoints[0] + oracle.breakpoints[-1])
        else:
            shift = 0.5 * (rule.nodes[0] + rule.nodes[-1])
    else:
        try:
            shift = float(args.shift)
        except ValueError:
            raise CliError(EXIT_INPUT, f"--shift must be a number or 'auto', got {args.shift!r}") from None
    report = classify_symmetry(rule, shift, args.tol)

    manifest = _manifest("inspect", args, seed, {"matrix_sha256": digest})
    payload = {
        "dimension": n,
        "steps": result.effective_m,
        "breakdown": result.breakdown,
        "alpha": result.jacobi.alpha.tolist(),
        "beta": result.jacobi.beta.tolist(),
        "nodes": rule.nodes.tolist(),
        "weights": rule.weights.tolist(),
        "symmetry": report._asdict(),
        "measure": None,
        "manifest": manifest,
    }
    if oracle is not None:
        payload["measure"] = {
            "breakpoints": oracle.breakpoints.tolist(),
            "increments": oracle.increments.tolist(),
            "cumulative": oracle(oracle.breakpoints).tolist(),
        }
    text = _json_text(payload)
    summary = f"{report.classification} about {shift:.6g} with {len(rule)} nodes"
    _emit(text, args.out, manifest, started, summary)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return value


def _finite(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("expected a finite number")
    return value


def _common(p, with_split=True):
    p.add_argument("--seed", type=_seed, default=None, help="random seed (default: $SLQ_SEED or 0)")
    p.add_argument("--reorth", choices=["auto", "none", "full"], default="auto",
                   help="reorthogonalization; auto means full when m > 30")
    p.add_argument("--bipartize", action="store_true",
                   help="treat a square matrix as a directed adjacency B and use [[0, B], [B^T, 0]]")
    if with_split:
        p.add_argument("--split", type=_positive_int, default=None,
                       help="size n1 of the first block of a stored [[0, B], [B^T, 0]] matrix")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def _synthetic(p):
    p.add_argument("--synthetic", nargs=3, type=int, metavar=("N1", "N2", "SEED"), default=None,
                   help="random [[0, B], [B^T, 0]] with B = U diag(sigma) V^T")


def _function_flags(p, default_scale=1.0):
    p.add_argument("--function", choices=["exp", "identity", "square"], default="exp")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--beta", type=_finite, default=default_scale, help="scale inside the function")
    g.add_argument("--beta-over-lmax", type=_finite, default=None,
                   help="scale = value / lambda_max, lambda_max by power iteration")


def build_parser():
    parser = argparse.ArgumentParser(prog="slq", description="Stochastic Lanczos quadrature tools")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estrada", help="estimate tr(exp(beta A)) for a Matrix Market graph")
    p.add_argument("matrix", help="Matrix Market file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--beta", type=_finite, default=1.0)
    g.add_argument("--beta-over-lmax", type=_finite, default=None)
    p.add_argument("--estimator", choices=sorted(ESTIMATORS), default="hutchinson")
    p.add_argument("--N", type=_positive_int, default=100, help="samples (query budget for hutchpp)")
    p.add_argument("--m", type=_positive_int, default=30, help="Lanczos steps per sample")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _common(p)
    p.set_defaults(handler=cmd_estrada)

    p = sub.add_parser("variance", help="per-family variance of single-sample trace estimates")
    p.add_argument("matrix", nargs="?", default=None)
    _synthetic(p)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--m", type=_positive_int, default=50)
    _function_flags(p)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    _common(p)
    p.set_defaults(handler=cmd_variance)

    p = sub.add_parser("error-vs-queries", help="relative error percentiles against query budget")
    p.add_argument("matrix", nargs="?", default=None)
    _synthetic(p)
    p.add_argument("--queries", type=_positive_int, nargs="+", default=[30, 60, 120])
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--m", type=_positive_int, default=50)
    p.add_argument("--estimators", nargs="+", choices=sorted(ESTIMATORS),
                   default=["hutchinson", "hutchpp", "partial-upper"])
    _function_flags(p)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    _common(p)
    p.set_defaults(handler=cmd_error_vs_queries)

    p = sub.add_parser("inspect", help="Lanczos quadrature nodes, weights and symmetry for one vector")
    p.add_argument("matrix", nargs="?", default=None)
    p.add_argument("--case", type=int, choices=[1, 2, 3], default=None,
                   help="built-in 50x50 test matrix H diag(lam) H^T")
    p.add_argument("--vector", default=None,
                   help="ones | partial-upper | partial-lower | file:PATH (default: ones, or the case vector)")
    p.add_argument("--m", type=_positive_int, default=10)
    p.add_argument("--shift", default="auto", help="symmetry centre, or 'auto' for the spectrum midpoint")
    p.add_argument("--tol", type=_finite, default=1e-8)
    _common(p)
    p.set_defaults(handler=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"slq: error: {exc}", file=sys.stderr)
        return exc.code
    except (ConvergenceError, QuadratureEvaluationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"slq: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"slq: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
