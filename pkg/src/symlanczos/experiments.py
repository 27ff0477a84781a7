"""Test-matrix generators and the variance / error-vs-queries experiment drivers."""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .estimators import (
    ScalarFunction,
    draw_samples,
    hutchpp_trace,
    partial_constant_term,
)
from .linop import JordanWielandtOperator, to_dense

__all__ = [
    "ReferenceCase",
    "reference_case",
    "synthetic_jordan_wielandt",
    "dense_trace",
    "variance_experiment",
    "error_vs_queries",
    "sample_variance",
    "summarize_errors",
    "QueryTrial",
    "ESTIMATOR_FAMILIES",
    "ORACLE_LIMIT",
]

ORACLE_LIMIT = 2000
ESTIMATOR_FAMILIES = {
    "hutchinson": "full_rademacher",
    "partial-upper": "upper_partial",
    "partial-lower": "lower_partial",
}


class ReferenceCase(NamedTuple):
    matrix: np.ndarray
    vector: np.ndarray
    eigenvalues: np.ndarray
    center: float  # midpoint of the spectrum


def reference_case(number: int, n: int = 50) -> ReferenceCase:
    """Dense ``H diag(lam) H^T`` with ``H = I - (2/n) 1 1^T`` and a unit start vector.

    1: ``lam_i = i/n``, ``v = 1``; 2: ``lam_i = 1/(n+1-i)``, ``v = 1``;
    3: ``lam_i = i/n``, ``v = (1, ..., n)``.
    """
    i = np.arange(1, n + 1, dtype=float)
    if number == 1:
        lam, v = i / n, np.ones(n)
    elif number == 2:
        lam, v = 1.0 / (n + 1 - i), np.ones(n)
    elif number == 3:
        lam, v = i / n, i.copy()
    else:
        raise ValueError(f"reference cases are 1, 2 and 3; got {number}")
    H = np.eye(n) - (2.0 / n) * np.ones((n, n))
    A = H @ np.diag(lam) @ H.T
    A = 0.5 * (A + A.T)
    return ReferenceCase(A, v / np.linalg.norm(v), lam, 0.5 * (lam[0] + lam[-1]))


def synthetic_jordan_wielandt(n1: int, n2: int, seed: int = 0) -> JordanWielandtOperator:
    """``B = U diag(sigma) V^T`` with orthogonalized Gaussian ``U``, ``V`` and normal ``sigma``."""
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.standard_normal((n1, n1)))
    V, _ = np.linalg.qr(rng.standard_normal((n2, n2)))
    r = min(n1, n2)
    sigma = rng.standard_normal(r)
    B = (U[:, :r] * sigma) @ V[:, :r].T
    return JordanWielandtOperator(B)


def dense_trace(op, f) -> float:
    """``sum f(lambda_i)`` from a dense symmetric eigendecomposition."""
    n = op.dimension
    if n > ORACLE_LIMIT:
        raise ValueError(f"dimension {n} exceeds the dense oracle limit {ORACLE_LIMIT}")
    lam = np.linalg.eigvalsh(to_dense(op))
    return float(np.sum(f(lam)))


def variance_experiment(op, trials: int, m: int, function=None, seed: int = 0, reorth=None,
                        families: Sequence[str] = ("lower_partial", "upper_partial", "full_rademacher")):
    """Single-sample estimates of ``tr f(A)`` for each vector family.

    Returns ``{family: samples}``; trial ``t`` of a family is its sample ``t``.
    Partial samples include the doubling and the constant term, so every
    family estimates the same trace.
    """
    f = ScalarFunction() if function is None else function
    out = {}
    for fam in families:
        vals, _ = draw_samples(op, fam, f, m, seed, 0, int(trials), reorth)
        out[fam] = vals + partial_constant_term(op, fam, f)
    return out


def sample_variance(samples) -> float:
    samples = np.asarray(samples, dtype=float)
    return float(np.var(samples, ddof=1)) if samples.size > 1 else 0.0


class QueryTrial(NamedTuple):
    estimator: str
    queries: int
    trial: int
    estimate: float
    relative_error: float


def error_vs_queries(op, queries: Sequence[int], trials: int, m: int, function=None, seed: int = 0,
                     estimators: Sequence[str] = ("hutchinson", "partial-upper", "hutchpp"),
                     reorth=None, exact=None):
    """Relative errors of each estimator for each query budget over ``trials`` repetitions.

    A budget of ``q`` queries means ``q`` Lanczos quadratic forms per estimate.
    For the sampling estimators, trial ``t`` at the ``j``-th budget uses its
    own disjoint range of sample indices. Returns a list of
    :class:`QueryTrial` sorted by (estimator, queries, trial).
    """
    f = ScalarFunction() if function is None else function
    if exact is None:
        exact = dense_trace(op, f)
    scale = abs(exact) if exact != 0 else 1.0
    queries = [int(q) for q in queries]
    trials = int(trials)
    rows = []
    for name in estimators:
        if name == "hutchpp":
            for q in queries:
                for t in range(trials):
                    sub = int(np.random.SeedSequence([seed, q, t]).generate_state(1)[0])
                    est = hutchpp_trace(op, q, m, sub, f, reorth).estimate
                    rows.append(QueryTrial(name, q, t, est, abs(est - exact) / scale))
            continue
        if name not in ESTIMATOR_FAMILIES:
            raise ValueError(f"unknown estimator {name!r}")
        fam = ESTIMATOR_FAMILIES[name]
        total = trials * sum(queries)
        vals, _ = draw_samples(op, fam, f, m, seed, 0, total, reorth)
        const = partial_constant_term(op, fam, f)
        pos = 0
        for q in queries:
            for t in range(trials):
                est = float(np.mean(vals[pos : pos + q])) + const
                pos += q
                rows.append(QueryTrial(name, q, t, est, abs(est - exact) / scale))
    rows.sort(key=lambda r: (r.estimator, r.queries, r.trial))
    return rows


def summarize_errors(rows):
    """``[(estimator, queries, p25, p50, p75)]`` of relative error, sorted."""
    groups = {}
    for r in rows:
        groups.setdefault((r.estimator, r.queries), []).append(r.relative_error)
    out = []
    for key in sorted(groups):
        p25, p50, p75 = np.percentile(groups[key], [25, 50, 75])
        out.append((key[0], key[1], float(p25), float(p50), float(p75)))
    return out
