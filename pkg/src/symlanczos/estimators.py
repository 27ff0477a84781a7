"""Stochastic trace estimators built on Lanczos quadrature.

Three estimators are provided:

* Hutchinson with full Rademacher vectors: ``tr f(A) ~ mean_k z_k^T f(A) z_k``.
* Partial Rademacher for Jordan-Wielandt operators. Only one block of ``z`` is
  random. The quadrature is then symmetric and each sample is
  ``2 z^T f(A) z``. A constant ``(n2 - n1) f(0)`` (upper block) or
  ``(n1 - n2) f(0)`` (lower block) keeps the estimate unbiased when
  ``n1 != n2``.
* Hutch++, as a baseline.

Random vectors come from counter-based Philox streams. Sample ``i`` depends
only on ``(seed, stream, i)``, so results do not depend on how the samples
are chunked.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .lanczos import resolve_reorth, tridiagonalize_many
from .linop import JordanWielandtOperator, one_norm
from .quadrature import QuadratureEvaluationError, golub_welsch
from .spectral import eig_tridiagonal_batch

__all__ = [
    "ScalarFunction",
    "SampleStream",
    "EstimatorConfig",
    "EstimatorReport",
    "rademacher_vector",
    "quadratic_forms",
    "family_block",
    "draw_samples",
    "partial_constant_term",
    "hutchinson_trace",
    "partial_rademacher_trace",
    "hutchpp_trace",
    "estrada_index",
    "spectral_radius",
    "VECTOR_FAMILIES",
]

VECTOR_FAMILIES = ("full_rademacher", "upper_partial", "lower_partial")
_FLOAT_BUDGET = 4_000_000  # floats per Lanczos chunk (basis + work arrays)


@dataclass(frozen=True)
class ScalarFunction:
    """Named scalar function applied node-wise.

    ``exp``: ``exp(scale * t)``; ``identity``: ``scale * t``;
    ``square``: ``(scale * t) ** 2``.
    """

    name: str = "exp"
    scale: float = 1.0

    _KINDS = ("exp", "identity", "square")

    def __post_init__(self):
        if self.name not in self._KINDS:
            raise ValueError(f"unknown function {self.name!r}; choose from {self._KINDS}")
        if not math.isfinite(self.scale):
            raise ValueError("function scale must be finite")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.name == "exp":
            return np.exp(self.scale * t)
        if self.name == "identity":
            return self.scale * t
        return (self.scale * t) ** 2

    @property
    def at_zero(self) -> float:
        return float(self(0.0))

    def describe(self) -> dict:
        return {"name": self.name, "scale": self.scale}


def _value_at_zero(f) -> float:
    if isinstance(f, ScalarFunction):
        return f.at_zero
    return float(np.asarray(f(np.zeros(1)), dtype=float).ravel()[0])


def _stream_key(seed: int, stream: Union[str, int]):
    tag = zlib.crc32(stream.encode()) if isinstance(stream, str) else int(stream)
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, tag])
    return ss.generate_state(2, np.uint64)


class SampleStream:
    """Counter-based Rademacher source; sample ``i`` reads Philox counter block ``i``."""

    def __init__(self, seed: int = 0, stream: Union[str, int] = 0):
        self.seed = int(seed)
        self.stream = stream
        self._key = _stream_key(self.seed, stream)

    def rademacher(self, start: int, count: int, n: int) -> np.ndarray:
        """Signs for samples ``start .. start + count - 1`` as an ``n x count`` array."""
        words = -(-n // 64)
        steps = -(-words // 4)
        bg = np.random.Philox(key=self._key)
        if start:
            bg.advance(int(start) * steps)
        raw = bg.random_raw(count * steps * 4).astype(np.uint64).reshape(count, steps * 4)[:, :words]
        bits = np.unpackbits(raw.view(np.uint8), axis=1, bitorder="little")[:, :n]
        return (bits.T.astype(float) * 2.0) - 1.0

    def vector(self, i: int, n: int) -> np.ndarray:
        return self.rademacher(i, 1, n)[:, 0]


def rademacher_vector(n: int, rng) -> np.ndarray:
    """Entries drawn independently from {-1, +1} with equal probability."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(rng, SampleStream):
        return rng.vector(0, n)
    return rng.integers(0, 2, size=n) * 2.0 - 1.0


@dataclass(frozen=True)
class EstimatorConfig:
    N: int = 100
    m: int = 50
    seed: int = 0
    vector_family: str = "full_rademacher"
    function: ScalarFunction = field(default_factory=ScalarFunction)
    reorth: Optional[str] = None
    method: str = "slq"  # "slq" or "hutchpp"

    def __post_init__(self):
        if int(self.N) < 1 or int(self.m) < 1:
            raise ValueError("N and m must be >= 1")
        if self.vector_family not in VECTOR_FAMILIES:
            raise ValueError(f"unknown vector family {self.vector_family!r}")
        if self.method not in ("slq", "hutchpp"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.reorth not in (None, "auto", "none", "full"):
            raise ValueError(f"unknown reorthogonalization policy {self.reorth!r}")

    def describe(self) -> dict:
        out = asdict(self)
        f = self.function
        out["function"] = f.describe() if isinstance(f, ScalarFunction) else repr(f)
        out["reorth"] = resolve_reorth(self.reorth, self.m)
        return out


@dataclass(frozen=True, eq=False)
class EstimatorReport:
    """Result of a stochastic trace estimate.

    ``samples`` hold the per-vector values after any doubling but before the
    constant term, so ``estimate == mean(samples) + constant_term`` for every
    estimator family.
    """

    estimate: float
    samples: np.ndarray
    sample_variance: float
    std_error: float
    constant_term: float
    config: dict
    rules: Optional[list] = field(default=None, repr=False)

    @classmethod
    def from_samples(cls, samples, constant_term, config, rules=None) -> "EstimatorReport":
        samples = np.asarray(samples, dtype=float)
        samples.setflags(write=False)
        N = samples.shape[0]
        mean = float(np.mean(samples)) if N else 0.0
        var = float(np.var(samples, ddof=1)) if N > 1 else 0.0
        se = math.sqrt(var / N) if N > 1 else 0.0
        return cls(mean + float(constant_term), samples, var, se, float(constant_term), config, rules)

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "constant_term": self.constant_term,
            "sample_variance": self.sample_variance,
            "std_error": self.std_error,
            "n_samples": int(self.samples.shape[0]),
            "samples": [float(x) for x in self.samples],
            "config": self.config,
        }


def _chunk_size(n: int, m: int, full: bool) -> int:
    per_col = n * (m + 4) if full else n * 6
    return int(max(1, min(4096, _FLOAT_BUDGET // per_col)))


def quadratic_forms(op, Z, f: Callable, m: int, reorth=None, keep_rules=False, norm=None):
    """Lanczos-quadrature approximations of ``z^T f(A) z`` for every column of ``Z``.

    Returns ``(values, rules)``; ``rules`` is a list of
    :class:`QuadratureRule` when ``keep_rules`` is set, else ``None``. Kept
    rules come from :func:`golub_welsch`, so zero-diagonal Jacobi matrices
    give exactly mirrored rules; the values come from the batched solver and
    agree with the rules to rounding.
    """
    Z = np.asarray(Z, dtype=float)
    n, N = Z.shape
    m = min(int(m), n)
    full = resolve_reorth(reorth, m) == "full"
    norm = one_norm(op) if norm is None else norm
    chunk = _chunk_size(n, m, full)
    values = np.empty(N)
    rules = [] if keep_rules else None
    for start in range(0, N, chunk):
        block = Z[:, start : start + chunk]
        batch = tridiagonalize_many(op, block, m, reorth=reorth, norm=norm)
        nodes, firsts = eig_tridiagonal_batch(batch.alpha, batch.beta, batch.lengths)
        valid = np.arange(nodes.shape[1])[None, :] < batch.lengths[:, None]
        fx = np.zeros_like(nodes)
        with np.errstate(all="ignore"):
            fx[valid] = np.asarray(f(nodes[valid]), dtype=float)
        if not np.all(np.isfinite(fx[valid])):
            raise QuadratureEvaluationError("f is not finite at a quadrature node")
        weights = np.where(valid, firsts**2, 0.0)
        values[start : start + block.shape[1]] = batch.norms_sq * np.einsum("ij,ij->i", weights, fx)
        if keep_rules:
            rules.extend(golub_welsch(batch.jacobi(i)) for i in range(block.shape[1]))
    return values, rules


def family_block(op, family: str, seed: int, start: int, count: int) -> np.ndarray:
    """Starting vectors ``start .. start + count - 1`` of a vector family, as columns."""
    n = op.dimension
    stream = SampleStream(seed, family)
    if family == "full_rademacher":
        return stream.rademacher(start, count, n)
    if family not in ("upper_partial", "lower_partial"):
        raise ValueError(f"unknown vector family {family!r}")
    if not isinstance(op, JordanWielandtOperator):
        raise TypeError("partial Rademacher vectors require a JordanWielandtOperator")
    upper = family == "upper_partial"
    Z = np.zeros((n, count))
    if upper:
        Z[: op.n1] = stream.rademacher(start, count, op.n1)
    else:
        Z[op.n1 :] = stream.rademacher(start, count, op.n2)
    return Z


def draw_samples(op, family: str, f, m: int, seed: int = 0, start: int = 0, count: int = 1,
                 reorth=None, keep_rules=False):
    """Per-vector estimator samples for sample indices ``start .. start + count - 1``.

    Full Rademacher samples are ``z^T f(A) z``; partial ones are doubled.
    Returns ``(samples, rules)``.
    """
    Z = family_block(op, family, seed, start, count)
    vals, rules = quadratic_forms(op, Z, f, m, reorth, keep_rules)
    if family != "full_rademacher":
        vals = 2.0 * vals
    return vals, rules


def partial_constant_term(op, family: str, f) -> float:
    """``(n2 - n1) f(0)`` for the upper family, ``(n1 - n2) f(0)`` for the lower one."""
    if family == "full_rademacher":
        return 0.0
    diff = op.n2 - op.n1 if family == "upper_partial" else op.n1 - op.n2
    return 0.0 if diff == 0 else diff * _value_at_zero(f)


def hutchinson_trace(op, cfg: EstimatorConfig, keep_rules=False) -> EstimatorReport:
    """Girard-Hutchinson with full Rademacher vectors and Lanczos quadrature."""
    if cfg.vector_family != "full_rademacher":
        raise ValueError("hutchinson_trace needs vector_family='full_rademacher'")
    vals, rules = draw_samples(op, "full_rademacher", cfg.function, cfg.m, cfg.seed, 0, cfg.N,
                               cfg.reorth, keep_rules)
    return EstimatorReport.from_samples(vals, 0.0, cfg.describe(), rules)


def partial_rademacher_trace(op, cfg: EstimatorConfig, keep_rules=False) -> EstimatorReport:
    """Unbiased trace estimate from half-filled Rademacher vectors on ``[[0, B], [B^T, 0]]``.

    Each sample is ``2 * z^T f(A) z`` with ``z`` supported on one block.
    The constant term is ``(n2 - n1) f(0)`` for the upper block and
    ``(n1 - n2) f(0)`` for the lower one; it vanishes when ``n1 == n2``.
    """
    if not isinstance(op, JordanWielandtOperator):
        raise TypeError("partial Rademacher estimation requires a JordanWielandtOperator")
    if cfg.vector_family not in ("upper_partial", "lower_partial"):
        raise ValueError("partial_rademacher_trace needs an upper_partial or lower_partial family")
    vals, rules = draw_samples(op, cfg.vector_family, cfg.function, cfg.m, cfg.seed, 0, cfg.N,
                               cfg.reorth, keep_rules)
    constant = partial_constant_term(op, cfg.vector_family, cfg.function)
    return EstimatorReport.from_samples(vals, constant, cfg.describe(), rules)


def _matfunc_columns(op, S, f, m, reorth, norm):
    # f(A) s ~ ||s|| V_k f(T_k) e_1, one Lanczos run per column
    batch = tridiagonalize_many(op, S, m, reorth=reorth, keep_basis=True, norm=norm)
    n, N = S.shape
    out = np.zeros((n, N))
    for j in range(N):
        k = int(batch.lengths[j])
        T = np.diag(batch.alpha[j, :k]) + np.diag(batch.beta[j, : k - 1], 1) + np.diag(batch.beta[j, : k - 1], -1)
        theta, psi = np.linalg.eigh(T)
        coef = psi @ (np.asarray(f(theta), dtype=float) * psi[0])
        out[:, j] = math.sqrt(batch.norms_sq[j]) * (batch.basis[:k, :, j].T @ coef)
    return out


def hutchpp_trace(op, total_queries: int, m: int, seed: int = 0, function=None, reorth=None) -> EstimatorReport:
    """Hutch++ with ``f(A)``-vector products and quadratic forms from Lanczos.

    The budget ``q`` splits into ``k = min(ceil(q/3), (q-1)//2, n)`` sketch
    products ``f(A) S``, ``k`` quadratic forms for ``tr(Q^T f(A) Q)``, and the
    remaining ``q - 2k`` Hutchinson samples on the deflated remainder.
    ``samples`` are the remainder quadratic forms and ``constant_term`` the
    projected trace.
    """
    q = int(total_queries)
    if q < 3:
        raise ValueError(f"Hutch++ needs a budget of at least 3 queries, got {q}")
    f = ScalarFunction() if function is None else function
    n = op.dimension
    k = min(-(-q // 3), (q - 1) // 2, n)
    r = q - 2 * k
    norm = one_norm(op)
    config = {
        "method": "hutchpp",
        "total_queries": q,
        "sketch_size": k,
        "remainder_samples": r,
        "m": int(m),
        "seed": int(seed),
        "function": f.describe() if isinstance(f, ScalarFunction) else repr(f),
        "reorth": resolve_reorth(reorth, min(int(m), n)),
    }
    S = SampleStream(seed, "hutchpp_sketch").rademacher(0, k, n)
    Y = _matfunc_columns(op, S, f, m, reorth, norm)
    Q, _ = np.linalg.qr(Y)
    proj, _ = quadratic_forms(op, Q, f, m, reorth, norm=norm)
    constant = float(proj.sum())
    G = SampleStream(seed, "hutchpp_remainder").rademacher(0, r, n)
    W = G - Q @ (Q.T @ G)
    wn = np.linalg.norm(W, axis=0)
    live = wn > 1e-12 * math.sqrt(n)
    samples = np.zeros(r)
    if live.any():
        samples[live], _ = quadratic_forms(op, W[:, live], f, m, reorth, norm=norm)
    return EstimatorReport.from_samples(samples, constant, config)


def estrada_index(op, beta: float, cfg: EstimatorConfig, keep_rules=False) -> EstimatorReport:
    """Estimate ``tr(exp(beta * A))`` with the estimator selected by ``cfg``."""
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    f = ScalarFunction("exp", float(beta))
    cfg = EstimatorConfig(cfg.N, cfg.m, cfg.seed, cfg.vector_family, f, cfg.reorth, cfg.method)
    if cfg.method == "hutchpp":
        return hutchpp_trace(op, cfg.N, cfg.m, cfg.seed, f, cfg.reorth)
    if cfg.vector_family == "full_rademacher":
        return hutchinson_trace(op, cfg, keep_rules)
    return partial_rademacher_trace(op, cfg, keep_rules)


def spectral_radius(op, steps: int = 100, rtol: float = 1e-6, seed: int = 0) -> float:
    """Largest eigenvalue magnitude by power iteration on ``A^2``.

    Iterating with ``A^2`` converges even when ``+-lambda_max`` are both
    present, as for Jordan-Wielandt operators. For nonnegative adjacency
    matrices this is ``lambda_max``.
    """
    n = op.dimension
    v = SampleStream(seed, "power_iteration").vector(0, n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(int(steps)):
        w = op.matvec(v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        w2 = op.matvec(w / new)
        nrm = float(np.linalg.norm(w2))
        if nrm == 0.0:
            return new
        v = w2 / nrm
        if est > 0 and abs(new - est) <= rtol * new:
            return new
        est = new
    return est
