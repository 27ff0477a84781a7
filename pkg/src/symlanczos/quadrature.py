"""Gauss quadrature rules from Lanczos output and the integrals they approximate.

For a symmetric ``A = Q diag(lam) Q^T`` and unit ``v``, the quadratic form
``v^T f(A) v`` is the Riemann-Stieltjes integral of ``f`` against the step
function with jumps ``(Q^T v)_j^2`` at ``lam_j``. An m-step Lanczos run turns
that measure into an m-node Gauss rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .lanczos import BidiagonalMatrix, JacobiMatrix
from .spectral import eig_tridiagonal, svd_bidiagonal

__all__ = [
    "QuadratureRule",
    "MeasureFunction",
    "SymmetryReport",
    "IterationBounds",
    "QuadratureEvaluationError",
    "golub_welsch",
    "quadrature_from_bidiagonal",
    "evaluate",
    "classify_symmetry",
    "measure_oracle",
    "riemann_stieltjes",
    "iteration_bounds",
    "rho_from_condition_number",
]

SYMMETRY_TOL = 1e-8


class QuadratureEvaluationError(ArithmeticError):
    """``f`` produced a non-finite value at a quadrature node or breakpoint."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if nodes.shape != weights.shape or nodes.size == 0:
            raise ValueError("nodes and weights must be nonempty and equally long")
        if np.any(np.diff(nodes) < 0):
            raise ValueError("nodes must be sorted ascending")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.shape[0]


def golub_welsch(T: JacobiMatrix) -> QuadratureRule:
    """Nodes are the eigenvalues of ``T``; weights the squared first eigenvector entries.

    A Jacobi matrix with an exactly zero diagonal goes through
    :func:`_zero_diagonal_rule`, which returns mirrored nodes with equal
    weights by construction.
    """
    alpha = T.alpha if hasattr(T, "alpha") else np.asarray(T[0], dtype=float)
    beta = T.beta if hasattr(T, "beta") else np.asarray(T[1], dtype=float)
    if alpha.shape[0] > 1 and not np.any(alpha):
        return _zero_diagonal_rule(beta)
    eig = eig_tridiagonal(T)
    return QuadratureRule(eig.values, eig.first_components**2)


def _zero_diagonal_rule(beta) -> QuadratureRule:
    """Gauss rule of the zero-diagonal tridiagonal with off-diagonal ``beta``.

    Even and odd indices split the matrix into ``[[0, C], [C^T, 0]]`` with
    ``C`` lower bidiagonal, ``C[i, i] = beta[2i]`` and ``C[i, i-1] =
    beta[2i-1]``. Each singular triple ``(s, u, v)`` gives nodes ``+-s`` that
    both carry ``u[0]^2 / 2``; for odd size the left null vector of ``C``
    gives a node at 0. Working with ``C`` keeps a tiny ``+-s`` pair from
    being treated as a near-degenerate eigenvalue pair.
    """
    beta = np.asarray(beta, dtype=float)
    m = beta.shape[0] + 1
    rows, cols = (m + 1) // 2, m // 2
    C = np.zeros((rows, cols))
    idx = np.arange(cols)
    C[idx, idx] = beta[0::2]
    C[idx[1:], idx[1:] - 1] = beta[1::2][: cols - 1]
    if rows > cols:
        C[rows - 1, cols - 1] = beta[m - 2]
    U, s, _ = np.linalg.svd(C)
    half = 0.5 * U[0, :cols] ** 2
    nodes = [-s, [0.0], s[::-1]] if rows > cols else [-s, s[::-1]]
    weights = [half, [U[0, cols] ** 2], half[::-1]] if rows > cols else [half, half[::-1]]
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights))


def quadrature_from_bidiagonal(J: BidiagonalMatrix) -> QuadratureRule:
    """2m-node rule with nodes ``+-delta_k`` (singular values of ``J``).

    Both members of a pair carry half the squared first entry of the matching
    right singular vector. ``J`` may also be an ``(alpha, beta)`` pair, which
    allows zero superdiagonal entries. An empty ``J`` (the start vector lies
    in the null space of ``B``) gives the one-node rule at 0.
    """
    alpha = J.alpha if hasattr(J, "alpha") else J[0]
    if len(alpha) == 0:
        return QuadratureRule([0.0], [1.0])
    svd = svd_bidiagonal(J)
    half = 0.5 * svd.right_first_components**2
    nodes = np.concatenate([-svd.singular_values, svd.singular_values[::-1]])
    weights = np.concatenate([half, half[::-1]])
    return QuadratureRule(nodes, weights)


def _apply(f, x):
    with np.errstate(all="ignore"):
        try:
            vals = np.asarray(f(x), dtype=float)
        except (TypeError, ValueError):
            vals = None
        if vals is None or vals.shape != x.shape:
            vals = np.array([float(f(float(t))) for t in x])
    bad = ~np.isfinite(vals)
    if bad.any():
        raise QuadratureEvaluationError(f"f is not finite at t={x[bad][0]!r}")
    return vals


def evaluate(rule: QuadratureRule, f: Callable, norm_sq: float = 1.0) -> float:
    """``norm_sq * sum_k weight_k * f(node_k)``."""
    return float(norm_sq * (rule.weights @ _apply(f, rule.nodes)))


class SymmetryReport(NamedTuple):
    classification: str  # "symmetric" | "asymmetric"
    shift: float
    max_node_asymmetry: float
    max_weight_asymmetry: float
    unpaired_nodes: int
    tol: float
    scale: float

    @property
    def symmetric(self) -> bool:
        return self.classification == "symmetric"


def classify_symmetry(rule: QuadratureRule, shift: float = 0.0, tol: float = SYMMETRY_TOL) -> SymmetryReport:
    """Check whether nodes mirror about ``shift`` with equal weights on mirrored nodes.

    Outermost nodes are paired inward. A pair matches when its distances to
    ``shift`` agree within ``tol * scale``, where ``scale`` is the node span
    (or ``max(|node|, |shift|, 1)`` for a single distinct node). When they
    disagree, the farther node is left unpaired. The rule is symmetric when
    every pair's weights agree within ``tol`` and at most one node, lying
    within ``tol * scale`` of ``shift``, is unpaired.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = rule.nodes
    w = rule.weights
    s = float(shift)
    span = float(x[-1] - x[0])
    scale = span if span > 0 else max(float(np.abs(x).max()), abs(s), 1.0)
    node_tol = tol * scale

    i, j = 0, len(x) - 1
    max_node = 0.0
    max_weight = 0.0
    unpaired = []
    while i < j:
        left = s - x[i]
        right = x[j] - s
        if abs(left - right) <= node_tol:
            max_node = max(max_node, abs(x[i] + x[j] - 2 * s))
            max_weight = max(max_weight, abs(w[i] - w[j]))
            i += 1
            j -= 1
        elif left > right:
            unpaired.append(x[i])
            i += 1
        else:
            unpaired.append(x[j])
            j -= 1
    if i == j:
        unpaired.append(x[i])

    ok = max_weight <= tol and (
        not unpaired or (len(unpaired) == 1 and abs(unpaired[0] - s) <= node_tol)
    )
    return SymmetryReport(
        classification="symmetric" if ok else "asymmetric",
        shift=s,
        max_node_asymmetry=float(max_node),
        max_weight_asymmetry=float(max_weight),
        unpaired_nodes=len(unpaired),
        tol=float(tol),
        scale=scale,
    )


@dataclass(frozen=True, eq=False)
class MeasureFunction:
    """Right-continuous step function: ``mu(t) = sum of increments at breakpoints <= t``."""

    breakpoints: np.ndarray
    increments: np.ndarray

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float).ravel()
        inc = np.array(self.increments, dtype=float).ravel()
        if bp.shape != inc.shape:
            raise ValueError("breakpoints and increments must have equal length")
        if np.any(np.diff(bp) < 0):
            raise ValueError("breakpoints must be ascending")
        if np.any(inc < 0):
            raise ValueError("increments must be nonnegative")
        for name, arr in (("breakpoints", bp), ("increments", inc)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(inc)]))

    @property
    def total(self) -> float:
        return float(self._cum[-1])

    def __call__(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="right")
        out = self._cum[idx]
        return float(out) if np.ndim(out) == 0 else out


def measure_oracle(eigvals, mu) -> MeasureFunction:
    """Measure with jumps ``mu_j^2`` at the ascending eigenvalues ``eigvals``."""
    eigvals = np.asarray(eigvals, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if eigvals.shape != mu.shape:
        raise ValueError("eigvals and mu must have equal length")
    return MeasureFunction(eigvals, mu**2)


def riemann_stieltjes(measure: MeasureFunction, f: Callable) -> float:
    """``sum_j f(lambda_j) * increment_j``; exact for a discrete measure."""
    return float(measure.increments @ _apply(f, measure.breakpoints))


class IterationBounds(NamedTuple):
    m_sym: float
    m_asym: float
    m_star: float


def iteration_bounds(rho: float, M_rho: float, eps: float) -> IterationBounds:
    """Lanczos step counts that push the Bernstein-ellipse error bound below ``eps``.

    ``m_asym`` comes from ``4 M / (1 - 1/rho) * rho^(-2m)``, ``m_sym`` from
    ``4 M / (1 - rho^-2) * rho^(-2m)``. Their difference ``m_star`` equals
    ``log(1 + 1/rho) / (2 log rho)`` and is positive for every ``rho > 1``.
    """
    rho = float(rho)
    if not rho > 1:
        raise ValueError(f"ellipse parameter rho must exceed 1, got {rho}")
    if not M_rho > 0:
        raise ValueError("M_rho must be positive")
    if not eps > 0:
        raise ValueError("eps must be positive")
    two_log_rho = 2.0 * math.log(rho)
    common = math.log(4.0 * M_rho) - math.log(eps)
    m_asym = (common - math.log1p(-1.0 / rho)) / two_log_rho
    m_sym = (common - math.log1p(-(rho**-2))) / two_log_rho
    m_star = math.log1p(1.0 / rho) / two_log_rho
    return IterationBounds(m_sym, m_asym, m_star)


def rho_from_condition_number(kappa: float) -> float:
    """``(sqrt(kappa) + 1) / (sqrt(kappa) - 1)``."""
    if not kappa > 1:
        raise ValueError("condition number must exceed 1")
    r = math.sqrt(kappa)
    return (r + 1.0) / (r - 1.0)
