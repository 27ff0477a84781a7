"""Lanczos tridiagonalization and Golub-Kahan bidiagonalization."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linop import JordanWielandtOperator, one_norm

__all__ = [
    "JacobiMatrix",
    "BidiagonalMatrix",
    "LanczosResult",
    "LanczosBatch",
    "tridiagonalize",
    "tridiagonalize_many",
    "bidiagonalize",
    "resolve_reorth",
    "BREAKDOWN_RTOL",
]

BREAKDOWN_RTOL = 1e-12
_REORTH_AUTO_THRESHOLD = 30


def resolve_reorth(reorth, m: int) -> str:
    """Map ``None``/``"auto"`` to the default policy: ``"full"`` when m > 30."""
    if reorth in (None, "auto"):
        return "full" if m > _REORTH_AUTO_THRESHOLD else "none"
    if reorth not in ("none", "full"):
        raise ValueError(f"unknown reorthogonalization policy {reorth!r}")
    return reorth


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    """Symmetric tridiagonal matrix with diagonal ``alpha`` and positive off-diagonal ``beta``."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float).ravel()
        beta = np.array(self.beta, dtype=float).ravel()
        if alpha.size < 1:
            raise ValueError("JacobiMatrix needs at least one diagonal entry")
        if beta.size != alpha.size - 1:
            raise ValueError("len(beta) must equal len(alpha) - 1")
        if np.any(~(beta > 0)):
            raise ValueError("JacobiMatrix off-diagonal entries must be strictly positive")
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def m(self) -> int:
        return self.alpha.shape[0]

    def leading(self, k: int) -> "JacobiMatrix":
        """The leading k x k block, i.e. what k Lanczos steps would have produced."""
        if not 1 <= k <= self.m:
            raise ValueError(f"k must lie in [1, {self.m}]")
        return JacobiMatrix(self.alpha[:k], self.beta[: k - 1])

    def shifted(self, s: float) -> "JacobiMatrix":
        return JacobiMatrix(self.alpha - s, self.beta)

    def toarray(self) -> np.ndarray:
        return np.diag(self.alpha) + np.diag(self.beta, 1) + np.diag(self.beta, -1)


@dataclass(frozen=True, eq=False)
class BidiagonalMatrix:
    """Upper bidiagonal matrix with positive diagonal ``alpha`` and superdiagonal ``beta``.

    ``breakdown`` records whether Golub-Kahan stopped before the requested
    number of steps.
    """

    alpha: np.ndarray
    beta: np.ndarray
    breakdown: bool = False

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float).ravel()
        beta = np.array(self.beta, dtype=float).ravel()
        if beta.size != max(alpha.size - 1, 0):
            raise ValueError("len(beta) must equal len(alpha) - 1")
        if np.any(~(alpha > 0)) or np.any(~(beta > 0)):
            raise ValueError("bidiagonal entries must be strictly positive")
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def m(self) -> int:
        return self.alpha.shape[0]

    def interlaced(self) -> np.ndarray:
        """``[alpha_1, beta_1, alpha_2, ..., alpha_m]``."""
        out = np.empty(max(2 * self.m - 1, 0))
        out[0::2] = self.alpha
        out[1::2] = self.beta
        return out

    def toarray(self) -> np.ndarray:
        return np.diag(self.alpha) + np.diag(self.beta, 1)


@dataclass(frozen=True, eq=False)
class LanczosResult:
    jacobi: JacobiMatrix
    effective_m: int
    requested_m: int
    breakdown: bool
    basis: Optional[np.ndarray] = None  # shape (n, effective_m) when retained


def _clamp_m(m, n):
    m = int(m)
    if m < 1:
        raise ValueError(f"number of Lanczos steps must be >= 1, got {m}")
    if m > n:
        warnings.warn(f"m={m} exceeds operator dimension {n}; clamping to {n}", stacklevel=3)
        m = n
    return m


def _breakdown_tol(op, norm):
    if norm is None:
        norm = one_norm(op)
    return BREAKDOWN_RTOL * norm


def tridiagonalize(op, u, m, reorth=None, keep_basis=False, norm=None) -> LanczosResult:
    """Run m steps of symmetric Lanczos from ``u``.

    Stops early when an off-diagonal coefficient falls to ``1e-12 * ||A||_1``
    or below; ``effective_m`` is then the number of completed steps. With
    ``reorth="full"`` each new residual is re-projected twice (classical
    Gram-Schmidt) against every previous Lanczos vector. ``norm`` may pass a
    precomputed ``||A||_1``.
    """
    u = np.asarray(u, dtype=float)
    n = op.dimension
    if u.ndim != 1 or u.shape[0] != n:
        raise ValueError(f"starting vector must have length {n}")
    unorm = np.linalg.norm(u)
    if not unorm > 0:
        raise ValueError("starting vector must be nonzero")
    requested = int(m)
    m = _clamp_m(m, n)
    policy = resolve_reorth(reorth, m)
    tol = _breakdown_tol(op, norm)
    full = policy == "full"
    keep = keep_basis or full

    alpha = np.zeros(m)
    beta = np.zeros(max(m - 1, 0))
    basis = np.zeros((n, m)) if keep else None

    v = u / unorm
    w = op.matvec(v)
    alpha[0] = v @ w
    w = w - alpha[0] * v
    if keep:
        basis[:, 0] = v
    if full:
        for _ in range(2):
            w -= v * (v @ w)
    v_prev = v
    k_done = 1
    for k in range(1, m):
        b = np.linalg.norm(w)
        if b <= tol:
            break
        beta[k - 1] = b
        v = w / b
        w = op.matvec(v)
        alpha[k] = v @ w
        w = w - alpha[k] * v - b * v_prev
        if keep:
            basis[:, k] = v
        if full:
            Vk = basis[:, : k + 1]
            for _ in range(2):
                w -= Vk @ (Vk.T @ w)
        v_prev = v
        k_done = k + 1

    jac = JacobiMatrix(alpha[:k_done], beta[: k_done - 1])
    return LanczosResult(
        jacobi=jac,
        effective_m=k_done,
        requested_m=requested,
        breakdown=k_done < m,
        basis=basis[:, :k_done].copy() if keep_basis else None,
    )


@dataclass(frozen=True, eq=False)
class LanczosBatch:
    """Coefficients of independent Lanczos runs, one per column of the start block.

    Row ``i`` of ``alpha`` holds ``lengths[i]`` valid entries; ``beta`` holds
    ``lengths[i] - 1``. Padding is zero. ``basis`` has shape ``(m, n, N)``.
    """

    alpha: np.ndarray
    beta: np.ndarray
    lengths: np.ndarray
    norms_sq: np.ndarray
    basis: Optional[np.ndarray] = None

    def jacobi(self, i: int) -> JacobiMatrix:
        k = int(self.lengths[i])
        return JacobiMatrix(self.alpha[i, :k], self.beta[i, : k - 1])


def tridiagonalize_many(op, U, m, reorth=None, keep_basis=False, norm=None) -> LanczosBatch:
    """Independent Lanczos runs from each column of ``U`` (shape ``n x N``).

    Arithmetic per column matches :func:`tridiagonalize` up to round-off from
    blocked products; every column gets its own breakdown step.
    """
    U = np.asarray(U, dtype=float)
    n = op.dimension
    if U.ndim != 2 or U.shape[0] != n:
        raise ValueError(f"start block must have {n} rows")
    N = U.shape[1]
    norms_sq = np.einsum("ij,ij->j", U, U)  # exact for sign vectors, unlike norm(U) ** 2
    norms = np.sqrt(norms_sq)
    if np.any(~(norms > 0)):
        raise ValueError("every starting vector must be nonzero")
    m = _clamp_m(m, n)
    full = resolve_reorth(reorth, m) == "full"
    tol = _breakdown_tol(op, norm)
    keep = keep_basis or full

    alpha = np.zeros((N, m))
    beta = np.zeros((N, max(m - 1, 1)))
    lengths = np.full(N, m, dtype=np.int64)
    active = np.ones(N, dtype=bool)
    basis = np.zeros((m, n, N)) if keep else None

    V = U / norms
    W = op.matmat(V)
    a = np.einsum("ij,ij->j", V, W)
    alpha[:, 0] = a
    W -= a * V
    if keep:
        basis[0] = V
    if full:
        for _ in range(2):
            W -= V * np.einsum("ij,ij->j", V, W)
    V_prev = V
    for k in range(1, m):
        b = np.linalg.norm(W, axis=0)
        stop = active & (b <= tol)
        if stop.any():
            lengths[stop] = k
            active &= ~stop
            if not active.any():
                break
        b = np.where(active, b, 0.0)
        beta[:, k - 1] = b
        safe = np.where(active, b, 1.0)
        V = np.where(active, W / safe, 0.0)
        W = op.matmat(V)
        a = np.einsum("ij,ij->j", V, W)
        alpha[:, k] = a
        W -= a * V + b * V_prev
        if keep:
            basis[k] = V
        if full:
            Bk = basis[: k + 1]
            for _ in range(2):
                coef = np.einsum("kij,ij->kj", Bk, W)
                W -= np.einsum("kij,kj->ij", Bk, coef)
        V_prev = V
    beta = beta[:, : m - 1]
    return LanczosBatch(alpha, beta, lengths, norms_sq, basis if keep_basis else None)


def bidiagonalize(B, v, m, reorth=None) -> BidiagonalMatrix:
    """Golub-Kahan-Lanczos bidiagonalization of ``B`` (``n1 x n2``) from ``v`` in R^n2.

    The interlaced sequence ``alpha_1, beta_1, ..., alpha_m`` equals the
    off-diagonal of the Jacobi matrix from ``2m`` Lanczos steps on
    ``[[0, B], [B^T, 0]]`` started at ``[0; v]``. A vanishing ``alpha_k``
    stops with ``k - 1`` steps, a vanishing ``beta_k`` with ``k``. The
    reorthogonalization default follows the equivalent 2m-step Lanczos run.
    """
    op = B if isinstance(B, JordanWielandtOperator) else JordanWielandtOperator(B)
    blk = op.B
    n1, n2 = op.n1, op.n2
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.shape[0] != n2:
        raise ValueError(f"starting vector must have length n2={n2}")
    vnorm = np.linalg.norm(v)
    if not vnorm > 0:
        raise ValueError("starting vector must be nonzero")
    m = int(m)
    if m < 1:
        raise ValueError("number of steps must be >= 1")
    if m > min(n1, n2):
        warnings.warn(f"m={m} exceeds min(n1, n2)={min(n1, n2)}; clamping", stacklevel=2)
        m = min(n1, n2)
    full = resolve_reorth(reorth, 2 * m) == "full"
    tol = BREAKDOWN_RTOL * op.one_norm()

    alphas, betas = [], []
    us, vs = [], []
    vk = v / vnorm
    u_prev = np.zeros(n1)
    beta_prev = 0.0
    breakdown = False
    for k in range(1, m + 1):
        vs.append(vk)
        u = blk.matvec(vk) - beta_prev * u_prev
        if full:
            for _ in range(2):
                for q in us:
                    u -= q * (q @ u)
        a = np.linalg.norm(u)
        if a <= tol:
            breakdown = True
            break
        uk = u / a
        alphas.append(a)
        us.append(uk)
        if k < m:
            w = blk.rmatvec(uk) - a * vk
            if full:
                for _ in range(2):
                    for q in vs:
                        w -= q * (q @ w)
            b = np.linalg.norm(w)
            if b <= tol:
                breakdown = True
                break
            betas.append(b)
            vk = w / b
            u_prev, beta_prev = uk, b
    return BidiagonalMatrix(np.array(alphas), np.array(betas[: max(len(alphas) - 1, 0)]), breakdown)
