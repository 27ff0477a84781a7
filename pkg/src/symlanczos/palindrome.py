"""Palindrome predicates and partial starting vectors for Jordan-Wielandt operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .spectral import jacobi_eigh

__all__ = [
    "PartialVectorSpec",
    "SufficientConditionReport",
    "is_r_partial_absolute_palindrome",
    "make_partial_vector",
    "verify_sufficient_condition",
]


def is_r_partial_absolute_palindrome(w, r: int, tol: float = 1e-8) -> bool:
    """True iff ``||w_i| - |w_{n+1-i}|| <= tol`` for the first ``r / 2`` indices."""
    w = np.asarray(w, dtype=float).ravel()
    r = int(r)
    if r % 2:
        raise ValueError(f"r must be even, got {r}")
    if r < 0 or r > w.size:
        raise ValueError(f"r must lie in [0, {w.size}]")
    h = r // 2
    if h == 0:
        return True
    head = np.abs(w[:h])
    tail = np.abs(w[::-1][:h])
    return bool(np.all(np.abs(head - tail) <= tol))


@dataclass(frozen=True)
class PartialVectorSpec:
    """Where the nonzero block of a partial starting vector sits.

    ``side="upper"`` fills the first ``n1`` entries, ``"lower"`` the last
    ``n2``. ``family`` is ``"rademacher"``, ``"unit"`` (needs ``index``, 0-based
    within the block) or ``"custom"`` (needs ``values``).
    """

    n1: int
    n2: int
    side: str = "upper"
    family: str = "rademacher"
    index: int = 0
    values: Optional[tuple] = None

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("block sizes must be >= 1")
        if self.side not in ("upper", "lower"):
            raise ValueError(f"side must be 'upper' or 'lower', got {self.side!r}")
        if self.family not in ("rademacher", "unit", "custom"):
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def block_size(self) -> int:
        return self.n1 if self.side == "upper" else self.n2


def make_partial_vector(spec: PartialVectorSpec, rng=None, max_draws: int = 100) -> np.ndarray:
    """Vector of length ``n1 + n2`` that is zero outside the chosen block."""
    k = spec.block_size
    if spec.family == "rademacher":
        if rng is None:
            raise ValueError("rademacher vectors need an rng")
        block = rng.integers(0, 2, size=k) * 2.0 - 1.0
    elif spec.family == "unit":
        if not 0 <= spec.index < k:
            raise ValueError(f"unit index {spec.index} outside block of size {k}")
        block = np.zeros(k)
        block[spec.index] = 1.0
    else:
        if spec.values is None:
            raise ValueError("custom family needs values")
        if callable(spec.values):
            draw = spec.values
            for _ in range(max_draws):
                block = np.asarray(draw(rng, k), dtype=float)
                if np.any(block != 0):
                    break
            else:
                raise ValueError("custom sampler kept producing the zero vector")
        else:
            block = np.asarray(spec.values, dtype=float)
        if block.shape != (k,):
            raise ValueError(f"custom block must have length {k}")
        if not np.any(block != 0):
            raise ValueError("custom block is identically zero")
    out = np.zeros(spec.n1 + spec.n2)
    if spec.side == "upper":
        out[: spec.n1] = block
    else:
        out[spec.n1 :] = block
    return out


class SufficientConditionReport(NamedTuple):
    spectrum_symmetric: bool
    rank: int
    palindrome: bool
    palindrome_order: int
    eigenvalues: np.ndarray
    measure_vector: np.ndarray

    @property
    def holds(self) -> bool:
        return self.spectrum_symmetric and self.palindrome


def verify_sufficient_condition(A, v, tol: float = 1e-8) -> SufficientConditionReport:
    """Check the two hypotheses behind symmetric Lanczos quadrature for ``(A, v)``.

    Uses a cyclic-Jacobi eigendecomposition with ascending eigenvalues and
    reports

    * whether the sorted spectrum satisfies ``lam_i = -lam_{n+1-i}`` within
      ``tol * max|lam|``,
    * the numerical rank (eigenvalues above ``tol * max|lam|`` in magnitude),
    * whether ``mu = Q^T v / ||v||`` is an r-partial absolute palindrome
      within ``tol``. An odd rank is rounded up to the next even order,
      capped at the largest even number not exceeding ``n``.
    """
    a = A.toarray() if hasattr(A, "toarray") else np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A must be square")
    n = a.shape[0]
    if n > 256:
        raise ValueError("verify_sufficient_condition is limited to n <= 256")
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (n,) or not np.linalg.norm(v) > 0:
        raise ValueError("v must be a nonzero vector of matching length")
    lam, Q = jacobi_eigh(a)
    mu = Q.T @ (v / np.linalg.norm(v))
    big = float(np.abs(lam).max()) if n else 0.0
    thresh = tol * big if big > 0 else tol
    symmetric = bool(np.all(np.abs(lam + lam[::-1]) <= thresh))
    rank = int(np.count_nonzero(np.abs(lam) > thresh))
    order = min(rank + (rank % 2), n - (n % 2))
    pal = is_r_partial_absolute_palindrome(mu, order, tol)
    return SufficientConditionReport(symmetric, rank, pal, order, lam, mu)
