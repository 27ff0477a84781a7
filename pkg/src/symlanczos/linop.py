"""Symmetric operators used by the Lanczos routines.

Three concrete operators are provided:

* :class:`DenseSymmetric` wraps an explicit ``n x n`` symmetric array.
* :class:`SparseCsr` stores a (possibly rectangular) matrix in compressed-row
  form; square symmetric instances act as operators.
* :class:`JordanWielandtOperator` represents ``[[0, B], [B^T, 0]]`` without
  forming it.

Every operator exposes ``dimension``, ``matvec`` and ``matmat``. Anything else
with those three members can be passed to the Krylov routines as well.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LinearOperator",
    "DenseSymmetric",
    "SparseCsr",
    "JordanWielandtOperator",
    "MatrixMarketError",
    "as_operator",
    "matvec",
    "compose_jordan_wielandt",
    "bipartize",
    "detect_jordan_wielandt_split",
    "split_jordan_wielandt",
    "one_norm",
    "to_dense",
    "read_matrix_market",
    "write_matrix_market",
]


@runtime_checkable
class LinearOperator(Protocol):
    dimension: int

    def matvec(self, x: np.ndarray) -> np.ndarray: ...

    def matmat(self, X: np.ndarray) -> np.ndarray: ...


def _check_vector(x, n):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {x.shape}")
    return x


def _check_block(X, n):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != n:
        raise ValueError(f"expected an array with {n} rows, got shape {X.shape}")
    return X


class DenseSymmetric:
    """Explicit symmetric matrix.

    Symmetry is checked exactly (``entries == entries.T``); callers holding a
    nearly symmetric matrix should symmetrize it first.
    """

    def __init__(self, entries):
        a = np.array(entries, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"DenseSymmetric needs a non-empty square array, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("DenseSymmetric entries are not symmetric")
        a.setflags(write=False)
        self.entries = a

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.dimension

    def matvec(self, x):
        return self.entries @ _check_vector(x, self.dimension)

    def matmat(self, X):
        return self.entries @ _check_block(X, self.dimension)

    def one_norm(self) -> float:
        return float(np.abs(self.entries).sum(axis=0).max())

    def toarray(self) -> np.ndarray:
        return np.array(self.entries)

    def __repr__(self):
        return f"DenseSymmetric(n={self.dimension})"


@dataclass(frozen=True, eq=False)
class SparseCsr:
    """Compressed-row storage.

    Only square symmetric instances behave as operators (``dimension``);
    rectangular ones serve as Jordan-Wielandt blocks.
    """

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    _mat: sp.csr_array = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        row_ptr = np.asarray(self.row_ptr, dtype=np.int64)
        col_idx = np.asarray(self.col_idx, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if row_ptr.shape != (self.n_rows + 1,):
            raise ValueError("row_ptr must have length n_rows + 1")
        if row_ptr[0] != 0 or np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must start at 0 and be nondecreasing")
        if row_ptr[-1] != col_idx.shape[0] or col_idx.shape != values.shape:
            raise ValueError("row_ptr, col_idx and values are inconsistent")
        if col_idx.size and (col_idx.min() < 0 or col_idx.max() >= self.n_cols):
            raise ValueError("col_idx out of range")
        for name, arr in (("row_ptr", row_ptr), ("col_idx", col_idx), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        mat = sp.csr_array((values, col_idx, row_ptr), shape=(self.n_rows, self.n_cols))
        object.__setattr__(self, "_mat", mat)

    @classmethod
    def from_scipy(cls, mat) -> "SparseCsr":
        m = sp.csr_array(mat, dtype=float)
        m.sum_duplicates()
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data)

    @classmethod
    def from_dense(cls, a) -> "SparseCsr":
        return cls.from_scipy(sp.csr_array(np.asarray(a, dtype=float)))

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @property
    def dimension(self) -> int:
        if self.n_rows != self.n_cols:
            raise ValueError("a rectangular SparseCsr has no operator dimension")
        return self.n_rows

    def is_symmetric(self) -> bool:
        if self.n_rows != self.n_cols:
            return False
        diff = self._mat - self._mat.T
        return diff.count_nonzero() == 0

    def matvec(self, x):
        return self._mat @ _check_vector(x, self.n_cols)

    def rmatvec(self, y):
        return self._mat.T @ _check_vector(y, self.n_rows)

    def matmat(self, X):
        return self._mat @ _check_block(X, self.n_cols)

    def rmatmat(self, Y):
        return self._mat.T @ _check_block(Y, self.n_rows)

    def one_norm(self) -> float:
        if self.nnz == 0:
            return 0.0
        return float(abs(self._mat).sum(axis=0).max())

    def toarray(self) -> np.ndarray:
        return self._mat.toarray()

    def to_scipy(self) -> sp.csr_array:
        return self._mat.copy()


class _DenseBlock:
    """Rectangular dense block with the same product interface as SparseCsr."""

    def __init__(self, a):
        a = np.array(a, dtype=float, copy=True)
        a.setflags(write=False)
        self.a = a

    @property
    def shape(self):
        return self.a.shape

    def matvec(self, x):
        return self.a @ x

    def rmatvec(self, y):
        return self.a.T @ y

    def matmat(self, X):
        return self.a @ X

    def rmatmat(self, Y):
        return self.a.T @ Y

    def one_norm(self):
        return float(np.abs(self.a).sum(axis=0).max()) if self.a.size else 0.0

    def row_abs_sums(self):
        return np.abs(self.a).sum(axis=1)

    def toarray(self):
        return np.array(self.a)


class JordanWielandtOperator:
    """The symmetric operator ``[[0, B], [B^T, 0]]`` of size ``n1 + n2``.

    Products are formed blockwise from ``B``; the full matrix is never built.
    """

    def __init__(self, B):
        if isinstance(B, SparseCsr):
            block = B
        elif sp.issparse(B):
            block = SparseCsr.from_scipy(B)
        else:
            arr = np.asarray(B, dtype=float)
            if arr.ndim != 2:
                raise ValueError(f"Jordan-Wielandt block must be 2-D, got shape {arr.shape}")
            block = _DenseBlock(arr)
        n1, n2 = block.shape
        if n1 < 1 or n2 < 1:
            raise ValueError("Jordan-Wielandt block must be nonempty")
        self.B = block
        self.n1 = int(n1)
        self.n2 = int(n2)

    @property
    def dimension(self) -> int:
        return self.n1 + self.n2

    def matvec(self, x):
        x = _check_vector(x, self.dimension)
        xu, xd = x[: self.n1], x[self.n1 :]
        return np.concatenate([self.B.matvec(xd), self.B.rmatvec(xu)])

    def matmat(self, X):
        X = _check_block(X, self.dimension)
        Xu, Xd = X[: self.n1], X[self.n1 :]
        return np.concatenate([self.B.matmat(Xd), self.B.rmatmat(Xu)], axis=0)

    def one_norm(self) -> float:
        # column sums of A are the row sums of B (upper) and column sums of B (lower)
        b_cols = self.B.one_norm()
        b_rows = _abs_row_sums(self.B).max()
        return float(max(b_cols, b_rows))

    def block_array(self) -> np.ndarray:
        return self.B.toarray()

    def toarray(self) -> np.ndarray:
        b = self.B.toarray()
        out = np.zeros((self.dimension, self.dimension))
        out[: self.n1, self.n1 :] = b
        out[self.n1 :, : self.n1] = b.T
        return out

    def __repr__(self):
        return f"JordanWielandtOperator(n1={self.n1}, n2={self.n2})"


def _abs_row_sums(block):
    if isinstance(block, SparseCsr):
        if block.nnz == 0:
            return np.zeros(block.n_rows)
        return np.asarray(abs(block.to_scipy()).sum(axis=1)).ravel()
    return block.row_abs_sums()


def as_operator(obj) -> LinearOperator:
    """Wrap arrays and scipy sparse matrices as operators; pass operators through."""
    if isinstance(obj, (DenseSymmetric, JordanWielandtOperator)):
        return obj
    if isinstance(obj, SparseCsr):
        if not obj.is_symmetric():
            raise ValueError("SparseCsr operator must be square and symmetric")
        return obj
    if sp.issparse(obj):
        return as_operator(SparseCsr.from_scipy(obj))
    if isinstance(obj, np.ndarray) or isinstance(obj, (list, tuple)):
        return DenseSymmetric(obj)
    if hasattr(obj, "matvec") and hasattr(obj, "dimension"):
        return obj
    raise TypeError(f"cannot interpret {type(obj).__name__} as a symmetric operator")


def matvec(op, x) -> np.ndarray:
    """Apply ``op`` to ``x``; a length mismatch raises ``ValueError``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != op.dimension:
        raise ValueError(f"dimension mismatch: operator is {op.dimension}, vector is {x.shape}")
    return op.matvec(x)


def compose_jordan_wielandt(B) -> JordanWielandtOperator:
    return JordanWielandtOperator(B)


def bipartize(B) -> JordanWielandtOperator:
    """Supra-adjacency of a directed graph with adjacency ``B``.

    Row ``i`` of ``B`` becomes the out-copy of node ``i`` and column ``j`` the
    in-copy of node ``j``. Self-loops survive as edges between a node's two
    copies.
    """
    shape = B.shape if hasattr(B, "shape") else np.asarray(B).shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"bipartize needs a square adjacency matrix, got shape {shape}")
    return JordanWielandtOperator(B)


def detect_jordan_wielandt_split(A) -> int | None:
    """Find ``k`` with ``A[:k, :k] == 0`` and ``A[k:, k:] == 0``.

    Every stored nonzero ``(i, j)`` must straddle the split, so valid ``k``
    satisfy ``max(min(i, j)) < k <= min(max(i, j))``. Returns the valid split
    closest to ``n / 2`` or ``None`` when there is none.
    """
    if isinstance(A, SparseCsr):
        coo = A.to_scipy().tocoo()
        n = A.n_rows
        if A.n_rows != A.n_cols:
            return None
    else:
        dense = np.asarray(A)
        n = dense.shape[0]
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            return None
        coo = sp.coo_array(dense)
    rows, cols = coo.row[coo.data != 0], coo.col[coo.data != 0]
    if n < 2:
        return None
    lo, hi = 1, n - 1
    if rows.size:
        lo = max(lo, int(np.minimum(rows, cols).max()) + 1)
        hi = min(hi, int(np.maximum(rows, cols).min()))
    if lo > hi:
        return None
    return int(min(max(n // 2, lo), hi))


def split_jordan_wielandt(A, n1: int) -> JordanWielandtOperator:
    """Extract ``B`` from a stored ``[[0, B], [B^T, 0]]`` matrix."""
    if isinstance(A, SparseCsr):
        mat = A.to_scipy()
        n = A.n_rows
    else:
        mat = np.asarray(A, dtype=float)
        n = mat.shape[0]
    if not 0 < n1 < n:
        raise ValueError(f"split {n1} outside (0, {n})")
    upper_left = mat[:n1, :n1]
    lower_right = mat[n1:, n1:]
    off = mat[:n1, n1:]
    off_t = mat[n1:, :n1]

    def _nz(block):
        return (block.count_nonzero() if sp.issparse(block) else np.count_nonzero(block)) != 0

    if _nz(upper_left) or _nz(lower_right):
        raise ValueError(f"diagonal blocks are not zero under the split n1={n1}")
    diff = off - off_t.T
    if _nz(diff):
        raise ValueError("off-diagonal blocks are not transposes of each other")
    return JordanWielandtOperator(sp.csr_array(off) if sp.issparse(off) else off)


def one_norm(op, rng=None) -> float:
    """Induced 1-norm; exact for explicit operators, else a matvec lower estimate.

    Black-box operators get the max over 8 Rademacher probes of
    ``||A z||_1 / ||z||_1``, which never overestimates the true norm.
    """
    if hasattr(op, "one_norm"):
        return op.one_norm()
    rng = np.random.default_rng(0) if rng is None else rng
    best = 0.0
    for _ in range(8):
        z = rng.choice([-1.0, 1.0], size=op.dimension)
        best = max(best, float(np.abs(op.matvec(z)).sum() / op.dimension))
    return best


def to_dense(op) -> np.ndarray:
    if hasattr(op, "toarray"):
        return op.toarray()
    n = op.dimension
    return op.matmat(np.eye(n))


# --------------------------------------------------------------------------
# Matrix Market

class MatrixMarketError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


_HEADER = re.compile(r"^%%MatrixMarket\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)\s*$", re.IGNORECASE)


def _parse_number(token, field_kind, lineno):
    try:
        if field_kind == "integer":
            return float(int(token))
        value = float(token)
    except ValueError:
        raise MatrixMarketError(f"non-numeric value {token!r}", lineno) from None
    if not math.isfinite(value):
        raise MatrixMarketError(f"non-finite value {token!r}", lineno)
    return value


def read_matrix_market(path) -> SparseCsr:
    """Parse a Matrix Market file into :class:`SparseCsr`.

    Supports ``coordinate`` with ``real``/``integer``/``pattern`` values and
    ``general``/``symmetric`` symmetry, plus ``array real general``. Symmetric
    storage is expanded to both triangles; pattern entries read as 1.0;
    duplicate coordinate entries are summed.
    """
    path = Path(path)
    with path.open("r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    m = _HEADER.match(lines[0].strip())
    if m is None:
        raise MatrixMarketError("missing or malformed %%MatrixMarket header", 1)
    obj, fmt, field_kind, symmetry = (g.lower() for g in m.groups())
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", 1)
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(f"unsupported format {fmt!r}", 1)
    if field_kind not in ("real", "integer", "pattern", "double"):
        raise MatrixMarketError(f"unsupported field {field_kind!r}", 1)
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", 1)
    if fmt == "array" and (field_kind == "pattern" or symmetry != "general"):
        raise MatrixMarketError("only 'array real general' is supported for dense files", 1)

    body = [(i + 1, ln.strip()) for i, ln in enumerate(lines[1:], start=1)]
    body = [(no, ln) for no, ln in body if ln and not ln.startswith("%")]
    if not body:
        raise MatrixMarketError("missing size line", len(lines))
    size_no, size_line = body[0]
    try:
        dims = [int(t) for t in size_line.split()]
    except ValueError:
        raise MatrixMarketError(f"malformed size line {size_line!r}", size_no) from None

    if fmt == "array":
        if len(dims) != 2 or min(dims) < 0:
            raise MatrixMarketError("array size line needs 'rows cols'", size_no)
        n_rows, n_cols = dims
        vals = []
        for no, ln in body[1:]:
            toks = ln.split()
            if len(toks) != 1:
                raise MatrixMarketError("expected one value per line", no)
            vals.append(_parse_number(toks[0], field_kind, no))
        if len(vals) != n_rows * n_cols:
            last = body[-1][0]
            raise MatrixMarketError(f"expected {n_rows * n_cols} values, found {len(vals)}", last)
        dense = np.array(vals, dtype=float).reshape((n_cols, n_rows)).T  # column-major
        return SparseCsr.from_dense(dense)

    if len(dims) != 3 or min(dims) < 0:
        raise MatrixMarketError("coordinate size line needs 'rows cols nnz'", size_no)
    n_rows, n_cols, nnz = dims
    if symmetry == "symmetric" and n_rows != n_cols:
        raise MatrixMarketError("symmetric matrix must be square", size_no)
    entries = body[1:]
    if len(entries) != nnz:
        where = entries[-1][0] if entries else size_no
        raise MatrixMarketError(f"expected {nnz} entries, found {len(entries)}", where)
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.ones(nnz, dtype=float)
    want = 2 if field_kind == "pattern" else 3
    for k, (no, ln) in enumerate(entries):
        toks = ln.split()
        if len(toks) != want:
            raise MatrixMarketError(f"expected {want} fields, found {len(toks)}", no)
        try:
            i, j = int(toks[0]), int(toks[1])
        except ValueError:
            raise MatrixMarketError(f"non-integer index in {ln!r}", no) from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MatrixMarketError(f"index ({i}, {j}) out of bounds for {n_rows}x{n_cols}", no)
        if symmetry == "symmetric" and j > i:
            raise MatrixMarketError(f"entry ({i}, {j}) above the diagonal in symmetric storage", no)
        rows[k], cols[k] = i - 1, j - 1
        if want == 3:
            vals[k] = _parse_number(toks[2], field_kind, no)
    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    mat = sp.coo_array((vals, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
    return SparseCsr.from_scipy(mat)


def write_matrix_market(path, A, symmetric: bool = False, comment: str | None = None) -> None:
    """Write a coordinate real file; ``symmetric=True`` stores the lower triangle."""
    if isinstance(A, SparseCsr):
        coo = A.to_scipy().tocoo()
    elif sp.issparse(A):
        coo = sp.coo_array(A)
    else:
        coo = sp.coo_array(np.asarray(A, dtype=float))
    coo.sum_duplicates()
    rows, cols, vals = coo.row, coo.col, coo.data
    keep = vals != 0
    if symmetric:
        keep &= rows >= cols
    order = np.lexsort((rows[keep], cols[keep]))
    rows, cols, vals = rows[keep][order], cols[keep][order], vals[keep][order]
    kind = "symmetric" if symmetric else "general"
    out = [f"%%MatrixMarket matrix coordinate real {kind}"]
    if comment:
        out.extend("% " + c for c in comment.splitlines())
    out.append(f"{coo.shape[0]} {coo.shape[1]} {len(vals)}")
    out.extend(f"{i + 1} {j + 1} {v!r}" for i, j, v in zip(rows, cols, vals.tolist()))
    Path(path).write_text("\n".join(out) + "\n")
