"""Eigenvalues of symmetric tridiagonal matrices and bidiagonal SVD.

The quadrature code only consumes eigenvalues and the first component of each
eigenvector, so the QL iteration here tracks just that first row of the
eigenvector matrix (O(m^2) work instead of O(m^3)).
"""

from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np

__all__ = [
    "TridiagEigen",
    "BidiagSvd",
    "eig_tridiagonal",
    "eig_tridiagonal_batch",
    "svd_bidiagonal",
    "jacobi_eigh",
    "ConvergenceError",
]


class ConvergenceError(ArithmeticError):
    pass


class TridiagEigen(NamedTuple):
    values: np.ndarray
    first_components: np.ndarray


class BidiagSvd(NamedTuple):
    singular_values: np.ndarray
    right_first_components: np.ndarray


@numba.njit(cache=True, inline="always")
def _pythag(a, b):
    r = np.sqrt(a * a + b * b)
    if r == np.inf or (r < 1e-150 and (a != 0.0 or b != 0.0)):
        return np.hypot(a, b)
    return r


@numba.njit(cache=True)
def _ql_first_row(d, e, z):
    # Implicit-shift QL (tqli) on diag d and subdiag e (e[m-1] unused),
    # rotating only the first row z of the eigenvector matrix. In-place.
    # Returns 0 on success, -1 when an eigenvalue needs more than 60 sweeps.
    m = d.shape[0]
    for l in range(m):
        it = 0
        while True:
            k = l
            while k < m - 1:
                dd = abs(d[k]) + abs(d[k + 1])
                if abs(e[k]) <= 2.220446049250313e-16 * dd:
                    break
                k += 1
            if k == l:
                break
            it += 1
            if it > 60:
                return -1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = _pythag(g, 1.0)
            g = d[k] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            i = k - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = _pythag(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[k] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
                i -= 1
            if underflow and i >= l:
                continue
            d[l] -= p
            e[l] = g
            e[k] = 0.0
    return 0


@numba.njit(cache=True)
def _eig_batch(alphas, betas, lengths, nodes, firsts):
    n_rows = alphas.shape[0]
    status = 0
    for row in range(n_rows):
        m = lengths[row]
        d = alphas[row, :m].copy()
        e = np.zeros(m)
        for j in range(m - 1):
            e[j] = betas[row, j]
        z = np.zeros(m)
        z[0] = 1.0
        if m > 1:
            if _ql_first_row(d, e, z) != 0:
                status = -1 - row
                break
        order = np.argsort(d, kind="mergesort")
        for j in range(m):
            nodes[row, j] = d[order[j]]
            firsts[row, j] = z[order[j]]
    return status


def eig_tridiagonal(T) -> TridiagEigen:
    """Eigenvalues (ascending) and eigenvector first components of a Jacobi matrix.

    ``T`` is anything with ``alpha`` and ``beta`` attributes, or an
    ``(alpha, beta)`` pair. Signs of the first components are unspecified.
    """
    alpha, beta = _unpack(T)
    m = alpha.shape[0]
    if m == 1:
        return TridiagEigen(alpha.copy(), np.ones(1))
    nodes = np.zeros((1, m))
    firsts = np.zeros((1, m))
    padded_beta = np.zeros((1, max(m - 1, 1)))
    padded_beta[0, : m - 1] = beta
    status = _eig_batch(alpha[None, :], padded_beta, np.array([m], dtype=np.int64), nodes, firsts)
    if status != 0:
        raise ConvergenceError("tridiagonal QL iteration did not converge")
    return TridiagEigen(nodes[0], firsts[0])


def eig_tridiagonal_batch(alphas, betas, lengths):
    """Batched :func:`eig_tridiagonal` over rows of padded coefficient arrays.

    Row ``i`` uses ``alphas[i, :lengths[i]]`` and ``betas[i, :lengths[i] - 1]``.
    Returns ``(nodes, first_components)`` padded with zeros past each length.
    """
    alphas = np.ascontiguousarray(alphas, dtype=float)
    betas = np.ascontiguousarray(betas, dtype=float)
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    if betas.shape[1] == 0:
        betas = np.zeros((alphas.shape[0], 1))
    nodes = np.zeros_like(alphas)
    firsts = np.zeros_like(alphas)
    status = _eig_batch(alphas, betas, lengths, nodes, firsts)
    if status != 0:
        raise ConvergenceError(f"tridiagonal QL iteration did not converge (row {-status - 1})")
    return nodes, firsts


def _unpack(T):
    if hasattr(T, "alpha"):
        alpha, beta = T.alpha, T.beta
    else:
        alpha, beta = T
    alpha = np.asarray(alpha, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    if alpha.size < 1 or beta.size != alpha.size - 1:
        raise ValueError("tridiagonal needs m >= 1 diagonal and m - 1 off-diagonal entries")
    return alpha, beta


def svd_bidiagonal(J) -> BidiagSvd:
    """Singular values (descending) and right-vector first components of an upper bidiagonal.

    Goes through the 2m x 2m zero-diagonal tridiagonal obtained by red-black
    permutation of ``[[0, J], [J^T, 0]]``, ordered so its first coordinate is
    the first right-side coordinate. Its positive eigenpairs ``(d, psi)`` give
    singular values ``d`` with right first component ``sqrt(2) * psi[0]``.
    """
    alpha, beta = _unpack(J)
    m = alpha.shape[0]
    if m == 1:
        return BidiagSvd(np.abs(alpha), np.ones(1))
    off = np.empty(2 * m - 1)
    off[0::2] = alpha
    off[1::2] = beta
    eig = eig_tridiagonal((np.zeros(2 * m), off))
    top = eig.values[m:][::-1]
    comps = np.sqrt(2.0) * eig.first_components[m:][::-1]
    return BidiagSvd(np.maximum(top, 0.0), comps)


@numba.njit(cache=True)
def _jacobi_sweeps(a, v, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        scale = 0.0
        for p in range(n):
            scale += a[p, p] * a[p, p]
        if off <= 1e-32 * (scale + off) or off == 0.0:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1


def jacobi_eigh(a, max_sweeps: int = 100):
    """Dense symmetric eigendecomposition by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with ascending values; ties keep the
    original diagonal order. Intended for checks on small matrices.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh needs a square matrix")
    n = a.shape[0]
    v = np.eye(n)
    if _jacobi_sweeps(a, v, max_sweeps) < 0:
        raise ConvergenceError("cyclic Jacobi did not converge")
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]
