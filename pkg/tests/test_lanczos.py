import warnings

import numpy as np
import pytest

from symlanczos.experiments import reference_case
from symlanczos.lanczos import (
    BidiagonalMatrix,
    JacobiMatrix,
    bidiagonalize,
    resolve_reorth,
    tridiagonalize,
    tridiagonalize_many,
)
from symlanczos.linop import DenseSymmetric, JordanWielandtOperator
from symlanczos.quadrature import classify_symmetry, golub_welsch

from conftest import random_symmetric


def test_exchange_recurrence():
    res = tridiagonalize(DenseSymmetric([[0.0, 1.0], [1.0, 0.0]]), np.array([1.0, 0.0]), 2)
    assert res.jacobi.alpha.tolist() == [0.0, 0.0]
    assert res.jacobi.beta.tolist() == [1.0]
    assert not res.breakdown


def test_one_by_one():
    res = tridiagonalize(DenseSymmetric([[5.0]]), np.array([3.0]), 1)
    assert res.jacobi.alpha.tolist() == [5.0]
    assert res.jacobi.beta.size == 0


def test_reference_case_one_ritz_values_symmetric():
    case = reference_case(1)
    res = tridiagonalize(DenseSymmetric(case.matrix), case.vector, 10)
    assert classify_symmetry(golub_welsch(res.jacobi), 0.51).symmetric


def test_errors():
    op = DenseSymmetric(np.eye(3))
    with pytest.raises(ValueError):
        tridiagonalize(op, np.zeros(3), 2)
    with pytest.raises(ValueError):
        tridiagonalize(op, np.ones(3), 0)
    with pytest.raises(ValueError):
        tridiagonalize(op, np.ones(2), 1)
    with pytest.raises(ValueError):
        resolve_reorth("partial", 3)


def test_m_clamped_with_warning(rng):
    op = DenseSymmetric(random_symmetric(rng, 4))
    with pytest.warns(UserWarning):
        res = tridiagonalize(op, rng.standard_normal(4), 9)
    assert res.requested_m == 9 and res.effective_m <= 4


def test_breakdown_on_invariant_subspace():
    A = np.diag([1.0, 2.0, 3.0, 4.0])
    res = tridiagonalize(DenseSymmetric(A), np.array([1.0, 1.0, 0.0, 0.0]), 4)
    assert res.breakdown and res.effective_m == 2
    assert res.effective_m < res.requested_m


def test_reorth_default_policy():
    assert resolve_reorth(None, 30) == "none"
    assert resolve_reorth("auto", 31) == "full"
    assert resolve_reorth("none", 100) == "none"


def test_full_reorth_basis_orthonormal(rng):
    A = random_symmetric(rng, 60)
    res = tridiagonalize(DenseSymmetric(A), rng.standard_normal(60), 45, reorth="full", keep_basis=True)
    V = res.basis
    assert V.shape == (60, 45)
    assert np.abs(V.T @ V - np.eye(45)).max() <= 1e-8
    # V^T A V reproduces T
    assert np.allclose(V.T @ A @ V, res.jacobi.toarray(), atol=1e-10)


def test_shift_invariance(rng):
    A = random_symmetric(rng, 15)
    u = rng.standard_normal(15)
    s = 0.7
    base = tridiagonalize(DenseSymmetric(A), u, 10, reorth="full").jacobi
    shifted = tridiagonalize(DenseSymmetric(A - s * np.eye(15)), u, 10, reorth="full").jacobi
    assert np.allclose(shifted.alpha, base.alpha - s, atol=1e-10)
    assert np.allclose(shifted.beta, base.beta, atol=1e-12)
    assert np.allclose(base.shifted(s).alpha, shifted.alpha, atol=1e-10)


@pytest.mark.parametrize("reorth", ["none", "full"])
@pytest.mark.parametrize("side", ["upper", "lower"])
def test_zero_diagonal_for_partial_vectors(rng, reorth, side):
    n1, n2 = 13, 9
    op = JordanWielandtOperator(rng.standard_normal((n1, n2)))
    u = np.zeros(n1 + n2)
    if side == "upper":
        u[:n1] = rng.choice([-1.0, 1.0], n1)
    else:
        u[n1:] = rng.choice([-1.0, 1.0], n2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = tridiagonalize(op, u, 40, reorth=reorth)
    assert np.abs(res.jacobi.alpha).max() <= 1e-10 * op.one_norm()


def test_many_matches_single(rng):
    A = random_symmetric(rng, 20)
    op = DenseSymmetric(A)
    U = rng.standard_normal((20, 5))
    U[:, 2] = 0.0
    U[:3, 2] = 1.0
    op_d = DenseSymmetric(np.diag(np.arange(1.0, 21.0)))
    for operator in (op, op_d):
        batch = tridiagonalize_many(operator, U, 12, reorth="full")
        for j in range(5):
            single = tridiagonalize(operator, U[:, j], 12, reorth="full")
            assert batch.lengths[j] == single.effective_m
            assert np.allclose(batch.jacobi(j).alpha, single.jacobi.alpha, atol=1e-10)
            assert np.allclose(batch.jacobi(j).beta, single.jacobi.beta, atol=1e-10)
    assert batch.lengths[2] == 3


def test_many_rejects_zero_column(rng):
    with pytest.raises(ValueError):
        tridiagonalize_many(DenseSymmetric(np.eye(3)), np.zeros((3, 2)), 2)


def test_jacobi_matrix_invariants():
    with pytest.raises(ValueError):
        JacobiMatrix([1.0, 2.0], [0.0])
    with pytest.raises(ValueError):
        JacobiMatrix([1.0, 2.0], [1.0, 1.0])
    T = JacobiMatrix([1.0, 2.0, 3.0], [0.5, 0.25])
    assert T.leading(2).toarray().tolist() == [[1.0, 0.5], [0.5, 2.0]]
    with pytest.raises(ValueError):
        T.leading(4)


def test_bidiagonal_examples():
    J = bidiagonalize(np.array([[1.0]]), np.array([1.0]), 1)
    assert J.alpha.tolist() == [1.0] and J.beta.size == 0
    J = bidiagonalize(np.diag([3.0, 4.0]), np.array([1.0, 0.0]), 1)
    assert J.alpha.tolist() == [3.0]
    with pytest.raises(ValueError):
        bidiagonalize(np.eye(2), np.zeros(2), 1)
    with pytest.raises(ValueError):
        BidiagonalMatrix([1.0, 0.0], [1.0])


def test_bidiagonal_breakdown_in_null_space():
    B = np.array([[1.0, 0.0], [0.0, 0.0]])
    J = bidiagonalize(B, np.array([0.0, 1.0]), 2)
    assert J.m == 0 and J.breakdown


@pytest.mark.parametrize("reorth", ["none", "full"])
def test_bidiagonal_equals_tridiagonal_of_embedding(rng, reorth):
    B = rng.standard_normal((8, 5))
    v = rng.standard_normal(5)
    J = bidiagonalize(B, v, 4, reorth=reorth)
    T = tridiagonalize(JordanWielandtOperator(B), np.concatenate([np.zeros(8), v]), 8, reorth=reorth).jacobi
    assert np.allclose(J.interlaced(), T.beta[:7], atol=1e-12)
    assert np.abs(T.alpha).max() == 0.0


def test_bidiagonal_toarray_is_upper(rng):
    J = bidiagonalize(rng.standard_normal((6, 6)), rng.standard_normal(6), 3)
    M = J.toarray()
    assert np.array_equal(M, np.triu(M)) and np.array_equal(M, np.tril(M, 1))
