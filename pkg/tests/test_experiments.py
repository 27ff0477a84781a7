import numpy as np
import pytest

from symlanczos.estimators import ScalarFunction
from symlanczos.experiments import (
    dense_trace,
    error_vs_queries,
    reference_case,
    sample_variance,
    summarize_errors,
    synthetic_jordan_wielandt,
    variance_experiment,
)
from symlanczos.lanczos import tridiagonalize
from symlanczos.linop import DenseSymmetric
from symlanczos.quadrature import classify_symmetry, golub_welsch


@pytest.mark.parametrize("number", [1, 2, 3])
def test_reference_case_spectrum(number):
    case = reference_case(number)
    assert np.allclose(np.linalg.eigvalsh(case.matrix), np.sort(case.eigenvalues), atol=1e-13)
    assert np.isclose(np.linalg.norm(case.vector), 1.0)


@pytest.mark.parametrize("number,symmetric", [(1, True), (2, False), (3, False)])
def test_reference_case_table(number, symmetric):
    case = reference_case(number)
    rule = golub_welsch(tridiagonalize(DenseSymmetric(case.matrix), case.vector, 10).jacobi)
    assert classify_symmetry(rule, 0.51).symmetric is symmetric


def test_reference_case_unknown():
    with pytest.raises(ValueError):
        reference_case(4)


def test_synthetic_singular_values():
    op = synthetic_jordan_wielandt(6, 4, seed=3)
    rng = np.random.default_rng(3)
    rng.standard_normal((6, 6))
    rng.standard_normal((4, 4))
    sigma = np.sort(np.abs(rng.standard_normal(4)))
    assert np.allclose(np.sort(np.linalg.svd(op.block_array(), compute_uv=False)), sigma)
    assert np.array_equal(op.block_array(), synthetic_jordan_wielandt(6, 4, seed=3).block_array())


def test_variance_single_trial_is_zero():
    op = synthetic_jordan_wielandt(5, 5, seed=0)
    out = variance_experiment(op, 1, 5)
    assert all(sample_variance(v) == 0.0 for v in out.values())


def test_variance_all_families_estimate_the_trace():
    op = synthetic_jordan_wielandt(7, 4, seed=1)
    out = variance_experiment(op, 4000, 11, seed=2, reorth="full")
    exact = dense_trace(op, np.exp)
    for samples in out.values():
        se = np.std(samples, ddof=1) / np.sqrt(samples.size)
        assert abs(samples.mean() - exact) <= 4 * se


def test_error_vs_queries_identity_is_exact():
    op = DenseSymmetric(np.eye(6))
    rows = error_vs_queries(op, [3, 5], 4, 3, ScalarFunction("identity"), estimators=("hutchinson",))
    assert all(r.relative_error < 1e-14 for r in rows)
    table = summarize_errors(rows)
    assert [t[:2] for t in table] == [("hutchinson", 3), ("hutchinson", 5)]


def test_error_vs_queries_sorted_and_deterministic():
    op = synthetic_jordan_wielandt(8, 8, seed=0)
    kw = dict(queries=[6, 3], trials=3, m=8, seed=4, estimators=("partial-upper", "hutchpp", "hutchinson"))
    rows = error_vs_queries(op, **kw)
    keys = [(r.estimator, r.queries, r.trial) for r in rows]
    assert keys == sorted(keys)
    assert rows == error_vs_queries(op, **kw)


def test_single_trial_percentiles_coincide():
    op = synthetic_jordan_wielandt(5, 5, seed=0)
    table = summarize_errors(error_vs_queries(op, [4], 1, 5))
    assert len(table) == 3
    assert all(t[2] == t[3] == t[4] for t in table)


def test_dense_trace_limit():
    class Huge:
        dimension = 5000

    with pytest.raises(ValueError):
        dense_trace(Huge(), np.exp)
