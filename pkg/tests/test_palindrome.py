import numpy as np
import pytest

from symlanczos.experiments import reference_case
from symlanczos.linop import JordanWielandtOperator
from symlanczos.palindrome import (
    PartialVectorSpec,
    is_r_partial_absolute_palindrome,
    make_partial_vector,
    verify_sufficient_condition,
)


@pytest.mark.parametrize(
    "w,r,expected",
    [([1, 2, -1], 2, True), ([1, 2, 3, 4], 4, False), ([3, -5, 0, 5, 3], 4, True), ([1, 2], 0, True)],
)
def test_palindrome_examples(w, r, expected):
    assert is_r_partial_absolute_palindrome(w, r) is expected


def test_palindrome_rejects_odd_order():
    with pytest.raises(ValueError):
        is_r_partial_absolute_palindrome([1, 1, 1], 3)
    with pytest.raises(ValueError):
        is_r_partial_absolute_palindrome([1, 1], 4)


def test_unit_partial_vector():
    v = make_partial_vector(PartialVectorSpec(2, 3, "upper", "unit", index=1))
    assert v.tolist() == [0.0, 1.0, 0.0, 0.0, 0.0]


def test_rademacher_partial_vectors():
    rng = np.random.default_rng(5)
    v = make_partial_vector(PartialVectorSpec(1, 1, "lower"), rng)
    assert v[0] == 0.0 and abs(v[1]) == 1.0
    v = make_partial_vector(PartialVectorSpec(3, 2, "lower"), rng)
    assert np.all(v[:3] == 0) and np.all(np.abs(v[3:]) == 1)
    v = make_partial_vector(PartialVectorSpec(4, 6, "upper"), rng)
    assert np.count_nonzero(v == 0) == 6


def test_custom_partial_vector():
    v = make_partial_vector(PartialVectorSpec(2, 1, "upper", "custom", values=(0.5, -2.0)))
    assert v.tolist() == [0.5, -2.0, 0.0]
    with pytest.raises(ValueError):
        make_partial_vector(PartialVectorSpec(2, 1, "upper", "custom", values=(0.0, 0.0)))
    rng = np.random.default_rng(0)
    drawn = make_partial_vector(
        PartialVectorSpec(2, 2, "lower", "custom", values=lambda g, k: g.standard_normal(k)), rng
    )
    assert np.all(drawn[:2] == 0) and np.all(drawn[2:] != 0)


def test_spec_validation():
    with pytest.raises(ValueError):
        PartialVectorSpec(0, 2)
    with pytest.raises(ValueError):
        PartialVectorSpec(2, 2, side="middle")
    with pytest.raises(ValueError):
        make_partial_vector(PartialVectorSpec(2, 2, family="unit", index=5))


def test_sufficient_condition_exchange():
    rep = verify_sufficient_condition(np.array([[0.0, 1.0], [1.0, 0.0]]), [1.0, 0.0])
    assert rep.spectrum_symmetric and rep.palindrome and rep.holds
    assert np.allclose(np.abs(rep.measure_vector), 1 / np.sqrt(2))


def test_sufficient_condition_asymmetric_spectrum():
    rep = verify_sufficient_condition(np.diag([1.0, 2.0]), [0.3, 0.7])
    assert not rep.spectrum_symmetric and not rep.holds


def test_case_three_not_palindrome():
    case = reference_case(3)
    rep = verify_sufficient_condition(case.matrix - case.center * np.eye(50), case.vector)
    assert rep.spectrum_symmetric
    assert not rep.palindrome


def test_case_one_palindrome():
    case = reference_case(1)
    rep = verify_sufficient_condition(case.matrix - case.center * np.eye(50), case.vector)
    assert rep.holds


def test_partial_vectors_give_palindromes_of_order_twice_rank():
    rng = np.random.default_rng(77)
    for _ in range(200):
        n1, n2 = rng.integers(1, 13, size=2)
        B = rng.standard_normal((n1, n2))
        side = "upper" if rng.random() < 0.5 else "lower"
        v = make_partial_vector(PartialVectorSpec(int(n1), int(n2), side), rng)
        rep = verify_sufficient_condition(JordanWielandtOperator(B), v)
        assert rep.spectrum_symmetric
        assert rep.rank == 2 * np.linalg.matrix_rank(B)
        assert rep.palindrome_order == rep.rank
        assert rep.palindrome
        h = rep.rank // 2
        mu = np.abs(rep.measure_vector)
        assert np.allclose(mu[:h], mu[::-1][:h], atol=1e-8)


def test_sufficient_condition_size_limit():
    with pytest.raises(ValueError):
        verify_sufficient_condition(np.eye(300), np.ones(300))
