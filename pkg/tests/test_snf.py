import math

import pytest
from hypothesis import given, settings, strategies as st

from critgroup.graphs import LayeredSpec, laplacian, standard_family
from critgroup.groups import AbelianGroup
from critgroup.matrix import IntMatrix, det, is_unimodular
from critgroup.pipeline import extract_L3
from critgroup.snf import cokernel, invariant_factors, smith_normal_form, snf_naive_oracle


def matrices(max_dim=8, lo=-9, hi=9):
    return st.tuples(st.integers(1, max_dim), st.integers(1, max_dim)).flatmap(
        lambda rc: st.lists(
            st.lists(st.integers(lo, hi), min_size=rc[1], max_size=rc[1]), min_size=rc[0], max_size=rc[0]
        ).map(IntMatrix)
    )


@pytest.mark.parametrize(
    "rows, factors",
    [
        # gcd(4, 6) = 2 and 2 * 12 = |det| = 24
        ([[4, 0], [0, 6]], (2, 12)),
        ([[2, 4], [4, 6]], (2, 2)),
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], (1, 1, 1)),
        ([[6]], (6,)),
        ([[0, 0], [0, 0]], ()),
    ],
)
def test_snf_examples(rows, factors):
    A = IntMatrix(rows)
    res = smith_normal_form(A)
    assert res.factors == factors
    assert res.verify(A)
    assert invariant_factors(A) == factors


def test_snf_zero_matrix():
    res = smith_normal_form(IntMatrix.zeros(2, 3))
    assert res.D == IntMatrix.zeros(2, 3)
    assert res.factors == ()


def test_laplacian_c4():
    # K(C_4) is cyclic of order 4 = number of spanning trees
    L = laplacian(standard_family("cycle", 4))
    assert invariant_factors(L) == (1, 1, 4)
    res = smith_normal_form(L)
    assert res.D.diagonal() == (1, 1, 4, 0)
    assert cokernel(L) == AbelianGroup(1, (4,))


def test_cokernel_examples():
    assert cokernel(IntMatrix.identity(3)) == AbelianGroup(0, ())
    assert cokernel(IntMatrix.diag([1, 2, 6, 0])) == AbelianGroup(1, (2, 6))
    # Z^2 / <(2, 0)>: rows minus rank
    assert cokernel(IntMatrix([[2], [0]])) == AbelianGroup(1, (2,))


def test_naive_oracle_examples():
    assert snf_naive_oracle(IntMatrix([[2, 4], [4, 6]])) == (2, 2)
    assert snf_naive_oracle(IntMatrix.identity(3)) == (1, 1, 1)
    L3, _ = extract_L3(LayeredSpec((2, 2, 2, 2)))
    assert L3.shape == (8, 8)
    assert snf_naive_oracle(L3) == invariant_factors(L3)
    with pytest.raises(ValueError):
        snf_naive_oracle(IntMatrix.identity(9))


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_snf_certificate(A):
    res = smith_normal_form(A)
    assert res.P @ A @ res.Q == res.D
    assert det(res.P) in (1, -1) and det(res.Q) in (1, -1)
    assert res.D.is_diagonal()
    assert all(d >= 0 for d in res.D.diagonal())
    f = res.factors
    assert all(b % a == 0 for a, b in zip(f, f[1:]))
    # zeros only after the nonzero run
    diag = res.D.diagonal()
    assert diag[: len(f)] == f and all(d == 0 for d in diag[len(f):])


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_snf_matches_determinantal_divisors(A):
    assert smith_normal_form(A).factors == snf_naive_oracle(A)


@settings(max_examples=80, deadline=None)
@given(matrices(6))
def test_snf_transpose_stable(A):
    assert invariant_factors(A) == invariant_factors(A.T)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(
    st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n).map(IntMatrix)))
def test_product_of_factors_is_abs_det(A):
    d = det(A)
    if d:
        assert math.prod(invariant_factors(A)) == abs(d)


def test_snf_large_entries():
    A = IntMatrix([[10 ** 40, 3], [7, 10 ** 41 + 1]])
    res = smith_normal_form(A)
    assert res.verify(A)
    assert math.prod(res.factors) == abs(det(A))


def test_snf_transforms_unimodular_on_laplacian():
    L = laplacian(standard_family("complete", 5))
    res = smith_normal_form(L)
    assert is_unimodular(res.P) and is_unimodular(res.Q)
    # K(K_5) = (Z/5)^3
    assert res.factors == (1, 5, 5, 5)
