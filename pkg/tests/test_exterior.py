from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dioflow.exterior import (
    DimensionError,
    Multivector,
    RankDeficientError,
    apply_exterior,
    basis_subsets,
    exact_det,
    exterior_power_matrix,
    plucker,
    represent_subgroup,
    wedge,
    wedge_vectors,
)

from oracles import gram_covolume


def int_matrix(rows, cols, lo=-5, hi=5):
    return st.lists(st.lists(st.integers(lo, hi), min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def test_basis_wedge_signs():
    e = [Multivector.basis(3, (i,)) for i in range(3)]
    assert wedge(e[0], e[1]) == Multivector.basis(3, (0, 1))
    assert wedge(e[1], e[0]) == Multivector(3, 2, {(0, 1): -1})
    assert wedge(e[0], e[0]).is_zero()


def test_overflow_grade_gives_flagged_zero():
    a = Multivector.basis(2, (0, 1))
    b = Multivector.basis(2, (0,))
    w = wedge(a, b)
    assert w.is_zero() and w.overflowed


def test_bad_subset_rejected():
    with pytest.raises(DimensionError):
        Multivector(3, 2, {(0, 3): 1})
    with pytest.raises(DimensionError):
        Multivector(17, 1, {})


def test_plucker_small_case():
    w = plucker([[1, 2, 3], [4, 5, 6]])
    assert w.coords == {(0, 1): -3, (0, 2): -6, (1, 2): -3}


def test_represent_subgroup_is_sign_canonical_and_exact():
    w = represent_subgroup([[0, 1, 0], [1, 0, 0]])
    assert w.coords == {(0, 1): 1}
    w = represent_subgroup([[Fraction(1, 2), 0], [0, 3]])
    assert w.coords == {(0, 1): Fraction(3, 2)}


def test_dependent_basis_rejected():
    with pytest.raises(RankDeficientError):
        represent_subgroup([[1, 2, 3], [2, 4, 6]])
    with pytest.raises(RankDeficientError):
        represent_subgroup([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0 + 1e-15]])


def test_exterior_power_matrix_top_grade_is_det():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(4, 4))
    assert exterior_power_matrix(m, 4)[0, 0] == pytest.approx(np.linalg.det(m), rel=1e-12)
    assert np.allclose(exterior_power_matrix(m, 1), m)


@settings(max_examples=60, deadline=None)
@given(int_matrix(3, 5), int_matrix(5, 5))
def test_exterior_power_is_functorial(rows, mat):
    """wedge^k(M)(v_1 ^ ... ^ v_k) = (M v_1) ^ ... ^ (M v_k), exactly."""
    w = wedge_vectors(rows)
    images = [[sum(mat[i][j] * v[j] for j in range(5)) for i in range(5)] for v in rows]
    assert apply_exterior(mat, w) == wedge_vectors(images)


@settings(max_examples=60, deadline=None)
@given(int_matrix(3, 5), int_matrix(3, 3, -3, 3))
def test_unimodular_change_scales_by_det(rows, change):
    d = int(exact_det(change))
    new = [[sum(change[i][j] * rows[j][c] for j in range(3)) for c in range(5)] for i in range(3)]
    assert wedge_vectors(new) == wedge_vectors(rows) * d


@settings(max_examples=100, deadline=None)
@given(int_matrix(3, 6))
def test_norm_squared_is_gram_determinant(rows):
    """Cauchy-Binet: ||v_1 ^ ... ^ v_k||^2 = det(B B^T)."""
    w = wedge_vectors(rows)
    gram = [[sum(a * b for a, b in zip(r, s)) for s in rows] for r in rows]
    assert w.norm_squared() == exact_det(gram)
    if not w.is_zero():
        assert w.norm() == pytest.approx(gram_covolume(rows), rel=1e-9)


def test_float_plucker_matches_exact():
    rows = [[1, -2, 3, 0], [2, 2, -1, 5]]
    exact = plucker(rows).to_dense()
    approx = plucker([[float(v) for v in r] for r in rows]).to_dense()
    assert np.allclose(exact, approx, rtol=1e-12)
    assert len(basis_subsets(4, 2)) == math.comb(4, 2)
