from fractions import Fraction
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dioflow.exterior import RankDeficientError
from dioflow.lattice import (
    LatticeBasis,
    covolume,
    delta,
    enumerate_subgroups,
    gram_determinant,
    integer_kernel,
    saturate,
    shortest_vector,
)

from oracles import box_minimum, gram_covolume

square_int = st.integers(1, 4).flatmap(
    lambda m: st.lists(st.lists(st.integers(-5, 5), min_size=m, max_size=m), min_size=m, max_size=m)
)


def full_rank(rows):
    return np.linalg.matrix_rank(np.array(rows, dtype=float)) == len(rows)


def test_basis_validation():
    with pytest.raises(RankDeficientError):
        LatticeBasis(((1, 2), (2, 4)))
    with pytest.raises(ValueError):
        LatticeBasis(((1, 2), (1,)))
    assert LatticeBasis(((1, 0), (Fraction(1, 2), 1))).exact
    assert not LatticeBasis(((1.0, 0.0),)).exact


def test_known_shortest_vectors():
    hex_like = LatticeBasis(((2, 0), (1, 2)))
    assert delta(hex_like, "sup") == 2
    assert delta(hex_like, "euclidean") == pytest.approx(2.0)
    skew = LatticeBasis(((1, 0, 0), (7, 1, 0), (3, 9, 1)))
    assert delta(skew, "sup") == 1


@settings(max_examples=150, deadline=None)
@given(square_int)
def test_exact_delta_matches_box_oracle(rows):
    if not full_rank(rows):
        return
    lat = LatticeBasis(tuple(map(tuple, rows)))
    d, vec = shortest_vector(lat, "sup")
    assert d == box_minimum(rows, "sup")
    d2, vec2 = shortest_vector(lat, "euclidean")
    assert sum(v * v for v in vec2) == box_minimum(rows, "euclidean")


@settings(max_examples=100, deadline=None)
@given(square_int)
def test_float_delta_matches_exact(rows):
    if not full_rank(rows):
        return
    exact = LatticeBasis(tuple(map(tuple, rows)))
    approx = LatticeBasis(tuple(tuple(float(v) for v in r) for r in rows))
    for norm in ("sup", "euclidean"):
        assert delta(approx, norm) == pytest.approx(delta(exact, norm), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(square_int, st.floats(0.1, 10))
def test_delta_is_homogeneous(rows, c):
    if not full_rank(rows):
        return
    lat = LatticeBasis(tuple(tuple(float(v) for v in r) for r in rows))
    assert delta(lat.scaled(c), "sup") == pytest.approx(c * delta(lat, "sup"), rel=1e-9)


def test_gram_and_covolume():
    lat = LatticeBasis(((1, 1, 0), (0, 1, 1)))
    assert gram_determinant(lat) == 3
    assert covolume(lat) == pytest.approx(math.sqrt(3))
    flt = LatticeBasis(((1.0, 1.0, 0.0), (0.0, 1.0, 1.0)))
    assert covolume(flt) == pytest.approx(gram_covolume(flt.generators))


def test_integer_kernel_and_saturation():
    ker = integer_kernel([[1, 2, 3]], 3)
    assert len(ker) == 2
    assert all(sum(a * b for a, b in zip([1, 2, 3], k)) == 0 for k in ker)
    # 2 e_1 saturates to e_1
    sat = saturate([[2, 0, 0]], 3)
    assert [abs(v) for v in sat[0]] == [1, 0, 0]
    # a saturated plane in Z^3 has covolume^2 = |primitive normal|^2, here (2, -1, 1)
    sat = saturate([[2, 4, 0], [0, 3, 3]], 3)
    assert gram_determinant(LatticeBasis(tuple(map(tuple, sat)))) == 6


def _brute_subgroup_keys(r, height, k):
    """Canonical primitive Plucker vectors of Q-spans of k box vectors, saturated."""
    box = [v for v in itertools.product(range(-height, height + 1), repeat=r) if any(v)]
    keys = set()
    for combo in itertools.combinations(box, k):
        sat = saturate([list(v) for v in combo], r) if np.linalg.matrix_rank(np.array(combo)) == k else None
        if sat is None:
            continue
        w = LatticeBasis(tuple(map(tuple, sat))).representing().to_dense(dtype=object)
        keys.add(tuple(int(v) for v in w))
    return keys


@pytest.mark.parametrize("r,height", [(3, 1), (3, 2)])
def test_subgroup_enumeration_counts(r, height):
    lam = LatticeBasis(tuple(tuple(int(i == j) for j in range(r)) for i in range(r)))
    subs = enumerate_subgroups(lam, r, height)
    by_rank = {}
    for s in subs:
        key = tuple(int(v) for v in s.representing().to_dense(dtype=object))
        by_rank.setdefault(s.rank, set()).add(key)
    assert sum(len(v) for v in by_rank.values()) == len(subs)
    assert len(by_rank[r]) == 1
    for k in range(1, r):
        assert by_rank[k] == _brute_subgroup_keys(r, height, k)


def test_enumerated_subgroups_are_primitive():
    lam = LatticeBasis(((1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)))
    for s in enumerate_subgroups(lam, 3, 1):
        w = s.representing().to_dense(dtype=object)
        assert math.gcd(*[int(v) for v in w]) == 1
        assert all(row[1] == 0 for row in s.generators)
