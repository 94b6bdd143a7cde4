from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dioflow.maps import (
    BUILTIN_MAPS,
    AnalyticMap,
    builtin_map,
    check_li_complex,
    check_li_real,
    line_iz,
    mahler_curve,
    map_from_dict,
    map_to_dict,
    nonextremal_example,
    read_map,
    resolve_map,
    write_map,
    zero_map,
)


def sampled_ranks(f, count=40, seed=0):
    """Numeric (real, complex) rank of {1, f_1, ..., f_n} from point evaluations."""
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count)
    vals = np.column_stack([np.ones(count, dtype=complex), f(z)])
    real = np.vstack([vals.real, vals.imag])
    return np.linalg.matrix_rank(real, tol=1e-9), np.linalg.matrix_rank(vals, tol=1e-9)


def test_mahler_evaluation():
    assert mahler_curve(1)([0.3 - 0.2j])[0, 0] == 0.3 - 0.2j
    assert np.allclose(mahler_curve(2)([1 + 1j])[0], [1 + 1j, 2j])
    assert mahler_curve(3).analytic


def test_line_and_nonextremal_evaluation():
    assert np.allclose(line_iz()([1])[0], [1, 1j])
    assert np.allclose(nonextremal_example()([1 + 1j])[0], [1 + 1j, 2 + 2j])
    assert not nonextremal_example().analytic
    assert line_iz().analytic


@pytest.mark.parametrize("n", range(1, 7))
def test_mahler_independence(n):
    f = mahler_curve(n)
    assert check_li_real(f) and check_li_complex(f)
    assert sampled_ranks(f) == (n + 1, n + 1)


def test_line_iz_independence():
    f = line_iz()
    assert check_li_real(f)
    assert not check_li_complex(f)
    assert sampled_ranks(f) == (3, 2)


def test_nonextremal_independence():
    f = nonextremal_example()
    assert check_li_complex(f) and check_li_real(f)
    assert sampled_ranks(f) == (3, 3)


def test_real_relation_detected():
    # f_2 = 3 f_1 + 2
    f = AnalyticMap.from_z_polynomials([{1: 1, 2: 1j}, {0: 2, 1: 3, 2: 3j}])
    assert not check_li_real(f) and not check_li_complex(f)
    assert sampled_ranks(f)[0] == 2
    assert not check_li_real(zero_map(2))


def test_builtin_registry():
    assert set(BUILTIN_MAPS) >= {"mahler-2", "line-iz", "nonextremal", "zero-2"}
    assert builtin_map("mahler-3") == mahler_curve(3)
    with pytest.raises(KeyError):
        builtin_map("nope")


def test_equality_ignores_name():
    a = mahler_curve(2)
    b = AnalyticMap(a.real, a.imag, name="other")
    assert a == b


def test_file_roundtrip(tmp_path):
    f = AnalyticMap.from_monomials([{(1, 0): Fraction(1, 3) + 0j, (0, 2): complex(0.1, -2.5)},
                                    {(2, 1): Fraction(-7, 9)}], name="mixed")
    path = tmp_path / "m.json"
    write_map(f, path)
    g = read_map(path)
    assert g == f and g.name == "mixed"
    assert resolve_map(str(path)) == f
    assert map_from_dict(map_to_dict(nonextremal_example())) == nonextremal_example()


def test_bad_map_files():
    with pytest.raises(ValueError):
        map_from_dict({"n": 2, "components": [[[1, 0, "1", "0"]]]})
    with pytest.raises(ValueError):
        map_from_dict({"n": 1, "components": [[[1, 0, "1", "0"], [1, 0, "2", "0"]]]})


coeffs = st.dictionaries(st.integers(0, 4), st.complex_numbers(max_magnitude=5, allow_nan=False,
                                                                  allow_infinity=False), max_size=4)
# the sampled-rank oracle needs coefficients well above its tolerance
gaussian = st.builds(complex, st.integers(-3, 3), st.integers(-3, 3))
int_coeffs = st.dictionaries(st.integers(0, 4), gaussian, max_size=4)


@settings(max_examples=60, deadline=None)
@given(st.lists(coeffs, min_size=1, max_size=3))
def test_analytic_maps_evaluate_like_polynomials_in_z(comps):
    f = AnalyticMap.from_z_polynomials(comps)
    assert f.analytic
    z = np.array([0.3 + 0.4j, -0.7 + 0.1j, 0.9j])
    direct = np.column_stack([sum(c * z**k for k, c in comp.items()) + 0 * z for comp in comps])
    assert np.allclose(f(z), direct, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(int_coeffs, min_size=1, max_size=3))
def test_real_dependence_implies_complex_dependence(comps):
    f = AnalyticMap.from_z_polynomials(comps)
    if not check_li_real(f):
        assert not check_li_complex(f)
    r, c = sampled_ranks(f)
    assert check_li_real(f) == (r == f.n + 1)
    assert check_li_complex(f) == (c == f.n + 1)
