from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dioflow.exponents import (
    ApproxRecord,
    best_approx_records,
    dirichlet_check,
    fit_omega,
    linear_form_parts,
    omega_estimate,
    omega_mult_estimate,
    pi_plus,
)
from dioflow.flow import ComplexPoint
from dioflow.maps import mahler_curve

from oracles import convergent_denominators

GOLDEN = (1 + math.sqrt(5)) / 2


def real_point(x):
    return ComplexPoint((x,), (0.0,))


def synthetic(errors_of, heights):
    return [ApproxRecord((h,), 0, errors_of(h), h, h) for h in heights]


def test_pi_plus():
    assert pi_plus((3, -1, 0)) == 3
    assert pi_plus((0, 0)) == 1


def test_rational_point_stops_at_exact_hit():
    recs = best_approx_records(ComplexPoint((Fraction(1, 3),), (Fraction(0),)), 50)
    assert recs[-1].q == (3,) and recs[-1].p == -1 and recs[-1].error == 0.0
    assert omega_estimate(recs) == math.inf


def test_gaussian_point_first_record():
    recs = best_approx_records([1j], 20)
    assert recs[0].error == 1.0 and len(recs) == 1


def test_golden_records_are_fibonacci():
    recs = best_approx_records(real_point(GOLDEN), 10_000)
    fib = [1, 2]
    while fib[-1] + fib[-2] <= 10_000:
        fib.append(fib[-1] + fib[-2])
    assert [r.height for r in recs] == fib
    assert [r.height for r in recs] == convergent_denominators(GOLDEN, 10_000)
    # |q phi - p| ~ 1 / (sqrt5 q)
    for r in recs[3:]:
        assert r.error * r.height * math.sqrt(5) == pytest.approx(1.0, rel=0.05)


@pytest.mark.parametrize("seed", range(5))
def test_real_records_are_convergents(seed):
    x = float(np.random.default_rng(seed).uniform(0, 1))
    recs = best_approx_records(real_point(x), 5000)
    assert [r.height for r in recs] == convergent_denominators(x, 5000)


def test_golden_exponent():
    assert 0.9 <= omega_estimate(best_approx_records(real_point(GOLDEN), 10_000)) <= 1.1


def test_fits_on_constructed_records():
    recs = synthetic(lambda h: h ** -2.0, [2, 3, 5, 8, 13, 21])
    assert omega_estimate(recs) == pytest.approx(2.0, abs=1e-9)
    recs = [ApproxRecord((a, b), 0, (a * b) ** -0.25, a * b, max(a, b))
            for a, b in [(2, 3), (3, 5), (5, 7), (7, 11), (11, 13)]]
    assert omega_mult_estimate(recs) == pytest.approx(0.5, abs=1e-9)


def test_fit_preconditions():
    with pytest.raises(ValueError):
        omega_estimate(synthetic(lambda h: 1 / h, [2, 3]))
    with pytest.raises(ValueError):
        fit_omega(synthetic(lambda h: 1 / h, [2, 3, 4]), tail=0)
    with pytest.raises(ValueError):
        best_approx_records([0.3], 0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=3))
def test_records_are_running_minima(coords):
    z = [complex(a, b) for a, b in coords]
    recs = best_approx_records(z, 30)
    errs = [r.error for r in recs]
    heights = [r.height for r in recs]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert all(a < b for a, b in zip(heights, heights[1:]))
    for r in recs:
        assert r.height == max(abs(c) for c in r.q)
        assert r.pi_plus <= r.height ** len(z)
        re, im = linear_form_parts(z, r.p, r.q)
        assert math.hypot(float(re), float(im)) == pytest.approx(r.error, rel=1e-9, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=3))
def test_records_invariant_under_conjugation(coords):
    z = [complex(a, b) for a, b in coords]
    a = best_approx_records(z, 30)
    b = best_approx_records([w.conjugate() for w in z], 30)
    assert [(r.q, r.p, r.height) for r in a] == [(r.q, r.p, r.height) for r in b]
    assert np.allclose([r.error for r in a], [r.error for r in b], rtol=1e-12)


def test_records_match_brute_force():
    rng = np.random.default_rng(7)
    z = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
    best = math.inf
    expected = []
    for h in range(1, 16):
        shell = [(a, b) for a in range(-h, h + 1) for b in range(-h, h + 1) if max(abs(a), abs(b)) == h]
        errs = [abs(z[0] * a + z[1] * b + round(-(z[0] * a + z[1] * b).real)) for a, b in shell]
        e = min(errs)
        if e < best:
            best = e
            expected.append(h)
    assert [r.height for r in best_approx_records(z, 15)] == expected


def test_mult_exponent_dominates_on_shared_records():
    f = mahler_curve(2)
    checked = 0
    for z in f(np.array([0.37 + 0.21j, -0.52 + 0.44j, 0.11 - 0.83j, -0.66 - 0.18j, 0.71 + 0.05j])):
        recs = best_approx_records(z, 2000)
        if len(recs) < 3:
            continue
        checked += 1
        assert omega_mult_estimate(recs) >= omega_estimate(recs) - 0.1
    assert checked >= 3


def test_dirichlet_constant_covers_every_record():
    z = mahler_curve(2)([0.3 + 0.4j])[0]
    c, fit = dirichlet_check(z, 200)
    recs = best_approx_records(z, 200)
    assert all(r.error <= c * r.height ** -0.5 * (1 + 1e-12) for r in recs)
    assert fit is not None
    c_big, _ = dirichlet_check(z, 1000)
    # the constant stays bounded as the height grows
    assert c_big <= 2 * c


def test_dirichlet_real_target():
    c, _ = dirichlet_check(real_point(GOLDEN), 1000)
    # |q phi - p| q stays near 1/sqrt5
    assert c <= 1.0
