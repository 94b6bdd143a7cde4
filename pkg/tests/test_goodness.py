import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dioflow.goodness import (
    DEFAULT_EPS_GRID,
    Ball,
    LinearPairFamily,
    NearZeroWarning,
    PreconditionError,
    check_good,
    combine_good,
    good_fit,
    orthogonal_pair_family,
    rho1_estimate,
    rho2_estimate,
    sublevel_ratios,
)
from dioflow.maps import mahler_curve

from oracles import strip_fraction_disc

DISC = Ball((0.0, 0.0), 1.0)
SQUARE = Ball((0.0, 0.0), 1.0, metric="sup")
N = 100_000


def fx(x, y):
    return x


def fy(x, y):
    return y


def fx2(x, y):
    return x * x


def test_ball_validation_and_sampling():
    with pytest.raises(ValueError):
        Ball((0, 0), 0.0)
    with pytest.raises(ValueError):
        Ball((0, 0), 1.0, metric="taxicab")
    pts = Ball(0.5 + 0.5j, 0.1).sample(2000, seed=3)
    assert np.all(np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5) <= 0.1)
    assert np.array_equal(pts, Ball((0.5, 0.5), 0.1).sample(2000, seed=3))
    sq = SQUARE.boundary(8)
    assert np.all(np.abs(sq).max(axis=1) == pytest.approx(1.0))


def test_strip_ratios_match_closed_form():
    rep = good_fit(fx, DISC, samples=N)
    expected = [strip_fraction_disc(e) for e in rep.eps_grid]
    assert np.allclose(rep.measured_ratios, expected, atol=5e-3)
    assert 0.9 <= rep.alpha <= 1.1
    assert rep.violation_count == 0


def test_square_root_ratios():
    rep = good_fit(fx2, SQUARE, samples=N)
    assert np.allclose(rep.measured_ratios, np.sqrt(rep.eps_grid), atol=5e-3)
    assert 0.45 <= rep.alpha <= 0.55
    assert rep.C == pytest.approx(1.0, abs=0.1)


def test_constant_and_zero_are_degenerate():
    rep = good_fit(lambda x, y: 3.0 + 0 * x, DISC, samples=2000)
    assert rep.degenerate == "constant" and math.isnan(rep.C)
    assert check_good(lambda x, y: 3.0 + 0 * x, DISC, 1e-6, 5.0, samples=2000)
    rep = good_fit(lambda x, y: 0 * x, DISC, samples=2000)
    assert rep.degenerate == "zero"


def test_check_good_cases():
    rep = good_fit(fx, DISC, samples=N)
    assert check_good(fx, DISC, rep.C, rep.alpha, samples=N)
    assert not check_good(fx, DISC, rep.C / 2, rep.alpha, samples=N)
    assert check_good(fx, DISC, 2.0, 1.0, samples=N)
    assert check_good(fx2, SQUARE, 1.0, 1e-9, samples=N)
    with pytest.raises(ValueError):
        check_good(fx, DISC, 0.0, 1.0)


def test_combination_rule():
    assert combine_good([fx], 2.0, 1.0, DISC) == check_good(fx, DISC, 2.0, 1.0)
    assert combine_good([fx, fy], 2.0, 1.0, DISC)
    # radial oracle: |{r < eps}| / pi = eps^2 <= 2 sqrt2 eps
    rep = good_fit(lambda x, y: np.hypot(x, y), DISC, samples=N)
    assert np.allclose(rep.measured_ratios, np.square(rep.eps_grid), atol=5e-3)
    with pytest.raises(PreconditionError):
        combine_good([fx, fx2], 1.0, 1.0, DISC)


def test_grid_validation():
    with pytest.raises(ValueError):
        good_fit(fx, DISC, samples=500)
    with pytest.raises(ValueError):
        good_fit(fx, DISC, eps_grid=[0.0, 0.5])
    with pytest.raises(ValueError):
        good_fit(fx, DISC, eps_grid=[1.5])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=5, max_size=200).filter(lambda v: any(v)))
def test_ratios_nondecreasing_and_bounded(vals):
    _, ratios = sublevel_ratios(vals, DEFAULT_EPS_GRID)
    assert np.all(np.diff(ratios) >= 0)
    assert np.all((0 <= ratios) & (ratios < 1))


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(0, 2), st.integers(0, 2))
def test_fit_is_scale_invariant(c, a, b):
    def f(x, y):
        return (x - 0.2) ** (a + 1) * (y + 0.3) ** b

    def g(x, y):
        return c * f(x, y)

    r1 = good_fit(f, DISC, samples=4000)
    r2 = good_fit(g, DISC, samples=4000)
    assert r1.measured_ratios == r2.measured_ratios
    assert r1.C == pytest.approx(r2.C, rel=1e-12) and r1.alpha == pytest.approx(r2.alpha, rel=1e-12)


def test_rho1_interval():
    unit = Ball((0.5, 0.0), 0.5, metric="sup")
    assert rho1_estimate(unit, [fx]) == pytest.approx(1 / math.sqrt(5), abs=1e-3)


def test_rho1_flags_dependence():
    with pytest.warns(NearZeroWarning):
        rho1_estimate(DISC, [fx, lambda x, y: 2.0 + 0 * x])


def test_rho1_grows_with_the_ball():
    small = rho1_estimate(Ball((0.5, 0.5), 0.1), [fx, fy])
    big = rho1_estimate(Ball((0.5, 0.5), 0.3), [fx, fy])
    assert big >= small


def test_rho2_simple_families():
    assert rho2_estimate(DISC, [(lambda z: z, lambda z: 1j * z)]) == pytest.approx(1.0)
    with pytest.warns(NearZeroWarning):
        rho2_estimate(DISC, [(lambda z: z, lambda z: 2 * z)])


def test_rho2_shrinking_family_does_not_decrease():
    f = mahler_curve(2)
    ball = Ball((0.5, 0.5), 0.1)
    fam = orthogonal_pair_family(2, 0.1)
    half = LinearPairFamily(fam.u1[::2], fam.u2[::2], fam.a[::2], fam.b[::2])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearZeroWarning)
        assert rho2_estimate(ball, half, f=f) >= rho2_estimate(ball, fam, f=f)


def test_rho2_mahler_stable_under_refinement():
    f = mahler_curve(2)
    ball = Ball((0.5, 0.5), 0.1)
    coarse = rho2_estimate(ball, orthogonal_pair_family(2, 0.1), f=f)
    fine = rho2_estimate(ball, orthogonal_pair_family(2, 0.05), f=f)
    assert coarse > 0 and fine > 0
    assert abs(coarse - fine) <= 0.1 * fine
