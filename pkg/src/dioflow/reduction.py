"""Translating approximation events |z.q + p| small into flow events
delta(g_t u_z Lambda) small, and back."""

from dataclasses import dataclass
from fractions import Fraction
import math

import mpmath

from .exponents import linear_form_parts, pi_plus
from .flow import (
    TIME_CAP,
    ComplexPoint,
    FlowTime,
    NumericGuardError,
    contraction_exponent,
    integer_times,
    orbit_shortest,
)

HIGH_PRECISION_BELOW = 1e-10


@dataclass(frozen=True)
class ReductionParams:
    """Exponent v > (n-1)/2 in dimension n, with the derived rates.

    The contraction exponent is pinned to a = (n-1)/(2n); beta and gamma are
    read-only consequences of (v, n) so they cannot drift out of sync.
    """

    v: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.v > (self.n - 1) / 2:
            raise ValueError(f"v must exceed (n-1)/2 = {(self.n - 1) / 2}, got {self.v}")

    @property
    def a(self):
        return contraction_exponent(self.n)

    @property
    def beta(self):
        return (2 * self.v - self.n + 1) / (self.n * (self.n + 1))

    @property
    def gamma(self):
        return (2 * self.v - self.n + 1) / (2 * self.n * (self.v + 1))


def reduce(params, q):
    """Map a nonzero integer vector q to ``(r, t)`` with r = Pi_+(q)^-beta and
    |q_i|_+ = r e^{t_i}. Then r = e^{-gamma t} as well."""
    q = [int(c) for c in q]
    if len(q) != params.n:
        raise ValueError(f"q has {len(q)} components, expected {params.n}")
    if not any(q):
        raise ValueError("q must be nonzero")
    log_pi = math.log(pi_plus(q))
    log_r = -params.beta * log_pi
    t = FlowTime(tuple(math.log(max(abs(c), 1)) - log_r for c in q))
    return math.exp(log_r), t


def _sup_parts(z, p, q):
    z = ComplexPoint.coerce(z)
    re = sum(float(xi) * qi for xi, qi in zip(z.x, q)) + p
    im = sum(float(yi) * qi for yi, qi in zip(z.y, q))
    return max(abs(re), abs(im))


def check_22(z, p, q, v):
    """max(|x.q + p|, |y.q|) <= Pi_+(q)^(-v/n), re-evaluated in high precision near zero."""
    z = ComplexPoint.coerce(z)
    q = [int(c) for c in q]
    if not any(q):
        raise ValueError("q must be nonzero")
    n = len(q)
    lhs = _sup_parts(z, p, q)
    if lhs >= HIGH_PRECISION_BELOW:
        return lhs <= pi_plus(q) ** (-v / n)
    re, im = linear_form_parts(z, p, q)
    with mpmath.workprec(128):
        bound = mpmath.power(pi_plus(q), -mpmath.mpf(v) / n)
        return max(abs(_to_mpf(re)), abs(_to_mpf(im))) <= bound


def _to_mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def check_26(z, p, q, r, t, rtol=1e-12):
    """Both flow-side inequalities: e^{at} max(|x.q+p|, |y.q|) <= r and
    e^{-t_i}|q_i| <= r for every i.

    ``rtol`` absorbs the last-bit rounding of r e^{t_i} = |q_i|, which holds
    with equality by construction whenever |q_i| >= 1.
    """
    z = ComplexPoint.coerce(z)
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    q = [int(c) for c in q]
    n = len(q)
    limit = r * (1.0 + rtol)
    lhs = _sup_parts(z, p, q)
    if lhs < HIGH_PRECISION_BELOW:
        # e^{at} is large exactly when the linear forms are tiny; rounding in
        # them would be amplified
        re, im = linear_form_parts(z, p, q)
        lhs = max(abs(float(re)), abs(float(im)))
    if math.exp(contraction_exponent(n) * t.total) * lhs > limit:
        return False
    return all(math.exp(-ti) * abs(qi) <= limit for ti, qi in zip(t.components, q))


def corollary23_witnesses(z, gamma, total_max, norm="sup"):
    """Integer times t with total <= ``total_max`` and delta(g_t u_z Lambda) <= e^{-gamma t}."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    z = ComplexPoint.coerce(z)
    return [w.t for w in witness_search(z, gamma, total_max, norm) if w.qualifies]


@dataclass(frozen=True)
class OrbitWitness:
    """One row of an orbit scan: the shortest vector found at time t and the
    integer point (p, q) it comes from."""

    t: FlowTime
    delta: float
    threshold: float
    p: int
    q: tuple

    @property
    def qualifies(self):
        return self.delta <= self.threshold


def witness_search(z, gamma, total_max, norm="sup"):
    """Scan every integer t with total <= ``total_max``; one :class:`OrbitWitness` per t."""
    z = ComplexPoint.coerce(z)
    if total_max > TIME_CAP:
        raise NumericGuardError(f"total flow time {total_max} exceeds the cap {TIME_CAP}")
    out = []
    for t in integer_times(z.n, total_max):
        d, _, p, q = orbit_shortest(z, t, norm)
        out.append(OrbitWitness(t, d, math.exp(-gamma * t.total), p, tuple(q)))
    return out


def converse_exponent(z, witness):
    """Exponent v with |z.q + p| = Pi_+(q)^(-v/n) realised by a witness' (p, q).

    This is the empirical converse of the reduction: a short orbit vector
    should come from a good approximation. Returns ``nan`` when q = 0.
    """
    z = ComplexPoint.coerce(z)
    q = witness.q
    if not any(q):
        return math.nan
    re, im = linear_form_parts(z, witness.p, q)
    err = math.hypot(float(re), float(im))
    pp = pi_plus(q)
    if pp == 1:
        return math.nan
    if err == 0:
        return math.inf
    return -z.n * math.log(err) / math.log(pp)
