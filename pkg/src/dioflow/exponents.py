"""Best approximations |z.q + p| by brute-force shells, and exponent estimates
fitted to the record sequence."""

from dataclasses import dataclass
from fractions import Fraction
import math
import numbers

import mpmath
import numpy as np

from . import _kernels

HIGH_PRECISION_BELOW = 1e-10
HIGH_PRECISION_BITS = 128


def pi_plus(q):
    """prod max(|q_i|, 1); equals 1 for q = 0."""
    return math.prod(max(abs(int(c)), 1) for c in q)


def _point(z):
    from .flow import ComplexPoint

    return ComplexPoint.coerce(z)


def _is_exact(v):
    return isinstance(v, (numbers.Integral, Fraction, float))


def linear_form_parts(z, p, q):
    """(Re(z.q) + p, Im(z.q)) without rounding error.

    Float, int and Fraction coordinates are converted exactly and the result
    is a pair of Fractions; anything else (e.g. mpmath numbers) is evaluated
    with 128-bit mpmath.
    """
    z = _point(z)
    if all(_is_exact(v) for v in z.x + z.y):
        re = sum((Fraction(xi) * int(qi) for xi, qi in zip(z.x, q)), Fraction(int(p)))
        im = sum((Fraction(yi) * int(qi) for yi, qi in zip(z.y, q)), Fraction(0))
        return re, im
    with mpmath.workprec(HIGH_PRECISION_BITS):
        re = mpmath.fsum([mpmath.mpf(_mpf_arg(xi)) * int(qi) for xi, qi in zip(z.x, q)]) + int(p)
        im = mpmath.fsum([mpmath.mpf(_mpf_arg(yi)) * int(qi) for yi, qi in zip(z.y, q)])
        return re, im


def _mpf_arg(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return v


def _modulus(re, im):
    if not re and not im:
        return 0.0
    with mpmath.workprec(HIGH_PRECISION_BITS):
        return float(mpmath.sqrt(mpmath.mpf(_mpf_arg(re)) ** 2 + mpmath.mpf(_mpf_arg(im)) ** 2))


@dataclass(frozen=True)
class ApproxRecord:
    """One best approximation: |z.q + p| is smaller than at every lower height."""

    q: tuple
    p: int
    error: float
    pi_plus: int
    height: int


def _nearest_p(z, q):
    re, _ = linear_form_parts(z, 0, q)
    # round half up; ties cannot change the modulus
    if isinstance(re, Fraction):
        return -math.floor(re + Fraction(1, 2))
    return -int(mpmath.floor(re + mpmath.mpf("0.5")))


def best_approx_records(z, h_max):
    """Running-minimum records of min_p |z.q + p| over q in the sup-norm box.

    q is taken sign-canonical (first nonzero entry positive), since q and -q
    give the same error. Within a height the lexicographically first minimiser
    wins. Errors below 1e-10 are recomputed without rounding.
    """
    h_max = int(h_max)
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    z = _point(z)
    best_err, best_q = _kernels.shell_minima(z.x_array(), z.y_array(), h_max)
    records = []
    current = math.inf
    for h in range(1, h_max + 1):
        err = float(best_err[h])
        q = tuple(int(c) for c in best_q[h])
        if err < HIGH_PRECISION_BELOW:
            p = _nearest_p(z, q)
            err = _modulus(*linear_form_parts(z, p, q))
        else:
            re = sum(float(xi) * qi for xi, qi in zip(z.x, q))
            p = -int(np.rint(re))
        if err < current:
            current = err
            records.append(ApproxRecord(q, p, err, pi_plus(q), h))
            if err == 0.0:
                break
    return records


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares line -ln(error) = slope * regressor + intercept on a record tail."""

    slope: float
    intercept: float
    records_used: int
    tail: float
    regressor: str


def _fit(records, regressor, tail, name):
    records = list(records)
    if any(r.error == 0.0 for r in records):
        return ExponentFit(math.inf, math.nan, len(records), tail, name)
    if len(records) < 3:
        raise ValueError(f"need at least 3 records, got {len(records)}")
    if not 0 < tail <= 1:
        raise ValueError("tail must be in (0, 1]")
    used = records[-max(3, math.ceil(tail * len(records))):]
    xs = np.array([regressor(r) for r in used])
    ys = np.array([-math.log(r.error) for r in used])
    if np.ptp(xs) == 0:
        raise ValueError("regressor is constant on the record tail")
    slope, intercept = np.polyfit(xs, ys, 1)
    return ExponentFit(float(slope), float(intercept), len(used), tail, name)


def fit_omega(records, tail=0.5):
    return _fit(records, lambda r: math.log(r.height), tail, "ln height")


def fit_omega_mult(records, tail=0.5):
    def reg(r):
        return math.log(r.pi_plus) / len(r.q)

    return _fit(records, reg, tail, "(1/n) ln pi_plus")


def omega_estimate(records, tail=0.5):
    """Slope of -ln(error) against ln(height) over the last ``tail`` of the records.

    ``inf`` if some record hits error 0 exactly.
    """
    return fit_omega(records, tail).slope


def omega_mult_estimate(records, tail=0.5):
    """As :func:`omega_estimate` with regressor (1/n) ln pi_plus(q)."""
    return fit_omega_mult(records, tail).slope


def dirichlet_check(z, h_max):
    """``(c, fit)``: the least c with error <= c height^-target on every record,
    and the fitted exponent. The target is n for real z and (n-1)/2 otherwise."""
    if int(h_max) < 2:
        raise ValueError("h_max must be >= 2")
    z = _point(z)
    target = float(z.n) if not any(z.y) else (z.n - 1) / 2
    records = best_approx_records(z, h_max)
    c = max(r.error * r.height ** target for r in records)
    return c, fit_omega(records) if len(records) >= 3 else None
