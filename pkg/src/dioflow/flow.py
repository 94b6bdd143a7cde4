"""The unipotent matrices u_z, the diagonal flow g_t, the lattice Lambda, and
shortest vectors along orbits g_t u_z Lambda.

Coordinates of R^{n+2} are ordered (e_0, e_*, e_1, ..., e_n).
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import mpmath
import numpy as np

from . import _kernels
from .lattice import LatticeBasis, _check_norm, lll_generic, shortest_generic

HIGH_PRECISION_THRESHOLD = 80.0
TIME_CAP = 200.0
HIGH_PRECISION_BITS = 128


class NumericGuardError(ArithmeticError):
    """Flow time beyond the range where the computation is meaningful."""


@dataclass(frozen=True)
class FlowTime:
    """A point t of the closed positive orthant; ``total`` is the sum of components."""

    components: tuple

    def __post_init__(self):
        comps = tuple(float(c) for c in self.components)
        if not comps:
            raise ValueError("flow time needs at least one component")
        for c in comps:
            if not math.isfinite(c) or c < 0:
                raise ValueError(f"flow time components must be finite and >= 0, got {c}")
        object.__setattr__(self, "components", comps)

    @property
    def n(self):
        return len(self.components)

    @property
    def total(self):
        return sum(self.components)

    def as_array(self):
        return np.array(self.components)

    @classmethod
    def zero(cls, n):
        return cls((0.0,) * n)


@dataclass(frozen=True)
class ComplexPoint:
    """z = x + i y in C^n. Coordinates may be floats, Fractions or mpmath numbers."""

    x: tuple
    y: tuple

    def __post_init__(self):
        x, y = tuple(self.x), tuple(self.y)
        if len(x) != len(y) or not x:
            raise ValueError("real and imaginary parts must have the same positive length")
        for v in x + y:
            if not math.isfinite(float(v)):
                raise ValueError("coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_complex(cls, values):
        values = [complex(v) for v in np.atleast_1d(values)]
        return cls(tuple(v.real for v in values), tuple(v.imag for v in values))

    @classmethod
    def coerce(cls, z):
        return z if isinstance(z, ComplexPoint) else cls.from_complex(z)

    @property
    def n(self):
        return len(self.x)

    def x_array(self):
        return np.array([float(v) for v in self.x])

    def y_array(self):
        return np.array([float(v) for v in self.y])

    def as_complex(self):
        return self.x_array() + 1j * self.y_array()

    def conjugate(self):
        return ComplexPoint(self.x, tuple(-v for v in self.y))


def contraction_exponent(n):
    """(n - 1) / (2n), the expansion rate of e_0 and e_* under g_t per unit of total t."""
    return (n - 1) / (2 * n)


def u_matrix(z):
    """u_z = [[1, 0, x^T], [0, 1, y^T], [0, 0, I_n]]."""
    z = ComplexPoint.coerce(z)
    n = z.n
    u = np.eye(n + 2)
    u[0, 2:] = z.x_array()
    u[1, 2:] = z.y_array()
    return u


def g_matrix(t, n=None):
    """g_t = diag(e^{at}, e^{at}, e^{-t_1}, ..., e^{-t_n}) with a = (n-1)/(2n)."""
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    if n is None:
        n = t.n
    if n < 1 or t.n != n:
        raise ValueError(f"flow time has {t.n} components, expected n = {n}")
    expand = math.exp(contraction_exponent(n) * t.total)
    return np.diag([expand, expand] + [math.exp(-c) for c in t.components])


def lambda_subgroup(n):
    """The rank n+1 lattice {(p, 0, q)} in Z^{n+2}, generated by e_0, e_1, ..., e_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = n + 2
    gens = [tuple(int(c == 0) for c in range(m))]
    gens += [tuple(int(c == i + 2) for c in range(m)) for i in range(n)]
    return LatticeBasis(tuple(gens))


def orbit_lattice(z, t):
    """Floating-point basis of g_t u_z Lambda."""
    z = ComplexPoint.coerce(z)
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    _check_dims(z, t)
    mat = g_matrix(t, z.n) @ u_matrix(z)
    return lambda_subgroup(z.n).transformed(mat)


def _check_dims(z, t):
    if z.n != t.n:
        raise ValueError(f"point has n = {z.n} but flow time has {t.n} components")


def _mp(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def _orbit_shortest_high_precision(z, t, sup):
    n = z.n
    with mpmath.workprec(HIGH_PRECISION_BITS):
        total = mpmath.fsum(_mp(c) for c in t.components)
        expand = mpmath.exp(mpmath.mpf(n - 1) / (2 * n) * total)
        rows = [[expand] + [mpmath.mpf(0)] * (n + 1)]
        for i in range(n):
            row = [expand * _mp(z.x[i]), expand * _mp(z.y[i])] + [mpmath.mpf(0)] * n
            row[i + 2] = mpmath.exp(-_mp(t.components[i]))
            rows.append(row)
        reduced = lll_generic(rows, delta=mpmath.mpf("0.99"))
        val, vec = shortest_generic(reduced, sup)
        value = float(val) if sup else float(mpmath.sqrt(val))
        return value, [float(v) for v in vec]


def orbit_shortest(z, t, norm="sup", precision="auto"):
    """Shortest nonzero vector of g_t u_z Lambda: ``(delta, vector, p, q)``.

    ``precision`` is ``"double"``, ``"high"`` (128-bit mpmath) or ``"auto"``,
    which switches to high precision when the total time exceeds
    :data:`HIGH_PRECISION_THRESHOLD`. Raises :class:`NumericGuardError` above
    :data:`TIME_CAP`.
    """
    sup = _check_norm(norm)
    z = ComplexPoint.coerce(z)
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    _check_dims(z, t)
    if t.total > TIME_CAP:
        raise NumericGuardError(f"total flow time {t.total} exceeds the cap {TIME_CAP}")
    if precision not in ("auto", "double", "high"):
        raise ValueError(f"unknown precision mode {precision!r}")
    high = precision == "high" or (precision == "auto" and t.total > HIGH_PRECISION_THRESHOLD)
    if high:
        value, vec = _orbit_shortest_high_precision(z, t, sup)
    else:
        out = np.zeros(z.n + 2)
        value = float(_kernels.orbit_delta_one(z.x_array(), z.y_array(), t.as_array(), sup, out))
        vec = out.tolist()
    # recover the integer point (p, q) with vector = g_t u_z (p, 0, q)
    q = [int(round(vec[i + 2] * math.exp(t.components[i]))) for i in range(z.n)]
    expand = math.exp(contraction_exponent(z.n) * t.total)
    p = int(round(vec[0] / expand - sum(float(xi) * qi for xi, qi in zip(z.x, q))))
    return value, vec, p, q


def orbit_delta(z, t, norm="sup", precision="auto"):
    """delta(g_t u_z Lambda)."""
    return orbit_shortest(z, t, norm, precision)[0]


def orbit_delta_samples(x, y, t, norm="sup"):
    """delta(g_t u_z Lambda) for every row z = x[s] + i y[s] (double precision)."""
    sup = _check_norm(norm)
    x = np.ascontiguousarray(x, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if x.ndim == 1:
        x, y = x[:, None], y[:, None]
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    if x.shape[1] != t.n:
        raise ValueError(f"points have n = {x.shape[1]} but flow time has {t.n} components")
    if t.total > TIME_CAP:
        raise NumericGuardError(f"total flow time {t.total} exceeds the cap {TIME_CAP}")
    out = np.zeros(x.shape[0])
    _kernels.orbit_delta_batch(x, y, t.as_array(), sup, out)
    return out


def delta_trace(z, ts, norm="sup", precision="auto"):
    """``[(t, delta(g_t u_z Lambda)) for t in ts]`` in input order."""
    z = ComplexPoint.coerce(z)
    out = []
    for t in ts:
        t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
        out.append((t, orbit_delta(z, t, norm, precision)))
    return out


def integer_times(n, total_max):
    """All t in Z_+^n with total <= total_max, ordered by total then lexicographically."""
    out = []

    def rec(prefix, remaining):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for c in range(remaining + 1):
            rec(prefix + [c], remaining - c)

    rec([], total_max)
    out.sort(key=lambda c: (sum(c), c))
    return [FlowTime(c) for c in out]
