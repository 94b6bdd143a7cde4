"""Polynomial maps f: C -> C^n written in the real variables (x, y), and the
linear-independence tests for 1, f_1, ..., f_n over R and over C."""

from dataclasses import dataclass
from fractions import Fraction
from math import comb
import json

import numpy as np

from .polynomial import Poly, coefficient_rows, rational_rank

X = Poly.var(2, 0)
Y = Poly.var(2, 1)
ONE = Poly.const(2, 1)
ZERO = Poly(2)


def _gauss(c):
    """Exact (re, im) pair for an int, Fraction, float, complex or pair."""
    if isinstance(c, complex):
        return Fraction(c.real), Fraction(c.imag)
    if isinstance(c, (tuple, list)):
        re, im = c
        return Fraction(re), Fraction(im)
    return Fraction(c), Fraction(0)


def z_power(k):
    """(Re z^k, Im z^k) as polynomials in (x, y)."""
    re, im = {}, {}
    for j in range(k + 1):
        # (x + iy)^k = sum C(k, j) x^(k-j) (iy)^j, and i^j cycles 1, i, -1, -i
        c = comb(k, j)
        sign = 1 if j % 4 in (0, 1) else -1
        target = re if j % 2 == 0 else im
        target[(k - j, j)] = sign * c
    return Poly(2, re), Poly(2, im)


@dataclass(frozen=True, eq=False)
class AnalyticMap:
    """f = g + i h with each g_i, h_i a real polynomial in (x, y).

    ``name`` is informational only and plays no part in equality.
    """

    real: tuple
    imag: tuple
    name: str = ""

    def __post_init__(self):
        real, imag = tuple(self.real), tuple(self.imag)
        if not real or len(real) != len(imag):
            raise ValueError("need the same positive number of real and imaginary parts")
        for p in real + imag:
            if not isinstance(p, Poly) or p.nvars != 2:
                raise TypeError("components must be polynomials in two variables")
        object.__setattr__(self, "real", real)
        object.__setattr__(self, "imag", imag)

    @classmethod
    def from_monomials(cls, components, name=""):
        """``components[i]`` maps (a, b) to the coefficient of x^a y^b in f_i."""
        real, imag = [], []
        for comp in components:
            re, im = {}, {}
            for (a, b), c in comp.items():
                cr, ci = _gauss(c)
                re[(a, b)], im[(a, b)] = cr, ci
            real.append(Poly(2, re))
            imag.append(Poly(2, im))
        return cls(tuple(real), tuple(imag), name)

    @classmethod
    def from_z_polynomials(cls, components, name=""):
        """``components[i]`` maps k to the coefficient of z^k in f_i."""
        real, imag = [], []
        for comp in components:
            g, h = ZERO, ZERO
            for k, c in comp.items():
                cr, ci = _gauss(c)
                pr, pi = z_power(k)
                g = g + pr * cr - pi * ci
                h = h + pr * ci + pi * cr
            real.append(g)
            imag.append(h)
        return cls(tuple(real), tuple(imag), name)

    @property
    def n(self):
        return len(self.real)

    def monomials(self):
        """Per component, sorted ``[(a, b, re, im)]`` with exact coefficients."""
        out = []
        for g, h in zip(self.real, self.imag):
            keys = sorted(set(g.terms) | set(h.terms))
            out.append([(a, b, g.terms.get((a, b), Fraction(0)), h.terms.get((a, b), Fraction(0)))
                        for a, b in keys])
        return out

    @property
    def analytic(self):
        """True iff every component satisfies d/dzbar = 0 (Cauchy-Riemann, exactly)."""
        return all(g.diff(0) == h.diff(1) and g.diff(1) == -h.diff(0)
                   for g, h in zip(self.real, self.imag))

    def evaluate_xy(self, x, y):
        """f(x + iy) as a complex array of shape ``broadcast(x, y).shape + (n,)``."""
        cols = [g(x, y) + 1j * h(x, y) for g, h in zip(self.real, self.imag)]
        return np.stack(cols, axis=-1)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.evaluate_xy(z.real, z.imag)

    def __eq__(self, other):
        if not isinstance(other, AnalyticMap):
            return NotImplemented
        return self.real == other.real and self.imag == other.imag

    __hash__ = None


def mahler_curve(n):
    """z -> (z, z^2, ..., z^n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return AnalyticMap.from_z_polynomials([{k: 1} for k in range(1, n + 1)], name=f"mahler-{n}")


def line_iz():
    """z -> (z, iz)."""
    return AnalyticMap.from_z_polynomials([{1: 1}, {1: 1j}], name="line-iz")


def nonextremal_example():
    """z -> (z, z^2 zbar) = (z, z (x^2 + y^2)); not analytic."""
    r2 = X * X + Y * Y
    return AnalyticMap((X, X * r2), (Y, Y * r2), name="nonextremal")


def zero_map(n):
    return AnalyticMap((ZERO,) * n, (ZERO,) * n, name=f"zero-{n}")


def check_li_real(f):
    """Are 1, f_1, ..., f_n linearly independent over R? (exact)"""
    funcs = [(ONE, ZERO)] + list(zip(f.real, f.imag))
    rows = _stacked_rows(funcs)
    return rational_rank(rows) == f.n + 1


def check_li_complex(f):
    """Are 1, f_1, ..., f_n linearly independent over C? (exact)

    A complex relation sum (a_i + i b_i) f_i = 0 is a real relation among the
    2(n+1) functions f_i and i f_i, so the complex rank is half the real rank
    of that doubled system.
    """
    funcs = [(ONE, ZERO)] + list(zip(f.real, f.imag))
    doubled = funcs + [(-h, g) for g, h in funcs]
    return rational_rank(_stacked_rows(doubled)) // 2 == f.n + 1


def _stacked_rows(funcs):
    re_rows, _ = coefficient_rows([g for g, _ in funcs] + [ONE])
    im_rows, _ = coefficient_rows([h for _, h in funcs] + [ONE])
    # the appended ONE only keeps the monomial list nonempty; drop its row
    return [r1 + r2 for r1, r2 in zip(re_rows[:-1], im_rows[:-1])]


BUILTIN_MAPS = {
    **{f"mahler-{k}": (lambda k=k: mahler_curve(k)) for k in range(1, 7)},
    "line-iz": line_iz,
    "nonextremal": nonextremal_example,
    **{f"zero-{k}": (lambda k=k: zero_map(k)) for k in range(1, 7)},
}


def builtin_map(name):
    try:
        return BUILTIN_MAPS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin map {name!r}; known: {', '.join(BUILTIN_MAPS)}") from None


def map_to_dict(f):
    return {
        "name": f.name,
        "n": f.n,
        "components": [[[a, b, str(re), str(im)] for a, b, re, im in comp] for comp in f.monomials()],
    }


def map_from_dict(data):
    n = int(data["n"])
    comps = data["components"]
    if len(comps) != n:
        raise ValueError(f"map declares n = {n} but lists {len(comps)} components")
    parsed = []
    for comp in comps:
        terms = {}
        for entry in comp:
            a, b, re, im = entry
            if (int(a), int(b)) in terms:
                raise ValueError(f"duplicate monomial x^{a} y^{b}")
            terms[(int(a), int(b))] = (Fraction(str(re)), Fraction(str(im)))
        parsed.append(terms)
    return AnalyticMap.from_monomials(parsed, name=data.get("name", ""))


def write_map(f, path):
    with open(path, "w") as fh:
        json.dump(map_to_dict(f), fh, indent=1)
        fh.write("\n")


def read_map(path):
    with open(path) as fh:
        return map_from_dict(json.load(fh))


def resolve_map(ref):
    """A builtin name or a path to a map file."""
    if ref in BUILTIN_MAPS:
        return builtin_map(ref)
    return read_map(ref)
