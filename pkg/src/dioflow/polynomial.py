"""Sparse multivariate polynomials with exact rational coefficients."""

from fractions import Fraction

import numpy as np


def _frac(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        return Fraction(c)  # exact dyadic value
    return Fraction(c)


class Poly:
    """Polynomial in ``nvars`` variables, stored as ``{exponent tuple: Fraction}``.

    Instances are immutable and hashable. Zero coefficients are never stored.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars, terms=None):
        self.nvars = nvars
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or min(exps, default=0) < 0:
                raise ValueError(f"bad exponent {exps} for {nvars} variables")
            c = _frac(c)
            if c:
                clean[exps] = clean.get(exps, 0) + c
                if not clean[exps]:
                    del clean[exps]
        self.terms = clean
        self._hash = None

    @classmethod
    def const(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i):
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, {tuple(exps): 1})

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly(self.nvars, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Poly.const(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, float)):
            return self == Poly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(f"v{i}^{a}" if a > 1 else f"v{i}" for i, a in enumerate(e) if a)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def diff(self, i):
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Poly(self.nvars, out)

    def __call__(self, *values):
        """Evaluate in floating point; arguments broadcast like numpy arrays."""
        if len(values) != self.nvars:
            raise ValueError(f"expected {self.nvars} arguments")
        values = [np.asarray(v, dtype=float) for v in values]
        shape = np.broadcast_shapes(*(v.shape for v in values)) if values else ()
        out = np.zeros(shape)
        for e, c in self.terms.items():
            term = np.full(shape, float(c))
            for v, a in zip(values, e):
                if a:
                    term = term * v**a
            out = out + term
        return out

    def exact(self, *values):
        """Evaluate exactly at rational arguments."""
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for v, a in zip(values, e):
                term *= _frac(v) ** a
            total += term
        return total


def rational_rank(rows):
    """Rank over Q of a list of equal-length rows of rationals."""
    mat = [[_frac(v) for v in row] for row in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        pv = mat[rank][col]
        for r in range(len(mat)):
            if r != rank and mat[r][col]:
                f = mat[r][col] / pv
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


def coefficient_rows(polys):
    """Coefficient matrix of ``polys`` over the union of their monomials."""
    monos = sorted({e for p in polys for e in p.terms})
    return [[p.terms.get(e, Fraction(0)) for e in monos] for p in polys], monos
