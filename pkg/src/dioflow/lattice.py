"""Discrete subgroups of R^m: shortest vectors, covolumes, subgroup enumeration."""

from dataclasses import dataclass
from fractions import Fraction
import math
import numbers

import numpy as np

from . import _kernels
from .exterior import (
    RankDeficientError,
    basis_subsets,
    exact_det,
    represent_subgroup,
)
from .polynomial import rational_rank

NORMS = ("sup", "euclidean")


class EnumerationLimitError(RuntimeError):
    """Subgroup enumeration would exceed the configured size guard."""


def _is_exact(v):
    return isinstance(v, (numbers.Integral, Fraction))


def _check_norm(norm):
    if norm not in NORMS:
        raise ValueError(f"norm must be one of {NORMS}, got {norm!r}")
    return norm == "sup"


@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Ordered independent generators (rows) of a discrete subgroup of R^m.

    Entries are either all exact (ints / Fractions) or floats.
    """

    generators: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.generators)
        if not rows:
            raise ValueError("a lattice basis needs at least one generator")
        m = len(rows[0])
        if any(len(r) != m for r in rows):
            raise ValueError("generators have different lengths")
        exact = all(_is_exact(v) for r in rows for v in r)
        if exact:
            rows = tuple(tuple(int(v) if Fraction(v).denominator == 1 else Fraction(v) for v in r) for r in rows)
            independent = rational_rank(rows) == len(rows)
        else:
            rows = tuple(tuple(float(v) for v in r) for r in rows)
            arr = np.asarray(rows)
            independent = len(rows) <= m and np.linalg.matrix_rank(arr) == len(rows)
        if not independent:
            raise RankDeficientError("generators are linearly dependent")
        object.__setattr__(self, "generators", rows)

    @property
    def ambient_dim(self):
        return len(self.generators[0])

    @property
    def rank(self):
        return len(self.generators)

    @property
    def exact(self):
        return all(_is_exact(v) for r in self.generators for v in r)

    def as_array(self):
        return np.array([[float(v) for v in r] for r in self.generators])

    def scaled(self, c):
        return LatticeBasis(tuple(tuple(v * c for v in r) for r in self.generators))

    def transformed(self, mat):
        """Image under the linear map ``mat`` (float result)."""
        return LatticeBasis(tuple(map(tuple, self.as_array() @ np.asarray(mat, dtype=float).T)))

    def representing(self):
        return represent_subgroup(self.generators)


# ---------------------------------------------------------------------------
# exact / arbitrary-precision reduction and enumeration


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _gram_schmidt(b):
    k = len(b)
    mu = [[0] * k for _ in range(k)]
    bstar, bn = [], []
    for i in range(k):
        v = list(b[i])
        for j in range(i):
            mu[i][j] = _dot(b[i], bstar[j]) / bn[j]
            v = [a - mu[i][j] * c for a, c in zip(v, bstar[j])]
        bstar.append(v)
        bn.append(_dot(v, v))
        mu[i][i] = 1
    return mu, bn


def _nint(v):
    if isinstance(v, (int, Fraction)):
        return math.floor(v + Fraction(1, 2))
    return int(math.floor(v + 0.5))


def lll_generic(rows, delta=Fraction(99, 100), nint=_nint):
    """Textbook LLL over any ordered field (Fractions for exact input, mpmath for high precision)."""
    b = [list(r) for r in rows]
    k = len(b)
    if k < 2:
        return b
    mu, bn = _gram_schmidt(b)
    i = 1
    while i < k:
        for j in range(i - 1, -1, -1):
            r = nint(mu[i][j])
            if r:
                b[i] = [a - r * c for a, c in zip(b[i], b[j])]
                for l in range(j):
                    mu[i][l] -= r * mu[j][l]
                mu[i][j] -= r
        if bn[i] >= (delta - mu[i][i - 1] ** 2) * bn[i - 1]:
            i += 1
        else:
            b[i], b[i - 1] = b[i - 1], b[i]
            mu, bn = _gram_schmidt(b)
            i = max(i - 1, 1)
    return b


def shortest_generic(rows, sup):
    """Exact shortest vector of a reduced basis; returns ``(value, vector)``.

    ``value`` is the sup norm, or the *squared* Euclidean norm, in the
    arithmetic of the input entries. Pruning is exact: float approximations
    only pick the integer ranges, which are padded by one on each side.
    """
    b = [list(r) for r in rows]
    k, m = len(b), len(b[0])
    mu, bn = _gram_schmidt(b)

    def value(v):
        return max(abs(c) for c in v) if sup else _dot(v, v)

    best = [None, None]
    for r in b:
        val = value(r)
        if best[0] is None or val < best[0]:
            best[:] = [val, r]

    def radius2():
        return m * best[0] ** 2 if sup else best[0]

    xs = [0] * k

    def visit(lvl, partial):
        ctr = -sum(xs[j] * mu[j][lvl] for j in range(lvl + 1, k))
        rem = radius2() - partial
        if rem < 0:
            return
        span = math.sqrt(max(float(rem / bn[lvl]), 0.0))
        cf = float(ctr)
        lo = 0 if lvl == k - 1 else math.floor(cf - span) - 1
        hi = math.ceil(cf + span) + 1
        for x in range(lo, hi + 1):
            d = x - ctr
            p = partial + d * d * bn[lvl]
            if p > radius2():
                continue
            xs[lvl] = x
            if lvl == 0:
                if any(xs):
                    v = [sum(xs[j] * b[j][c] for j in range(k)) for c in range(m)]
                    val = value(v)
                    if val < best[0]:
                        best[:] = [val, v]
            else:
                visit(lvl - 1, p)
        xs[lvl] = 0

    visit(k - 1, 0)
    return best[0], best[1]


# ---------------------------------------------------------------------------
# public operations


def shortest_vector(lattice, norm="sup"):
    """``(delta, vector)``: a shortest nonzero lattice vector and its norm."""
    sup = _check_norm(norm)
    if lattice.exact:
        reduced = lll_generic(lattice.generators)
        val, vec = shortest_generic(reduced, sup)
        vec = [int(v) if Fraction(v).denominator == 1 else v for v in vec]
        return (float(val) if sup else math.sqrt(val)), vec
    rows = lattice.as_array()
    _kernels.lll_reduce(rows, _kernels.LLL_DELTA)
    vec = np.zeros(rows.shape[1])
    val = _kernels.shortest_vector(rows, sup, vec)
    return float(val), vec.tolist()


def delta(lattice, norm="sup"):
    """Norm of the shortest nonzero vector of ``lattice``."""
    return shortest_vector(lattice, norm)[0]


def gram_determinant(lattice):
    """det(B B^T); exact (Fraction/int) for exact bases."""
    rows = lattice.generators
    if lattice.exact:
        gram = [[_dot(a, b) for b in rows] for a in rows]
        det = exact_det(gram)
        return int(det) if det.denominator == 1 else det
    arr = lattice.as_array()
    return float(np.linalg.det(arr @ arr.T))


def covolume(lattice):
    """Volume of span(L)/L, i.e. sqrt of the Gram determinant."""
    if lattice.exact:
        return math.sqrt(gram_determinant(lattice))
    r = np.linalg.qr(lattice.as_array().T, mode="r")
    return float(abs(np.prod(np.diag(r))))


# ---------------------------------------------------------------------------
# subgroup enumeration


def integer_kernel(rows, ncols):
    """Basis (list of integer rows) of {x in Z^ncols : A x = 0}."""
    mat = [list(map(int, r)) for r in rows]
    # columns of U track the unimodular column operations applied to mat
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def colop(dst, src, q):
        for row in mat:
            row[dst] -= q * row[src]
        for row in u:
            row[dst] -= q * row[src]

    def colswap(a, b):
        for row in mat:
            row[a], row[b] = row[b], row[a]
        for row in u:
            row[a], row[b] = row[b], row[a]

    pc = 0
    for row in mat:
        if pc >= ncols:
            break
        while True:
            nz = [c for c in range(pc, ncols) if row[c]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda c: abs(row[c]))
            for c in nz:
                if c != piv:
                    colop(c, piv, row[c] // row[piv])
        nz = [c for c in range(pc, ncols) if row[c]]
        if nz:
            colswap(pc, nz[0])
            pc += 1
    return [[u[i][c] for i in range(ncols)] for c in range(pc, ncols)]


def saturate(rows, ncols):
    """Integer basis of (Q-span of rows) intersected with Z^ncols."""
    ker = integer_kernel(rows, ncols)
    if not ker:
        basis = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    else:
        basis = integer_kernel(ker, ncols)
    return [[int(v) for v in r] for r in lll_generic(basis)]


def _primitive_canonical(vecs):
    """Divide integer rows by their gcd and flip so the first nonzero entry is positive."""
    g = np.gcd.reduce(np.abs(vecs), axis=1)
    keep = g > 0
    vecs, g = vecs[keep], g[keep]
    vecs = vecs // g[:, None]
    lead = vecs[np.arange(len(vecs)), np.argmax(vecs != 0, axis=1)]
    return vecs * np.sign(lead)[:, None], keep


def _box_vectors(rank, height):
    axis = np.arange(-height, height + 1, dtype=np.int64)
    box = np.stack(np.meshgrid(*([axis] * rank), indexing="ij"), -1).reshape(-1, rank)
    box = box[np.any(box != 0, axis=1)]
    prim, _ = _primitive_canonical(box)
    return np.unique(prim, axis=0)


def _extension_matrix(basis_rows, rank):
    """Matrix A with plucker([S; v]) = A @ v for a fixed (j-1) x r integer matrix S."""
    j = len(basis_rows) + 1
    keys = basis_subsets(rank, j)
    mat = np.zeros((len(keys), rank), dtype=np.int64)
    for a, key in enumerate(keys):
        for pos, c in enumerate(key):
            rest = [cc for cc in key if cc != c]
            minor = exact_det([[r[cc] for cc in rest] for r in basis_rows]) if rest else 1
            # expansion along the last row (the new vector)
            sign = -1 if (j - 1 + pos) % 2 else 1
            mat[a, c] = sign * int(minor)
    return mat


def enumerate_subgroups(lattice, max_rank, height, max_count=2_000_000):
    """Primitive subgroups of ``lattice`` of rank <= ``max_rank`` spanned by
    lattice vectors whose coefficient vectors have sup norm <= ``height``.

    Each subgroup is returned once (deduplicated by its canonical primitive
    Plucker vector), sorted by rank and then by that key. Raises
    :class:`EnumerationLimitError` if more than ``max_count`` candidate
    extensions would have to be examined.
    """
    r = lattice.rank
    if height < 1:
        raise ValueError("height must be >= 1")
    if not 1 <= max_rank <= r:
        raise ValueError(f"max_rank must lie in 1..{r}")
    box = _box_vectors(r, height)
    levels = []
    if max_rank >= 1 and r > 1:
        levels.append([(tuple(v.tolist()), [v.tolist()]) for v in box])
    for j in range(2, min(max_rank, r - 1) + 1):
        prev = levels[-1]
        if len(prev) * len(box) > max_count:
            raise EnumerationLimitError(
                f"rank-{j} enumeration needs {len(prev) * len(box)} candidates "
                f"(limit {max_count}); lower the height or max_rank"
            )
        found = {}
        for _, basis in prev:
            amat = _extension_matrix(basis, r)
            pl = box @ amat.T
            prim, keep = _primitive_canonical(pl)
            idx = np.flatnonzero(keep)
            for key_arr, vi in zip(prim, idx):
                key = tuple(key_arr.tolist())
                if key not in found:
                    found[key] = (basis, box[vi].tolist())
        level = []
        for key in sorted(found):
            basis, v = found[key]
            level.append((key, saturate(basis + [v], r)))
        levels.append(level)

    gens = lattice.generators
    out = []
    for level in levels:
        for _, coeffs in sorted(level):
            rows = tuple(
                tuple(sum(c * g[col] for c, g in zip(row, gens)) for col in range(lattice.ambient_dim))
                for row in coeffs
            )
            out.append(LatticeBasis(rows))
    if max_rank >= r:
        out.append(lattice)
    return out
