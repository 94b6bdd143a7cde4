"""Exterior algebra of R^m: multivectors, wedge products, exterior powers.

Coordinates are kept sparsely, keyed by sorted index tuples. Scalars may be
floats, ints, Fractions or anything else closed under ``+`` and ``*`` (the
symbolic covolume check wedges vectors of :class:`~dioflow.polynomial.Poly`).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from functools import lru_cache
import math
import numbers

import numpy as np

MAX_DIM = 16


class DimensionError(ValueError):
    """Operands live in exterior algebras of different ambient spaces."""


class RankDeficientError(ValueError):
    """Vectors that were supposed to be independent are not."""


@lru_cache(maxsize=None)
def basis_subsets(m, k):
    """All k-subsets of ``range(m)`` in lexicographic order."""
    return tuple(combinations(range(m), k))


@lru_cache(maxsize=None)
def subset_index(m, k):
    return {s: i for i, s in enumerate(basis_subsets(m, k))}


def _merge_sign(a, b):
    inversions = sum(1 for i in a for j in b if i > j)
    return -1 if inversions % 2 else 1


@dataclass(frozen=True, eq=False)
class Multivector:
    """Homogeneous element of the exterior algebra of R^m.

    ``overflowed`` marks the zero produced by a wedge whose grade would exceed
    the ambient dimension.
    """

    ambient_dim: int
    grade: int
    coords: dict = field(default_factory=dict)
    overflowed: bool = False

    def __post_init__(self):
        m, k = self.ambient_dim, self.grade
        if not 1 <= m <= MAX_DIM:
            raise DimensionError(f"ambient dimension {m} outside 1..{MAX_DIM}")
        if not 0 <= k <= m:
            raise DimensionError(f"grade {k} outside 0..{m}")
        clean = {}
        for key, val in self.coords.items():
            key = tuple(int(i) for i in key)
            if len(key) != k or len(set(key)) != k or any(not 0 <= i < m for i in key):
                raise DimensionError(f"bad index subset {key} for grade {k} in R^{m}")
            srt = tuple(sorted(key))
            if srt != key:
                perm = [srt.index(i) for i in key]
                val = val * _perm_sign(perm)
            if val:
                clean[srt] = clean.get(srt, 0) + val
                if not clean[srt]:
                    del clean[srt]
        object.__setattr__(self, "coords", clean)

    @classmethod
    def zero(cls, m, k):
        return cls(m, k, {})

    @classmethod
    def scalar(cls, m, c):
        return cls(m, 0, {(): c})

    @classmethod
    def basis(cls, m, subset):
        return cls(m, len(subset), {tuple(subset): 1})

    @classmethod
    def from_vector(cls, v):
        v = list(v)
        return cls(len(v), 1, {(i,): c for i, c in enumerate(v) if c})

    @classmethod
    def from_dense(cls, m, k, values):
        return cls(m, k, {s: v for s, v in zip(basis_subsets(m, k), values) if v})

    def to_dense(self, dtype=float):
        keys = basis_subsets(self.ambient_dim, self.grade)
        return np.array([self.coords.get(s, 0) for s in keys], dtype=dtype)

    def norm(self):
        """Euclidean norm for the standard inner product on the exterior power."""
        return math.sqrt(sum(float(c) ** 2 for c in self.coords.values()))

    def norm_squared(self):
        return sum(c * c for c in self.coords.values())

    def __add__(self, other):
        _check_same(self, other)
        if self.grade != other.grade:
            raise DimensionError("cannot add multivectors of different grades")
        out = dict(self.coords)
        for s, c in other.coords.items():
            out[s] = out.get(s, 0) + c
        return Multivector(self.ambient_dim, self.grade, out)

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return Multivector(self.ambient_dim, self.grade, {s: v * c for s, v in self.coords.items()})

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return (self.ambient_dim, self.grade, self.coords) == (other.ambient_dim, other.grade, other.coords)

    __hash__ = None

    def is_zero(self):
        return not self.coords

    def leading_coefficient(self):
        for s in basis_subsets(self.ambient_dim, self.grade):
            if s in self.coords:
                return self.coords[s]
        return 0

    def canonical(self):
        """The same element with its sign fixed: first nonzero coordinate positive."""
        lead = self.leading_coefficient()
        return -self if lead < 0 else self

    def allclose(self, other, rtol=1e-9, atol=0.0):
        _check_same(self, other)
        if self.grade != other.grade:
            return False
        return np.allclose(self.to_dense(), other.to_dense(), rtol=rtol, atol=atol)


def _check_same(a, b):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def wedge(a, b):
    """Exterior product. A result of grade > m is the zero top-grade element,
    returned with ``overflowed=True``."""
    _check_same(a, b)
    m = a.ambient_dim
    k = a.grade + b.grade
    if k > m:
        return Multivector(m, m, {}, overflowed=True)
    out = {}
    for s1, c1 in a.coords.items():
        for s2, c2 in b.coords.items():
            if set(s1) & set(s2):
                continue
            key = tuple(sorted(s1 + s2))
            term = c1 * c2
            if _merge_sign(s1, s2) < 0:
                term = -term
            out[key] = out.get(key, 0) + term
    return Multivector(m, k, out)


def wedge_vectors(vectors):
    """v_1 ^ ... ^ v_k by repeated wedging (works for any scalar ring)."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("need at least one vector")
    out = Multivector.from_vector(vectors[0])
    for v in vectors[1:]:
        out = wedge(out, Multivector.from_vector(v))
    return out


def _is_exact(x):
    return isinstance(x, (numbers.Integral, Fraction))


def exact_det(mat):
    """Determinant of a small square matrix of ints/Fractions, exactly."""
    a = [[Fraction(v) for v in row] for row in mat]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def _normalize_exact(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v


def plucker(rows):
    """Plucker coordinates (all maximal minors) of a k x m matrix, as a Multivector."""
    k = len(rows)
    m = len(rows[0])
    if k > m:
        raise RankDeficientError(f"{k} vectors in R^{m} are dependent")
    exact = all(_is_exact(v) for row in rows for v in row)
    keys = basis_subsets(m, k)
    if exact:
        vals = [
            _normalize_exact(exact_det([[row[c] for c in s] for row in rows])) for s in keys
        ]
    else:
        arr = np.asarray(rows, dtype=float)
        cols = np.array(keys, dtype=np.intp)
        sub = arr[:, cols].transpose(1, 0, 2)
        vals = np.linalg.det(sub).tolist()
    return Multivector(m, k, dict(zip(keys, vals)))


def represent_subgroup(basis):
    """Representing multivector v_1 ^ ... ^ v_k of the subgroup spanned by ``basis``.

    Sign-canonical: the first nonzero coordinate is positive. Raises
    :class:`RankDeficientError` for dependent input.
    """
    rows = [list(v) for v in basis]
    if not rows:
        raise ValueError("empty basis")
    m = len(rows[0])
    if any(len(r) != m for r in rows):
        raise DimensionError("basis vectors of different lengths")
    w = plucker(rows)
    exact = all(_is_exact(v) for row in rows for v in row)
    if exact:
        if w.is_zero():
            raise RankDeficientError("basis vectors are linearly dependent")
    else:
        scale = math.prod(float(np.linalg.norm(np.asarray(r, dtype=float))) for r in rows)
        if scale == 0.0 or w.norm() <= 1e-12 * scale:
            raise RankDeficientError("basis vectors are (numerically) linearly dependent")
    return w.canonical()


def exterior_power_matrix(mat, k):
    """Matrix of the k-th exterior power of ``mat`` in the lexicographic subset basis."""
    mat = np.asarray(mat, dtype=float)
    m = mat.shape[0]
    if mat.shape != (m, m):
        raise DimensionError("matrix must be square")
    if k == 0:
        return np.ones((1, 1))
    keys = np.array(basis_subsets(m, k), dtype=np.intp)
    sub = mat[keys[:, None, :, None], keys[None, :, None, :]]
    return np.linalg.det(sub)


def apply_exterior(mat, w):
    """(wedge^k M) w for a square matrix M of size m = w.ambient_dim."""
    m = w.ambient_dim
    rows = [list(r) for r in mat]
    if len(rows) != m or any(len(r) != m for r in rows):
        raise DimensionError(f"matrix must be {m}x{m}")
    k = w.grade
    if k == 0:
        return Multivector(m, 0, dict(w.coords))
    out_keys = basis_subsets(m, k)
    support = list(w.coords)
    if not support:
        return Multivector.zero(m, k)
    exact = all(_is_exact(v) for r in rows for v in r) and all(
        _is_exact(c) for c in w.coords.values()
    )
    if exact:
        out = {}
        for key in out_keys:
            acc = 0
            for s in support:
                acc += exact_det([[rows[i][j] for j in s] for i in key]) * w.coords[s]
            out[key] = _normalize_exact(acc)
        return Multivector(m, k, out)
    arr = np.asarray(rows, dtype=float)
    ik = np.array(out_keys, dtype=np.intp)
    jk = np.array(support, dtype=np.intp)
    minors = np.linalg.det(arr[ik[:, None, :, None], jk[None, :, None, :]])
    coeffs = np.array([float(w.coords[s]) for s in support])
    vals = minors @ coeffs
    return Multivector(m, k, dict(zip(out_keys, vals.tolist())))
