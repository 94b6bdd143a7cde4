"""Covolumes of g_t u_f(z) Gamma as functions of z, the goodness and
sup-bound conditions on them, and Monte-Carlo measures of the sets where the
orbit lattice g_t u_f(z) Lambda has a short vector.

Every coordinate of wedge^k(u_f) w is linear in the feature vector
ftilde_1(z) = (1, g, h, g_i h_j - g_j h_i), because u_f = I + N with N of
rank two and N^2 = 0. Hence wedge^k(u_f) = I + D + D^2/2 with D the
derivation induced by N, and for a whole family of subgroups the covolume
reduces to one matrix product per batch of sample points.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import null_space

from .exterior import RankDeficientError, basis_subsets, represent_subgroup, subset_index, wedge_vectors
from .flow import FlowTime, contraction_exponent, integer_times, lambda_subgroup, orbit_delta_samples
from .goodness import (
    DEFAULT_EPS_GRID,
    Ball,
    fit_constants,
    orthogonal_pair_family,
    rho1_estimate,
    rho2_estimate,
)
from .lattice import LatticeBasis, enumerate_subgroups
from .polynomial import Poly, coefficient_rows, rational_rank

# values per chunk of the (samples x coords x subgroups) work array
_CHUNK_ELEMS = 4_000_000


def f_tilde(f):
    """(g_1..g_n, h_1..h_n, g_i h_j - g_j h_i for i < j) as polynomials in (x, y)."""
    g, h = f.real, f.imag
    n = f.n
    minors = [g[i] * h[j] - g[j] * h[i] for i in range(n) for j in range(i + 1, n)]
    return tuple(g) + tuple(h) + tuple(minors)


def feature_values(f, z):
    """``(N, D)`` array: 1 followed by the components of ftilde at each z."""
    z = np.asarray(z, dtype=complex)
    fz = f(z)
    g, h = fz.real, fz.imag
    n = f.n
    cols = [np.ones(len(z))] + [g[:, i] for i in range(n)] + [h[:, i] for i in range(n)]
    cols += [g[:, i] * h[:, j] - g[:, j] * h[:, i] for i in range(n) for j in range(i + 1, n)]
    return np.column_stack(cols)


def log_eigenvalues(t):
    """log of the diagonal of g_t in the order (e_0, e_*, e_1, ..., e_n).

    With t_0 = -(n-1)t/(2n), the eigenvalue on e_j is e^{-t_j} throughout,
    e_0 and e_* both carrying t_0.
    """
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    t0 = -contraction_exponent(t.n) * t.total
    return -np.array([t0, t0] + list(t.components))


def _subset_log_scale(t, k):
    lam = log_eigenvalues(t)
    keys = np.array(basis_subsets(len(lam), k), dtype=np.intp)
    return lam[keys].sum(axis=1)


def _derivation(m, k, src, dst):
    """Matrix on wedge^k R^m of the derivation induced by e_src -> e_dst."""
    keys = basis_subsets(m, k)
    index = subset_index(m, k)
    mat = np.zeros((len(keys), len(keys)))
    for col, s in enumerate(keys):
        if src not in s or dst in s:
            continue
        new = [dst if i == src else i for i in s]
        srt = tuple(sorted(new))
        # sign of the sort: dst moves past every index strictly between it and src
        lo, hi = min(src, dst), max(src, dst)
        sign = -1 if sum(1 for i in s if lo < i < hi) % 2 else 1
        mat[index[srt], col] = sign
    return mat


@lru_cache(maxsize=None)
def feature_operators(n, k):
    """``(D, C, C)`` operators O_d with wedge^k(u_f) = sum_d ftilde_1[d] O_d.

    Order matches :func:`feature_values`: identity, then e_i -> e_0, then
    e_i -> e_*, then the composite of both for i < j.
    """
    m = n + 2
    size = len(basis_subsets(m, k))
    to0 = [_derivation(m, k, 2 + i, 0) for i in range(n)]
    tostar = [_derivation(m, k, 2 + i, 1) for i in range(n)]
    ops = [np.eye(size)] + to0 + tostar
    ops += [to0[i] @ tostar[j] for i in range(n) for j in range(i + 1, n)]
    return np.stack(ops)


def _plucker_float(basis):
    w = represent_subgroup(basis.generators)
    return w.to_dense(dtype=float)


class CovolumeFamily:
    """z -> ||g_t u_f(z) Gamma|| for every Gamma in a fixed list, batched."""

    def __init__(self, f, subgroups):
        self.f = f
        self.n = f.n
        self.subgroups = list(subgroups)
        m = self.n + 2
        by_rank = {}
        for idx, sub in enumerate(self.subgroups):
            if sub.ambient_dim != m:
                raise ValueError(f"subgroup lives in R^{sub.ambient_dim}, expected R^{m}")
            by_rank.setdefault(sub.rank, []).append(idx)
        self.groups = []
        for k in sorted(by_rank):
            idx = np.array(by_rank[k])
            w = np.column_stack([_plucker_float(self.subgroups[i]) for i in idx])
            ops = feature_operators(self.n, k)
            # (D, C, G): operator d applied to every representing vector
            tw = np.einsum("dce,eg->dcg", ops, w)
            self.groups.append((k, idx, tw))

    def __len__(self):
        return len(self.subgroups)

    def iter_values(self, z, t, features=None):
        """Yield ``(indices, values)`` with values of shape (N, len(indices))."""
        feats = feature_values(self.f, z) if features is None else features
        npts = feats.shape[0]
        for k, idx, tw in self.groups:
            d, c, g = tw.shape
            scale = np.exp(_subset_log_scale(t, k))
            step = max(1, _CHUNK_ELEMS // max(1, npts * c))
            for s in range(0, g, step):
                block = tw[:, :, s:s + step]
                gc = block.shape[2]
                coords = (feats @ block.reshape(d, c * gc)).reshape(npts, c, gc)
                coords *= scale[None, :, None]
                yield idx[s:s + step], np.sqrt(np.einsum("ncg,ncg->ng", coords, coords))

    def values(self, z, t):
        z = np.asarray(z, dtype=complex)
        out = np.empty((len(z), len(self)))
        for idx, vals in self.iter_values(z, t):
            out[:, idx] = vals
        return out


def covolume_function(f, subgroup, t):
    """z -> ||g_t u_f(z) Gamma|| (vectorized over arrays of z)."""
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    if t.n != f.n:
        raise ValueError(f"flow time has {t.n} components but the map has n = {f.n}")
    family = CovolumeFamily(f, [subgroup])

    def cov(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return family.values(z, t)[:, 0]

    return cov


def symbolic_coordinates(f, subgroup):
    """wedge^k(u_f) w as a multivector with polynomial coordinates in (x, y)."""
    n = f.n
    one = Poly.const(2, 1)
    images = []
    for v in subgroup.generators:
        v = [int(c) for c in v]
        q = v[2:]
        row = [one * v[0], one * v[1]] + [one * c for c in q]
        row[0] = row[0] + sum((f.real[i] * q[i] for i in range(n)), Poly(2))
        row[1] = row[1] + sum((f.imag[i] * q[i] for i in range(n)), Poly(2))
        images.append(row)
    return wedge_vectors(images)


def linear_combination_check(f, subgroup):
    """Is every coordinate of wedge^k(u_f) w in the R-span of 1 and ftilde? (exact)"""
    basis = [Poly.const(2, 1)] + list(f_tilde(f))
    base_rank = rational_rank(coefficient_rows(basis)[0])
    w = symbolic_coordinates(f, subgroup)
    for coord in w.coords.values():
        rows, _ = coefficient_rows(basis + [coord])
        if rational_rank(rows) != base_rank:
            return False
    return True


def default_family(n, max_rank=None, height=1):
    """Primitive subgroups of Lambda up to the given coefficient height, Lambda itself included."""
    lam = lambda_subgroup(n)
    return enumerate_subgroups(lam, max_rank if max_rank is not None else n + 1, height)


# ---------------------------------------------------------------------------
# goodness of the covolume functions


def _batch_ratios(vals, eps):
    """(sup, ratios) column-wise; ratios has shape (len(eps), columns)."""
    sup = vals.max(axis=0)
    srt = np.sort(vals, axis=0)
    thr = eps[:, None] * sup[None, :]
    counts = np.empty(thr.shape)
    for j in range(srt.shape[1]):
        counts[:, j] = np.searchsorted(srt[:, j], thr[:, j], side="left")
    return sup, counts / vals.shape[0]


@dataclass(frozen=True)
class GoodnessSweep:
    """Worst case over a subgroup family and a set of times of the fitted (C, alpha).

    ``alpha`` is the smallest fitted exponent; ``C`` is then the least
    constant with ratio <= C eps^alpha on every measured point of every
    non-degenerate member.
    """

    C: float
    alpha: float
    eps_grid: tuple
    family_size: int
    times: tuple
    samples: int
    degenerate_constant: int
    worst_member: tuple
    symbolic_checked: int
    symbolic_ok: bool
    member_alphas: np.ndarray = field(repr=False, default=None)


def check_213(f, ball_tilde, subgroups, t_set, samples=2048, eps_grid=DEFAULT_EPS_GRID, seed=0,
              symbolic_limit=20):
    """Fit (C, alpha) to every z -> ||g_t u_f(z) Gamma|| on ``ball_tilde`` and take the worst case.

    Also checks exactly, on the first ``symbolic_limit`` subgroups of each
    rank, that the covolume coordinates are combinations of 1 and ftilde.
    Raises :class:`RankDeficientError` if some covolume vanishes on every sample.
    """
    eps = np.sort(np.asarray(eps_grid, dtype=float))
    family = CovolumeFamily(f, subgroups)
    z = Ball.as_complex(ball_tilde.sample(samples, seed))
    feats = feature_values(f, z)
    all_ratios, alphas, labels = [], [], []
    constant = 0
    times = [t if isinstance(t, FlowTime) else FlowTime(tuple(t)) for t in t_set]
    for t in times:
        for idx, vals in family.iter_values(z, t, feats):
            sup, ratios = _batch_ratios(vals, eps)
            if np.any(sup == 0):
                bad = int(idx[np.flatnonzero(sup == 0)[0]])
                raise RankDeficientError(f"covolume of subgroup {bad} vanishes identically")
            for j in range(ratios.shape[1]):
                r = ratios[:, j]
                if not np.any(r > 0):
                    constant += 1
                    continue
                _, a, _ = fit_constants(eps, r)
                all_ratios.append(r)
                alphas.append(a)
                labels.append((int(idx[j]), t.components))
    checked, ok = _symbolic_sample(f, family.subgroups, symbolic_limit)
    if not alphas:
        return GoodnessSweep(math.nan, math.nan, tuple(eps), len(family), tuple(t.components for t in times),
                             samples, constant, (), checked, ok, np.array([]))
    alphas = np.array(alphas)
    ratios = np.array(all_ratios)
    alpha = float(alphas.min())
    per_member = (ratios / eps[None, :] ** alpha).max(axis=1)
    worst = int(np.argmax(per_member))
    return GoodnessSweep(float(per_member[worst]), alpha, tuple(eps.tolist()), len(family),
                         tuple(t.components for t in times), samples, constant, labels[worst],
                         checked, ok, alphas)


def _symbolic_sample(f, subgroups, limit):
    seen = {}
    checked, ok = 0, True
    for sub in subgroups:
        if seen.get(sub.rank, 0) >= limit:
            continue
        seen[sub.rank] = seen.get(sub.rank, 0) + 1
        checked += 1
        ok = ok and linear_combination_check(f, sub)
    return checked, ok


# ---------------------------------------------------------------------------
# lower bounds on sups


@dataclass(frozen=True)
class AdaptedFrame:
    """Orthonormal v_0, ..., v_{k-1} with w = (a e_0 + b v_0) ^ v_1 ^ ... ^ v_{k-1}.

    v_1..v_{k-1} lie in R Gamma and are orthogonal to e_0; for k >= 2 all but
    v_{k-1} are also orthogonal to ``top``, the coordinate vector e_i with the
    largest t_i.
    """

    v: np.ndarray
    a: float
    b: float
    top: int


def _orthonormal_rows(mat, tol=1e-10):
    if mat.size == 0:
        return np.zeros((0, mat.shape[1] if mat.ndim == 2 else 0))
    u, s, vt = np.linalg.svd(mat, full_matrices=False)
    return vt[: int(np.sum(s > tol * max(1.0, s.max())))]


def _intersect_with_perp(rows, axis, m):
    """Orthonormal basis of span(rows) intersected with e_axis^perp."""
    if len(rows) == 0:
        return rows
    coeff = null_space(rows[:, [axis]].T)
    return _orthonormal_rows(coeff.T @ rows) if coeff.size else np.zeros((0, m))


def adapted_frame(subgroup, t):
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    gens = np.array(subgroup.generators, dtype=float)
    k, m = gens.shape
    n = m - 2
    order = np.argsort(np.array(t.components), kind="stable")
    top = 2 + int(order[-1])
    span = _orthonormal_rows(gens)
    perp0 = _intersect_with_perp(span, 0, m)
    if k >= 2:
        inner = _intersect_with_perp(perp0, top, m)[: k - 2]
        rest = perp0 - (perp0 @ inner.T) @ inner if len(inner) else perp0
        last = _orthonormal_rows(rest)[:1]
        tail = np.vstack([inner, last])
    else:
        tail = np.zeros((0, m))
    if len(tail) != k - 1:
        raise RankDeficientError("could not build the orthonormal frame")
    e0 = np.eye(m)[0]
    contains_e0 = np.linalg.matrix_rank(np.vstack([span, e0]), tol=1e-9) == k
    if contains_e0:
        # b = 0, so v_0 only needs to be orthogonal to e_* and R Gamma; when
        # those already span everything its value never enters
        free = null_space(np.vstack([span, np.eye(m)[1]]))
        v0 = free[:, 0] if free.size else np.zeros(m)
    else:
        ext = np.vstack([e0, span])
        full = _orthonormal_rows(ext)
        known = np.vstack([e0, tail])
        resid = full - (full @ known.T) @ known
        v0 = _orthonormal_rows(resid)[0]
    frame = np.vstack([v0, tail])
    w = represent_subgroup(subgroup.generators).to_dense(dtype=float)
    a = float(w @ wedge_vectors([e0] + list(tail)).to_dense(dtype=float)) if k > 1 else float(w @ e0)
    b = float(w @ wedge_vectors(list(frame)).to_dense(dtype=float))
    if contains_e0:
        b = 0.0
    return AdaptedFrame(frame, a, b, top)


def frame_lower_bound(f, subgroup, t):
    """z -> a pointwise lower bound for ||g_t u_f(z) Gamma||.

    Rank 1: e^{at}|a + b v_0.g|. Rank k >= 2: sqrt(a^2 + b^2) |Im(conj(phi_1) phi_2)|
    times the eigenvalue factor e^{2at + t_max - (sum of the k-1 largest t_i)},
    with phi_1 = v_{k-1}.f and phi_2 = (a + b v_0.f) / sqrt(a^2 + b^2).
    """
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    fr = adapted_frame(subgroup, t)
    k = subgroup.rank
    n = f.n
    at = contraction_exponent(n) * t.total
    v0 = fr.v[0, 2:]

    if k == 1:
        def lb(z):
            g = f(np.atleast_1d(np.asarray(z, dtype=complex))).real
            return math.exp(at) * np.abs(fr.a + fr.b * (g @ v0))
        return lb

    ts = np.sort(np.array(t.components))
    factor = math.exp(2 * at + ts[-1] - ts[len(ts) - (k - 1):].sum())
    u1 = fr.v[-1, 2:]
    norm_ab = math.hypot(fr.a, fr.b)

    def lb(z):
        fz = f(np.atleast_1d(np.asarray(z, dtype=complex)))
        phi1 = fz @ u1
        phi2 = fr.a + fr.b * (fz @ v0)
        return factor * np.abs(np.imag(np.conj(phi1) * phi2))

    return lb if norm_ab > 0 else (lambda z: np.zeros(len(np.atleast_1d(z))))


@dataclass(frozen=True)
class SupBoundReport:
    """Smallest sampled sup over B of ||g_t u_f Gamma|| across family and times,
    with the independent lower bounds rho_1 (rank 1) and rho_2 (rank >= 2)."""

    rho: float
    argmin: tuple
    rho_by_rank: dict
    rho1: float
    rho2: float
    family_size: int
    times: tuple
    samples: int

    @property
    def rho_reference(self):
        return min(self.rho1, self.rho2)

    def consistent(self, rtol=0.1):
        """rho >= min(rho_1, rho_2) up to ``rtol`` (both sides are sampled estimates)."""
        return self.rho >= (1 - rtol) * self.rho_reference


def check_214(f, ball, subgroups, t_set, samples=2048, seed=0, family_step=0.05):
    """min over family x t_set of sup_B ||g_t u_f(z) Gamma||, alongside rho_1 and rho_2.

    A near-zero value for a map without independence is reported, not raised.
    """
    family = CovolumeFamily(f, subgroups)
    pts = ball.sample_with_boundary(samples, seed)
    z = Ball.as_complex(pts)
    feats = feature_values(f, z)
    best, arg = math.inf, ()
    by_rank = {}
    times = [t if isinstance(t, FlowTime) else FlowTime(tuple(t)) for t in t_set]
    ranks = np.array([s.rank for s in family.subgroups])
    for t in times:
        for idx, vals in family.iter_values(z, t, feats):
            sups = vals.max(axis=0)
            j = int(np.argmin(sups))
            if sups[j] < best:
                best, arg = float(sups[j]), (int(idx[j]), t.components)
            for k in np.unique(ranks[idx]):
                sel = ranks[idx] == k
                by_rank[int(k)] = min(by_rank.get(int(k), math.inf), float(sups[sel].min()))
    gfuncs = [(lambda x, y, i=i: f.real[i](x, y)) for i in range(f.n)]
    rho1 = rho1_estimate(ball, gfuncs, samples=samples, seed=seed)
    rho2 = rho2_estimate(ball, orthogonal_pair_family(f.n, family_step), samples=samples, seed=seed, f=f) \
        if f.n >= 2 else math.inf
    return SupBoundReport(best, arg, by_rank, rho1, rho2, len(family), tuple(t.components for t in times),
                          samples)


# ---------------------------------------------------------------------------
# measures of short-vector sets


@dataclass(frozen=True)
class NondivReport:
    """Measured |{z in B: delta(g_t u_f(z) Lambda) < eps}| against c C (eps/rho)^alpha |B|."""

    t: FlowTime
    eps_grid: tuple
    measured_measures: tuple
    bound_values: tuple
    rho_used: float
    C_used: float
    alpha_used: float
    c_used: float
    samples: int
    slope: float
    subgroup_family_size: int = 0
    truncation_height: int = 0

    @property
    def within_bound(self):
        return all(m <= b for m, b in zip(self.measured_measures, self.bound_values))

    @property
    def slope_ok(self):
        """Fitted log-log slope >= alpha - 0.1 (vacuous with fewer than two nonzero measures)."""
        return math.isnan(self.slope) or self.slope >= self.alpha_used - 0.1


def _fit_slope(eps, measures):
    eps = np.asarray(eps)
    measures = np.asarray(measures)
    pos = measures > 0
    if pos.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(eps[pos]), np.log(measures[pos]), 1)
    return float(slope)


def orbit_deltas(f, z, t, norm="euclidean"):
    fz = f(np.asarray(z, dtype=complex))
    return orbit_delta_samples(fz.real, fz.imag, t, norm)


def theorem26_experiment(f, ball, t, C, alpha, rho, c=1.0, eps_grid=None, samples=100_000, seed=0,
                         family_size=0, truncation_height=0):
    """Monte-Carlo sublevel measures of delta (Euclidean) against the nondivergence bound.

    rho is capped at 1. Grid entries above the capped rho are rejected with
    ``ValueError``. The default grid spans two decades below rho.
    """
    t = t if isinstance(t, FlowTime) else FlowTime(tuple(t))
    if not (C > 0 and alpha > 0 and rho > 0 and c > 0):
        raise ValueError("C, alpha, rho and c must be positive")
    rho_used = min(float(rho), 1.0)
    eps = np.geomspace(rho_used * 1e-2, rho_used, 12) if eps_grid is None else np.sort(np.asarray(eps_grid, float))
    if np.any(eps <= 0) or np.any(eps > rho_used):
        raise ValueError(f"every eps must lie in (0, rho] = (0, {rho_used}]")
    z = Ball.as_complex(ball.sample(samples, seed))
    deltas = np.sort(orbit_deltas(f, z, t))
    frac = np.searchsorted(deltas, eps, side="left") / samples
    measures = frac * ball.area
    bound = c * C * (eps / rho_used) ** alpha * ball.area
    return NondivReport(t, tuple(eps.tolist()), tuple(measures.tolist()), tuple(bound.tolist()), rho_used,
                        float(C), float(alpha), float(c), samples, _fit_slope(eps, measures),
                        family_size, truncation_height)


@dataclass(frozen=True)
class BorelCantelliReport:
    """Terms |{z in B: delta(g_t u_f(z) Lambda) <= e^{-gamma t}}| grouped by shells of total t."""

    gamma: float
    times: tuple
    terms: tuple
    shell_sums: tuple
    partial_sums: tuple
    samples: int

    def shell_ratio(self, width=3):
        """(sum of the last ``width`` shells) / (sum of the first ``width`` shells)."""
        first = sum(self.shell_sums[:width])
        last = sum(self.shell_sums[-width:])
        return last / first if first else math.nan


def borel_cantelli_sum(f, ball, gamma, t_max, samples=20_000, seed=0, norm="euclidean"):
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    z = Ball.as_complex(ball.sample(samples, seed))
    fz = f(z)
    x, y = np.ascontiguousarray(fz.real), np.ascontiguousarray(fz.imag)
    times = integer_times(f.n, t_max)
    terms = []
    shells = [0.0] * (t_max + 1)
    for t in times:
        d = orbit_delta_samples(x, y, t, norm)
        term = float(np.count_nonzero(d <= math.exp(-gamma * t.total))) / samples * ball.area
        terms.append(term)
        shells[int(round(t.total))] += term
    return BorelCantelliReport(gamma, tuple(t.components for t in times), tuple(terms), tuple(shells),
                               tuple(np.cumsum(shells).tolist()), samples)
