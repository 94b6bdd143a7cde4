"""Hot numeric loops.

Everything here is written in the numba-compatible subset of numpy. With JIT
disabled (see :mod:`dioflow._accel`) the same functions run as plain Python.
The best-approximation scan additionally has a vectorized numpy twin,
:func:`shell_minima_numpy`, used as the fallback for that kernel.
"""

import math

import numpy as np

from ._accel import JIT_ENABLED, njit, prange

LLL_DELTA = 0.99
_MAX_LLL_SWAPS = 100_000


@njit
def _gram_schmidt(b, mu, bnorm):
    k, m = b.shape
    bstar = np.zeros((k, m))
    for i in range(k):
        for c in range(m):
            bstar[i, c] = b[i, c]
        for j in range(i):
            if bnorm[j] > 0.0:
                s = 0.0
                for c in range(m):
                    s += b[i, c] * bstar[j, c]
                mu[i, j] = s / bnorm[j]
            else:
                mu[i, j] = 0.0
            for c in range(m):
                bstar[i, c] -= mu[i, j] * bstar[j, c]
        s = 0.0
        for c in range(m):
            s += bstar[i, c] * bstar[i, c]
        bnorm[i] = s
        mu[i, i] = 1.0


@njit
def lll_reduce(b, delta=LLL_DELTA):
    """LLL-reduce the rows of ``b`` in place (floating point)."""
    k, m = b.shape
    mu = np.zeros((k, k))
    bnorm = np.zeros(k)
    _gram_schmidt(b, mu, bnorm)
    i = 1
    swaps = 0
    while i < k:
        for j in range(i - 1, -1, -1):
            r = np.rint(mu[i, j])
            if r != 0.0:
                for c in range(m):
                    b[i, c] -= r * b[j, c]
                for l in range(j):
                    mu[i, l] -= r * mu[j, l]
                mu[i, j] -= r
        if bnorm[i] >= (delta - mu[i, i - 1] * mu[i, i - 1]) * bnorm[i - 1]:
            i += 1
        else:
            for c in range(m):
                tmp = b[i, c]
                b[i, c] = b[i - 1, c]
                b[i - 1, c] = tmp
            _gram_schmidt(b, mu, bnorm)
            i = max(i - 1, 1)
            swaps += 1
            if swaps > _MAX_LLL_SWAPS:
                break
    return b


@njit
def _vec_norm(v, sup):
    if sup:
        best = 0.0
        for c in range(v.shape[0]):
            a = abs(v[c])
            if a > best:
                best = a
        return best
    s = 0.0
    for c in range(v.shape[0]):
        s += v[c] * v[c]
    return math.sqrt(s)


@njit
def shortest_vector(b, sup, out_vec):
    """Shortest nonzero vector of the lattice spanned by the (reduced) rows of ``b``.

    Fincke-Pohst enumeration in the Euclidean metric. For the sup norm the
    search radius is ``sqrt(m) * best_sup`` since ``|v|_2 <= sqrt(m) |v|_inf``.
    Returns the norm and writes the vector into ``out_vec``.
    """
    k, m = b.shape
    mu = np.zeros((k, k))
    bnorm = np.zeros(k)
    _gram_schmidt(b, mu, bnorm)

    best = np.inf
    v = np.zeros(m)
    for i in range(k):
        val = _vec_norm(b[i], sup)
        if val < best:
            best = val
            for c in range(m):
                out_vec[c] = b[i, c]
    if sup:
        r2 = m * best * best * (1.0 + 1e-10)
    else:
        r2 = best * best * (1.0 + 1e-10)

    x = np.zeros(k)
    hi = np.zeros(k)
    ctr = np.zeros(k)
    part = np.zeros(k + 1)

    lvl = k - 1
    ctr[lvl] = 0.0
    rad = math.sqrt(r2 / bnorm[lvl])
    # v and -v have equal norm, so the top coefficient can start at zero
    x[lvl] = 0.0
    hi[lvl] = math.floor(rad)
    while True:
        if x[lvl] > hi[lvl]:
            lvl += 1
            if lvl == k:
                break
            x[lvl] += 1.0
            continue
        d = x[lvl] - ctr[lvl]
        newpart = part[lvl + 1] + d * d * bnorm[lvl]
        if newpart > r2:
            if x[lvl] < ctr[lvl]:
                # radius shrank since this level's bounds were computed
                rad = math.sqrt(max(r2 - part[lvl + 1], 0.0) / bnorm[lvl])
                nx = math.ceil(ctr[lvl] - rad)
                x[lvl] = nx if nx > x[lvl] else x[lvl] + 1.0
            else:
                x[lvl] = hi[lvl] + 1.0
            continue
        if lvl == 0:
            nonzero = False
            for j in range(k):
                if x[j] != 0.0:
                    nonzero = True
                    break
            if nonzero:
                for c in range(m):
                    s = 0.0
                    for j in range(k):
                        s += x[j] * b[j, c]
                    v[c] = s
                val = _vec_norm(v, sup)
                if val < best:
                    best = val
                    for c in range(m):
                        out_vec[c] = v[c]
                    if sup:
                        r2 = m * best * best * (1.0 + 1e-10)
                    else:
                        r2 = best * best * (1.0 + 1e-10)
            x[0] += 1.0
            continue
        part[lvl] = newpart
        lvl -= 1
        s = 0.0
        for j in range(lvl + 1, k):
            s -= x[j] * mu[j, lvl]
        ctr[lvl] = s
        rad = math.sqrt(max(r2 - part[lvl + 1], 0.0) / bnorm[lvl])
        x[lvl] = math.ceil(ctr[lvl] - rad)
        hi[lvl] = math.floor(ctr[lvl] + rad)
    return best


@njit
def delta_rows(rows, sup):
    """Shortest nonzero vector norm of the lattice spanned by ``rows``."""
    b = rows.copy()
    lll_reduce(b, LLL_DELTA)
    vec = np.zeros(b.shape[1])
    return shortest_vector(b, sup, vec)


@njit(parallel=True)
def delta_rows_batch(bases, sup, out):
    """Batched :func:`delta_rows` over a stack of bases ``(N, k, m)``."""
    for s in prange(bases.shape[0]):
        out[s] = delta_rows(bases[s], sup)
    return out


@njit
def _orbit_basis(xs, ys, t, b):
    n = xs.shape[0]
    total = 0.0
    for i in range(n):
        total += t[i]
    ea = math.exp((n - 1) / (2.0 * n) * total)
    for r in range(n + 1):
        for c in range(n + 2):
            b[r, c] = 0.0
    b[0, 0] = ea
    for i in range(n):
        b[i + 1, 0] = ea * xs[i]
        b[i + 1, 1] = ea * ys[i]
        b[i + 1, i + 2] = math.exp(-t[i])


@njit
def orbit_delta_one(xs, ys, t, sup, out_vec):
    """delta(g_t u_z Lambda) for one point; writes a shortest vector to ``out_vec``."""
    n = xs.shape[0]
    b = np.zeros((n + 1, n + 2))
    _orbit_basis(xs, ys, t, b)
    lll_reduce(b, LLL_DELTA)
    return shortest_vector(b, sup, out_vec)


@njit(parallel=True)
def orbit_delta_batch(x, y, t, sup, out):
    """delta(g_t u_z Lambda) for each row of ``x + i y``; results in ``out``."""
    npts, n = x.shape
    for s in prange(npts):
        b = np.zeros((n + 1, n + 2))
        _orbit_basis(x[s], y[s], t, b)
        lll_reduce(b, LLL_DELTA)
        vec = np.zeros(n + 2)
        out[s] = shortest_vector(b, sup, vec)
    return out


@njit
def shell_minima_jit(x, y, hmax):
    """Per-height minimum of |z.q + p| over sign-canonical q in the box.

    Returns ``(best_err, best_q)`` indexed by height ``1..hmax`` (row 0
    unused). Ties within a shell keep the lexicographically first q, which is
    the first one met by the odometer below.
    """
    n = x.shape[0]
    best_err = np.full(hmax + 1, np.inf)
    best_q = np.zeros((hmax + 1, n), dtype=np.int64)
    q = np.full(n, -hmax, dtype=np.int64)
    side = 2 * hmax + 1
    total = 1
    for _ in range(n):
        total *= side
    for _ in range(total):
        lead = 0
        for i in range(n):
            if q[i] != 0:
                lead = q[i]
                break
        if lead > 0:
            h = 0
            re = 0.0
            im = 0.0
            for i in range(n):
                a = abs(q[i])
                if a > h:
                    h = a
                re += x[i] * q[i]
                im += y[i] * q[i]
            p = -np.rint(re)
            d = re + p
            err = math.sqrt(d * d + im * im)
            if err < best_err[h]:
                best_err[h] = err
                for i in range(n):
                    best_q[h, i] = q[i]
        # odometer, last coordinate fastest (lexicographic order)
        i = n - 1
        while i >= 0:
            q[i] += 1
            if q[i] <= hmax:
                break
            q[i] = -hmax
            i -= 1
    return best_err, best_q


def shell_minima_numpy(x, y, hmax):
    """Vectorized numpy version of :func:`shell_minima_jit`."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    best_err = np.full(hmax + 1, np.inf)
    best_q = np.zeros((hmax + 1, n), dtype=np.int64)
    axis = np.arange(-hmax, hmax + 1, dtype=np.int64)
    if n == 1:
        chunks = [axis[:, None]]
    else:
        rest = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), -1).reshape(-1, n - 1)
        chunks = (np.column_stack([np.full(len(rest), a, dtype=np.int64), rest]) for a in axis)
    for qs in chunks:
        nz = qs != 0
        first = np.argmax(nz, axis=1)
        lead = qs[np.arange(len(qs)), first]
        qs = qs[lead > 0]
        if not len(qs):
            continue
        h = np.abs(qs).max(axis=1)
        # accumulate in the same order as the jitted loop
        re = np.zeros(len(qs))
        im = np.zeros(len(qs))
        for i in range(n):
            re += x[i] * qs[:, i]
            im += y[i] * qs[:, i]
        d = re - np.rint(re)
        err = np.sqrt(d * d + im * im)
        order = np.lexsort((np.arange(len(qs)), err, h))
        hs = h[order]
        keep = np.ones(len(order), dtype=bool)
        keep[1:] = hs[1:] != hs[:-1]
        idx = order[keep]
        for j in idx:
            hj = h[j]
            if err[j] < best_err[hj]:
                best_err[hj] = err[j]
                best_q[hj] = qs[j]
    return best_err, best_q


shell_minima = shell_minima_jit if JIT_ENABLED else shell_minima_numpy
