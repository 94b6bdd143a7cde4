"""(C, alpha)-good functions measured by quasi-Monte-Carlo, and the lower
bounds rho_1, rho_2 on sups of linear combinations over a ball."""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

DEFAULT_EPS_GRID = tuple(np.geomspace(1e-3, 0.5, 13).tolist())
NEAR_ZERO = 1e-8
SIGMA_MARGIN = 3.0


class NearZeroWarning(RuntimeWarning):
    """An estimated lower bound is numerically zero: the independence hypothesis likely fails."""


class PreconditionError(ValueError):
    """A hypothesis of a combination rule does not hold on the measured data."""


@dataclass(frozen=True)
class Ball:
    """Euclidean disc or sup-metric square in R^2 = C."""

    center: tuple
    radius: float
    metric: str = "euclidean"

    def __post_init__(self):
        if self.metric not in ("euclidean", "sup"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        cx, cy = (complex(self.center).real, complex(self.center).imag) if np.isscalar(self.center) \
            else (float(self.center[0]), float(self.center[1]))
        object.__setattr__(self, "center", (cx, cy))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def area(self):
        r = self.radius
        return math.pi * r * r if self.metric == "euclidean" else 4 * r * r

    def dilate(self, factor):
        return Ball(self.center, self.radius * factor, self.metric)

    def sample(self, count, seed=0):
        """``(count, 2)`` scrambled-Halton points, uniform in the ball."""
        u = qmc.Halton(d=2, scramble=True, seed=seed).random(int(count))
        cx, cy = self.center
        r = self.radius
        if self.metric == "sup":
            return np.column_stack([cx + r * (2 * u[:, 0] - 1), cy + r * (2 * u[:, 1] - 1)])
        # area-preserving polar map
        rad = r * np.sqrt(u[:, 0])
        ang = 2 * np.pi * u[:, 1]
        return np.column_stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)])

    def boundary(self, count):
        """``count`` evenly spaced boundary points (corners included for squares)."""
        cx, cy = self.center
        r = self.radius
        s = np.arange(count) / count
        if self.metric == "euclidean":
            ang = 2 * np.pi * s
            return np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)])
        # walk the perimeter starting from a corner
        p = 8 * s
        side = np.floor(p / 2).astype(int)
        f = p - 2 * side - 1
        xs = np.select([side == 0, side == 1, side == 2], [f, np.ones_like(f), -f], -np.ones_like(f))
        ys = np.select([side == 0, side == 1, side == 2], [-np.ones_like(f), f, np.ones_like(f)], -f)
        return np.column_stack([cx + r * xs, cy + r * ys])

    def sample_with_boundary(self, count, seed=0, boundary_count=None):
        if boundary_count is None:
            boundary_count = max(64, int(count) // 16)
        return np.vstack([self.sample(count, seed), self.boundary(boundary_count)])

    @staticmethod
    def as_complex(pts):
        return pts[:, 0] + 1j * pts[:, 1]


@dataclass(frozen=True)
class GoodFitReport:
    """Measured sublevel ratios of one function and the fitted (C, alpha).

    ``degenerate`` is ``"zero"`` (f vanishes on every sample, the definition
    is vacuous) or ``"constant"`` (no sample lies below eps * sup for any
    eps in the grid, so every (C, alpha) passes); C and alpha are NaN then.
    """

    C: float
    alpha: float
    eps_grid: tuple
    measured_ratios: tuple
    sup_estimate: float
    sample_count: int
    violation_count: int
    degenerate: str = ""
    fitted_points: int = 0
    extra: dict = field(default_factory=dict)


def _check_grid(eps_grid):
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or not len(eps) or np.any(eps <= 0) or np.any(eps > 1):
        raise ValueError("eps_grid must be a nonempty list of values in (0, 1]")
    return np.sort(eps)


def sublevel_ratios(values, eps_grid):
    """``(sup, ratios)`` with ratios[j] = #{|v| < eps_j sup} / #v."""
    vals = np.abs(np.asarray(values))
    sup = float(vals.max())
    srt = np.sort(vals)
    counts = np.searchsorted(srt, np.asarray(eps_grid) * sup, side="left")
    return sup, counts / len(vals)


def fit_constants(eps, ratios):
    """Least squares log(ratio) = log C + alpha log(eps) over the positive
    ratios, then C raised so that ratio <= C eps^alpha at every grid point."""
    eps = np.asarray(eps, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    pos = ratios > 0
    if pos.sum() >= 2 and np.ptp(np.log(eps[pos])) > 0:
        alpha, logc = np.polyfit(np.log(eps[pos]), np.log(ratios[pos]), 1)
    else:
        e, r = eps[pos][0], ratios[pos][0]
        alpha = math.log(r) / math.log(e) if e < 1 else 1.0
        logc = 0.0
    alpha = max(float(alpha), 1e-12)
    c = max(math.exp(logc), float(np.max(ratios / eps**alpha)))
    return c, alpha, int(pos.sum())


def _evaluate(f, pts):
    return np.abs(np.asarray(f(pts[:, 0], pts[:, 1])))


def good_fit(f, ball, samples=100_000, eps_grid=DEFAULT_EPS_GRID, seed=0):
    """Fit (C, alpha) to |{x in B: |f(x)| < eps sup_B |f|}| / |B| measured on a grid of eps.

    ``f(x, y)`` takes coordinate arrays and returns real or complex values.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    eps = _check_grid(eps_grid)
    vals = _evaluate(f, ball.sample(samples, seed))
    return fit_values(vals, eps)


def fit_values(vals, eps):
    """:func:`good_fit` on precomputed absolute values."""
    eps = _check_grid(eps)
    n = len(vals)
    sup = float(np.max(vals)) if n else 0.0
    if sup == 0.0:
        return GoodFitReport(math.nan, math.nan, tuple(eps), tuple([1.0] * len(eps)), 0.0, n, 0, "zero")
    sup, ratios = sublevel_ratios(vals, eps)
    if not np.any(ratios > 0):
        return GoodFitReport(math.nan, math.nan, tuple(eps), tuple(ratios.tolist()), sup, n, 0, "constant")
    c, alpha, used = fit_constants(eps, ratios)
    violations = int(np.sum(ratios > c * eps**alpha * (1 + 1e-12)))
    return GoodFitReport(c, alpha, tuple(eps.tolist()), tuple(ratios.tolist()), sup, n, violations,
                         fitted_points=used)


def bound_exceeded(ratios, bound, count, sigmas=SIGMA_MARGIN):
    """Per grid point: is the measured ratio above ``bound`` by more than
    ``sigmas`` binomial standard deviations (computed at the bound)?"""
    p = np.clip(np.asarray(bound, dtype=float), 0.0, 1.0)
    sigma = np.sqrt(p * (1 - p) / count)
    return np.asarray(ratios) > p + sigmas * sigma


def check_good(f, ball, C, alpha, samples=100_000, eps_grid=DEFAULT_EPS_GRID, seed=0):
    """Does ratio(eps) <= C eps^alpha hold at every grid eps, up to the 3 sigma margin?"""
    if not (C > 0 and alpha > 0):
        raise ValueError("C and alpha must be positive")
    eps = _check_grid(eps_grid)
    vals = _evaluate(f, ball.sample(samples, seed))
    return values_good(vals, eps, C, alpha)


def values_good(vals, eps, C, alpha):
    if float(np.max(vals)) == 0.0:
        return True
    _, ratios = sublevel_ratios(vals, eps)
    return not bool(np.any(bound_exceeded(ratios, C * np.asarray(eps) ** alpha, len(vals))))


def combine_good(fs, C, alpha, ball, samples=100_000, eps_grid=DEFAULT_EPS_GRID, seed=0):
    """Is sqrt(f_1^2 + ... + f_k^2) (k^{alpha/2} C, alpha)-good, given that each f_i is (C, alpha)-good?

    Raises :class:`PreconditionError` naming the first f_i that is not.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one function")
    eps = _check_grid(eps_grid)
    pts = ball.sample(samples, seed)
    parts = [_evaluate(f, pts) for f in fs]
    for i, vals in enumerate(parts):
        if not values_good(vals, eps, C, alpha):
            raise PreconditionError(f"function {i} is not ({C}, {alpha})-good on the ball")
    norm = np.sqrt(sum(v * v for v in parts))
    return values_good(norm, eps, len(fs) ** (alpha / 2) * C, alpha)


def sphere_grid(dim, step, half=True, max_points=200_000):
    """Unit vectors in R^dim on a hyperspherical angle grid of spacing ``step``.

    With ``half`` the last angle covers [0, pi) only (v and -v identified).
    The step is widened if the grid would exceed ``max_points``; the step
    actually used is returned alongside the points.
    """
    if dim == 1:
        return np.ones((1, 1)), step
    nang = dim - 1
    while True:
        counts = [max(1, math.ceil(math.pi / step))] * (nang - 1)
        counts.append(max(1, math.ceil((math.pi if half else 2 * math.pi) / step)))
        if math.prod(counts) <= max_points:
            break
        step *= 1.25
    axes = [np.linspace(0, math.pi, c + 1)[:-1] + (0.5 * math.pi / c if i < nang - 1 else 0)
            for i, c in enumerate(counts[:-1])]
    top = math.pi if half else 2 * math.pi
    axes.append(np.linspace(0, top, counts[-1], endpoint=False))
    grids = np.meshgrid(*axes, indexing="ij")
    angles = np.stack([g.ravel() for g in grids], axis=1)
    out = np.ones((len(angles), dim))
    for k in range(nang):
        out[:, k] *= np.cos(angles[:, k])
        out[:, k + 1:] *= np.sin(angles[:, k])[:, None]
    return out, step


def _sup_abs(mat, coeffs, chunk=4096):
    out = np.empty(len(coeffs))
    for s in range(0, len(coeffs), chunk):
        out[s:s + chunk] = np.abs(mat @ coeffs[s:s + chunk].T).max(axis=0)
    return out


def rho1_estimate(ball, fs, samples=4096, seed=0, grid_step=1e-2):
    """min over unit c of sup_B |c_0 + c_1 f_1 + ... + c_n f_n| for real-valued f_i.

    Coarse sphere grid, then Nelder-Mead from the best grid point and from the
    least-squares null direction; the smallest value found is returned. A
    value below 1e-8 triggers :class:`NearZeroWarning`.
    """
    pts = ball.sample_with_boundary(samples, seed)
    cols = [np.ones(len(pts))] + [np.real(np.asarray(f(pts[:, 0], pts[:, 1]), dtype=complex))
                                  for f in fs]
    mat = np.column_stack(cols)
    dirs, _ = sphere_grid(mat.shape[1], grid_step)
    sups = _sup_abs(mat, dirs)

    def obj(c):
        nc = np.linalg.norm(c)
        return np.inf if nc == 0 else float(np.abs(mat @ (c / nc)).max())

    starts = [dirs[int(np.argmin(sups))], np.linalg.svd(mat, full_matrices=False)[2][-1]]
    best = float(sups.min())
    for c0 in starts:
        best = min(best, obj(c0))
        res = minimize(obj, c0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
        best = min(best, float(res.fun))
    if best < NEAR_ZERO:
        warnings.warn(f"rho_1 estimate {best:.3g} is numerically zero; 1, f_1, ..., f_n look "
                      "linearly dependent over R", NearZeroWarning, stacklevel=2)
    return best


@dataclass(frozen=True)
class LinearPairFamily:
    """Pairs (u_1.f, a + b u_2.f) for f: C -> C^n, indexed by parameter arrays.

    ``u1``, ``u2`` have shape (P, n) and ``a``, ``b`` shape (P,).
    """

    u1: np.ndarray
    u2: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __len__(self):
        return len(self.a)

    def im_products(self, fz):
        """Im(conj(phi_1) phi_2) for every pair (rows) at every point (columns)."""
        phi1 = self.u1 @ fz.T
        phi2 = self.a[:, None] + self.b[:, None] * (self.u2 @ fz.T)
        return np.imag(np.conj(phi1) * phi2)


def orthogonal_pair_family(n, step=0.05, max_points=200_000):
    """The family {(u_1.f, a + b u_2.f): a^2 + b^2 = 1, u_1 perp u_2 unit in R^n}
    on an angle grid. u_1 and -u_1 are identified (they give the same |Im|),
    as are u_2 and -u_2 (absorbed into b)."""
    if n < 2:
        raise ValueError("orthogonal unit pairs need n >= 2")
    u1s, _ = sphere_grid(n, step, half=True, max_points=max_points)
    ab, _ = sphere_grid(2, step, half=False, max_points=max_points)
    blocks = []
    for u1 in u1s:
        # orthonormal basis of the complement of u1
        q, _ = np.linalg.qr(np.column_stack([u1, np.eye(n)]))
        comp = q[:, 1:n]
        coords, _ = sphere_grid(n - 1, step, half=True, max_points=max_points)
        for u2 in coords @ comp.T:
            blocks.append((u1, u2))
    pairs_u1 = np.array([p[0] for p in blocks])
    pairs_u2 = np.array([p[1] for p in blocks])
    rep = len(ab)
    return LinearPairFamily(
        np.repeat(pairs_u1, rep, axis=0),
        np.repeat(pairs_u2, rep, axis=0),
        np.tile(ab[:, 0], len(blocks)),
        np.tile(ab[:, 1], len(blocks)),
    )


def rho2_estimate(ball, family, samples=2048, seed=0, f=None, chunk=2048):
    """min over the family of sup_B |Im(conj(phi_1) phi_2)|.

    ``family`` is a :class:`LinearPairFamily` (then ``f`` is the map the pairs
    are built from) or a sequence of callables ``(phi_1, phi_2)`` of complex z.
    A value below 1e-8 triggers :class:`NearZeroWarning`.
    """
    pts = ball.sample_with_boundary(samples, seed)
    z = Ball.as_complex(pts)
    if isinstance(family, LinearPairFamily):
        if f is None:
            raise ValueError("a LinearPairFamily needs the map f")
        fz = np.asarray(f(z))
        best = math.inf
        for s in range(0, len(family), chunk):
            sub = LinearPairFamily(family.u1[s:s + chunk], family.u2[s:s + chunk],
                                   family.a[s:s + chunk], family.b[s:s + chunk])
            best = min(best, float(np.abs(sub.im_products(fz)).max(axis=1).min()))
    else:
        best = math.inf
        for phi1, phi2 in family:
            prod = np.imag(np.conj(np.asarray(phi1(z))) * np.asarray(phi2(z)))
            best = min(best, float(np.abs(prod).max()))
    if best < NEAR_ZERO:
        warnings.warn(f"rho_2 estimate {best:.3g} is numerically zero; the family contains "
                      "a pair of real multiples", NearZeroWarning, stacklevel=2)
    return best
