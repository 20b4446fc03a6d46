"""Volumes, sections, projections and first/second moments of bodies."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import factorial, gamma, pi, sqrt
from typing import Callable

import numpy as np
from scipy.spatial import ConvexHull

from . import _hull
from ._random import make_rng, sphere_points
from .bodies import (Body, EuclidBall, HPolytope, Interval, L1Sum, LinearImage, LinfSum, VPolytope,
                     Zonotope, _Polytopal, _Sum, ball_volume, gauge, sphere_measure, support)
from .errors import CapabilityError, InputError
from .report import CheckReport, McEstimate

__all__ = [
    "McEstimate", "SectionProfile", "ball_volume", "sphere_measure", "volume", "volume_mc",
    "integral_mc", "polar_volume_sphere", "section_profile", "brunn_concavity_check", "projection",
    "central_section", "moment", "moment_mc", "unit_vector",
]

MIN_MC_SAMPLES = 1000
MAX_ZONOTOPE_GENERATORS = 20
UNIT_TOL = 1e-12
_BATCH = 1 << 16


def unit_vector(direction, dim: int, name: str = "direction") -> np.ndarray:
    d = np.asarray(direction, dtype=float).reshape(-1)
    if d.shape != (dim,):
        raise InputError(f"{name}: expected length {dim}, got {d.shape[0]}")
    if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
        raise InputError(f"{name}: not unit norm (|d| = {np.linalg.norm(d):.15g})")
    return d


# ---------------------------------------------------------------------------
# exact volume


def _zonotope_volume(G: np.ndarray) -> float:
    g, n = G.shape
    if g > MAX_ZONOTOPE_GENERATORS:
        raise CapabilityError(f"zonotope volume: {g} generators exceed cap {MAX_ZONOTOPE_GENERATORS}")
    if n == 1:
        return 2.0 * float(np.sum(np.abs(G)))
    total = 0.0
    subsets = itertools.combinations(range(g), n)
    while True:
        chunk = list(itertools.islice(subsets, 50_000))
        if not chunk:
            break
        total += float(np.sum(np.abs(np.linalg.det(G[np.array(chunk)]))))
    return 2.0 ** n * total


def volume(K: Body) -> float:
    """Exact volume by structural recursion; CapabilityError when no exact path exists."""
    if isinstance(K, EuclidBall):
        return ball_volume(K.dim)
    if isinstance(K, Interval):
        return 2.0 * K.halfwidth
    if isinstance(K, LinfSum):
        return float(np.prod([volume(p) for p in K.parts]))
    if isinstance(K, L1Sum):
        # the l1 sum of A (dim a) and B (dim b) has volume |A||B| a! b! / (a+b)!
        out = np.prod([volume(p) * factorial(p.dim) for p in K.parts])
        return float(out / factorial(K.dim))
    if isinstance(K, Zonotope):
        return _zonotope_volume(K.generators)
    if isinstance(K, _Polytopal):
        return K.vertex_hull.cone_volume()
    if isinstance(K, LinearImage):
        return abs(K.det) * volume(K.body)
    raise CapabilityError(f"volume: no exact path for {type(K).__name__}")


# ---------------------------------------------------------------------------
# Monte Carlo


def _bounding_radius(K: Body) -> float:
    return float(np.max(support(K, np.eye(K.dim))))


def _box_worker(K, fn, count, r, seed, key, worker):
    rng = make_rng(seed, key, "worker", worker)
    total = total_sq = 0.0
    done = 0
    while done < count:
        m = min(_BATCH, count - done)
        x = rng.uniform(-r, r, size=(m, K.dim))
        inside = K._gauge(x) <= 1.0
        vals = np.zeros(m)
        if np.any(inside):
            vals[inside] = fn(x[inside]) if fn is not None else 1.0
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        done += m
    return total, total_sq


def integral_mc(K: Body, fn: Callable | None, samples: int, seed: int, key: str = "integral",
                workers: int = 1) -> McEstimate:
    """MC estimate of the integral of ``fn`` over K (``fn=None`` gives the volume).

    Points are drawn uniformly from the box [-r, r]^n with r the largest
    coordinate support value. Work is split into ``workers`` fixed chunks,
    each with its own derived stream, and reduced in worker order.
    """
    if samples < MIN_MC_SAMPLES:
        raise InputError(f"MC: samples must be >= {MIN_MC_SAMPLES}")
    if workers < 1:
        raise InputError("MC: workers must be >= 1")
    r = _bounding_radius(K)
    box = (2.0 * r) ** K.dim
    counts = [samples // workers + (1 if w < samples % workers else 0) for w in range(workers)]
    jobs = [(K, fn, c, r, seed, key, w) for w, c in enumerate(counts)]
    if workers == 1:
        parts = [_box_worker(*jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _box_worker(*a), jobs))
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return McEstimate(box * mean, box * sqrt(var / samples), samples, seed, "mc", workers)


def volume_mc(K: Body, samples: int, seed: int, workers: int = 1) -> McEstimate:
    """Rejection-sampling volume over the coordinate bounding box."""
    return integral_mc(K, None, samples, seed, key="volume", workers=workers)


def polar_volume_sphere(K: Body, sphere_samples: int, seed: int) -> McEstimate:
    """vol(K*) = (|S^{n-1}| / n) * mean of h_K(theta)^{-n} over the sphere."""
    n = K.dim
    if n < 2:
        raise InputError("polar_volume_sphere: dimension must be >= 2")
    if sphere_samples < 2:
        raise InputError("polar_volume_sphere: need at least 2 samples")
    theta = sphere_points(make_rng(seed, "polar_volume_sphere"), sphere_samples, n)
    vals = support(K, theta) ** (-float(n))
    scale = sphere_measure(n) / n
    std = float(np.std(vals, ddof=1)) / sqrt(sphere_samples)
    return McEstimate(scale * float(vals.mean()), scale * std, sphere_samples, seed, "sphere")


# ---------------------------------------------------------------------------
# sections


@dataclass(frozen=True, eq=False)
class SectionProfile:
    """Volumes g(t) of the slices K cap {<direction, y> = t} on a symmetric grid."""

    direction: np.ndarray
    ts: np.ndarray
    g: np.ndarray
    g_err: np.ndarray
    samples: int
    seed: int

    @property
    def dim(self) -> int:
        return len(self.direction)

    @property
    def center(self) -> float:
        """g(0), the central section volume."""
        return float(self.g[len(self.ts) // 2])

    @property
    def center_err(self) -> float:
        return float(self.g_err[len(self.ts) // 2])

    def _weights(self) -> np.ndarray:
        # Simpson weights on the stored (odd, uniform) grid
        m = len(self.ts)
        h = self.ts[1] - self.ts[0]
        w = np.ones(m)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * h / 3.0

    def integral(self, weight=None) -> tuple[float, float]:
        """Simpson integral of weight(t) * g(t) and its propagated MC error."""
        f = np.ones_like(self.ts) if weight is None else weight(self.ts)
        w = self._weights() * f
        return float(np.dot(w, self.g)), float(np.sqrt(np.dot(w * w, self.g_err ** 2)))

    def volume(self) -> tuple[float, float]:
        return self.integral()

    def abs_moment(self) -> tuple[float, float]:
        """Integral of |t| g(t), i.e. the integral of |<direction, y>| over K."""
        return self.integral(np.abs)


def section_profile(K: Body, direction, grid_points: int = 33, samples: int = 20_000,
                    seed: int = 0) -> SectionProfile:
    """Estimate the slice-volume profile by MC sampling inside each slice.

    Each slice {<d, y> = t} is parametrized by an orthonormal basis of d-perp
    and sampled uniformly in a box that contains the slice of K, so the
    estimate has no slab-thickness bias. An even ``grid_points`` is bumped
    by one so that t = 0 lies on the grid.
    """
    n = K.dim
    d = unit_vector(direction, n)
    if grid_points < 16:
        raise InputError("section_profile: grid_points must be >= 16")
    if n < 2:
        raise InputError("section_profile: dimension must be >= 2")
    if samples < 1:
        raise InputError("section_profile: samples must be positive")
    m = grid_points + (1 - grid_points % 2)
    a = support(K, d)
    ts = np.linspace(-a, a, m)
    basis = _hull.orthonormal_complement(d)
    half = support(K, basis.T)
    box = float(np.prod(2.0 * half))
    g = np.zeros(m)
    err = np.zeros(m)
    for i in range(m // 2 + 1):
        rng = make_rng(seed, "section", i)
        s = rng.uniform(-half, half, size=(samples, n - 1))
        y = ts[i] * d + s @ basis.T
        hits = int(np.count_nonzero(K._gauge(y) <= 1.0))
        p = hits / samples
        p_s = (hits + 1.0) / (samples + 2.0)
        g[i] = g[m - 1 - i] = box * p
        err[i] = err[m - 1 - i] = box * sqrt(p_s * (1.0 - p_s) / samples)
    for arr in (ts, g, err):
        arr.setflags(write=False)
    return SectionProfile(d, ts, g, err, samples, seed)


def brunn_concavity_check(profile: SectionProfile, n: int, k_sigma: float = 3.0) -> CheckReport:
    """Midpoint concavity of g^{1/(n-1)} on consecutive grid triples.

    A triple is a violation when the midpoint falls below the chord by more
    than ``k_sigma`` times its propagated MC error (each g moved by +-err).
    The report's lhs is the worst excess, to be <= 0.
    """
    if n < 2:
        raise InputError("brunn_concavity_check: n must be >= 2")
    q = 1.0 / (n - 1)
    g, e = profile.g, profile.g_err
    pw = lambda v: np.maximum(v, 0.0) ** q
    mid = pw(g[1:-1])
    chord = 0.5 * (pw(g[:-2]) + pw(g[2:]))
    # uncertainty of midpoint and chord from shifting g by its error
    mid_err = np.abs(pw(g[1:-1] + e[1:-1]) - pw(np.maximum(g[1:-1] - e[1:-1], 0.0))) / 2
    chord_err = 0.5 * (np.abs(pw(g[:-2] + e[:-2]) - pw(np.maximum(g[:-2] - e[:-2], 0.0))) / 2
                       + np.abs(pw(g[2:] + e[2:]) - pw(np.maximum(g[2:] - e[2:], 0.0))) / 2)
    excess = (chord - mid) - k_sigma * np.hypot(mid_err, chord_err)
    worst = int(np.argmax(excess))
    return CheckReport.compare("brunn_concavity", float(excess[worst]), 0.0, "<=", 1e-12,
                               relative=False, seed=profile.seed, samples=profile.samples,
                               details={"worst_index": worst + 1, "violations": int(np.sum(excess > 1e-12))})


# ---------------------------------------------------------------------------
# projections and central sections


def projection(K: Body, direction) -> Body:
    """Orthogonal projection of a zonotope or V-polytope onto direction-perp."""
    n = K.dim
    d = unit_vector(direction, n)
    if n < 2:
        raise InputError("projection: dimension must be >= 2")
    basis = _hull.orthonormal_complement(d)
    if isinstance(K, Zonotope):
        G = K.generators @ basis
        norms = np.linalg.norm(G, axis=1)
        return Zonotope(G[norms > 1e-12 * max(1.0, norms.max())])
    if isinstance(K, VPolytope):
        P = K.vertices @ basis
        if n == 2:
            r = float(np.max(np.abs(P)))
            return VPolytope(np.array([[-r], [r]]))
        return VPolytope(_hull.hull(P).vertices)
    raise CapabilityError(f"projection: unsupported variant {type(K).__name__}")


def _axis_of(x: np.ndarray):
    nz = np.flatnonzero(x)
    return int(nz[0]) if len(nz) == 1 else None


def central_section(K: Body, x) -> Body:
    """K cap x-perp, expressed in the orthonormal basis of x-perp used by ``projection``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = K.dim
    if x.shape != (n,) or not np.any(x):
        raise InputError("central_section: need a nonzero vector of matching dimension")
    if n < 2:
        raise InputError("central_section: dimension must be >= 2")
    x = x / np.linalg.norm(x)
    if isinstance(K, EuclidBall):
        return EuclidBall(n - 1)
    if isinstance(K, _Polytopal):
        U = K.facets @ _hull.orthonormal_complement(x)
        U = U[np.linalg.norm(U, axis=1) > 1e-12]
        if n == 2:
            return Interval(1.0 / float(np.max(np.abs(U))))
        return HPolytope(_hull.pair_representatives(U))
    if isinstance(K, _Sum):
        axis = _axis_of(x)
        if axis is None:
            from .duality import to_vpolytope
            return central_section(to_vpolytope(K), x)
        parts = []
        for p, b in zip(K.parts, K.blocks):
            if b.start <= axis < b.stop:
                if p.dim > 1:
                    parts.append(central_section(p, np.eye(p.dim)[axis - b.start]))
            else:
                parts.append(p)
        return parts[0] if len(parts) == 1 else type(K)(tuple(parts))
    if isinstance(K, LinearImage):
        w = K.matrix.T @ x
        w = w / np.linalg.norm(w)
        inner = central_section(K.body, w)
        B, Bw = _hull.orthonormal_complement(x), _hull.orthonormal_complement(w)
        return LinearImage(B.T @ K.matrix @ Bw, inner)
    raise CapabilityError(f"central_section: unsupported variant {type(K).__name__}")


# ---------------------------------------------------------------------------
# moments: integral over K of |<x, y>|^k for k in {1, 2}


def _ball_moment(n: int, norm: float, k: int) -> float:
    return (2.0 * pi ** ((n - 1) / 2) * gamma((k + 1) / 2) / gamma((n + k) / 2)) / (n + k) * norm ** k


def _polytope_moment(K: _Polytopal, x: np.ndarray, k: int) -> float:
    n = K.dim
    if n == 1:
        b = float(np.max(K.extreme_points))
        return 2.0 * abs(x[0]) ** k * b ** (k + 1) / (k + 1)
    if k == 2:
        # fan of simplices from the origin; int over a simplex of a linear
        # form squared is vol * (sum a_i^2 + (sum a_i)^2) / ((n+1)(n+2))
        H = K.vertex_hull
        simp = H.vertices[H.simplices]
        vols = np.abs(np.linalg.det(simp)) / factorial(n)
        a = simp @ x
        return float(np.sum(vols * (np.sum(a * a, axis=1) + np.sum(a, axis=1) ** 2)) / ((n + 1) * (n + 2)))
    # k == 1: twice the integral of <x, y> over the half {<x, y> >= 0}
    interior = 0.5 * x / (gauge(K, x) * np.dot(x, x))
    interior = 0.5 * interior / max(1.0, gauge(K, interior))
    verts = _hull.halfspace_cut_vertices(K.facets, x, interior)
    qh = ConvexHull(verts)
    c = verts.mean(axis=0)
    simp = verts[qh.simplices]
    vols = np.abs(np.linalg.det(simp - c)) / factorial(n)
    cents = (simp.sum(axis=1) + c) / (n + 1)
    return 2.0 * float(np.sum(vols * (cents @ x)))


def moment(K: Body, x, k: int = 1) -> float:
    """Exact integral over K of |<x, y>|^k (k = 1 or 2)."""
    if k not in (1, 2):
        raise InputError("moment: k must be 1 or 2")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (K.dim,):
        raise InputError("moment: dimension mismatch")
    if not np.any(x):
        return 0.0
    if isinstance(K, EuclidBall):
        return _ball_moment(K.dim, float(np.linalg.norm(x)), k)
    if isinstance(K, Interval):
        return 2.0 * abs(x[0]) ** k * K.halfwidth ** (k + 1) / (k + 1)
    if isinstance(K, _Polytopal):
        if K.dim > _hull.EXACT_DIM_CAP:
            raise CapabilityError("moment: dimension exceeds exact cap")
        return _polytope_moment(K, x, k)
    if isinstance(K, _Sum):
        active = [j for j, b in enumerate(K.blocks) if np.any(x[b])]
        if k == 1 and len(active) > 1:
            from .duality import to_vpolytope
            return moment(to_vpolytope(K), x, k)
        vols = [volume(p) for p in K.parts]
        n = K.dim
        total = 0.0
        for j in active:
            mj = moment(K.parts[j], x[K.blocks[j]], k)
            rest = [vols[i] * (factorial(K.parts[i].dim) if isinstance(K, L1Sum) else 1.0)
                    for i in range(len(K.parts)) if i != j]
            if isinstance(K, L1Sum):
                dj = K.parts[j].dim
                total += gamma(dj + k + 1) * mj * float(np.prod(rest)) / gamma(n + k + 1)
            else:
                total += mj * float(np.prod(rest))
        return total
    if isinstance(K, LinearImage):
        return abs(K.det) * moment(K.body, K.matrix.T @ x, k)
    raise CapabilityError(f"moment: no exact path for {type(K).__name__}")


def moment_mc(K: Body, x, k: int, samples: int, seed: int, workers: int = 1) -> McEstimate:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (K.dim,):
        raise InputError("moment_mc: dimension mismatch")
    return integral_mc(K, lambda y: np.abs(y @ x) ** k, samples, seed, key=f"moment{k}", workers=workers)
