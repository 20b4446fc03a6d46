"""Low-level polytope machinery: hulls, facet normalization, zonotope facets.

Everything here assumes the origin lies in the interior of the hull so that a
facet can be written as ``<u, x> <= 1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

from .errors import CapabilityError, InputError

EXACT_DIM_CAP = 6
MAX_FACET_SUBSETS = 200_000
_ROUND = 9


@dataclass(frozen=True, eq=False)
class HullResult:
    """Extreme points and unit-offset facets of a full-dimensional hull.

    ``facets[i]`` is a normal ``u`` with ``<u, x> <= 1`` on the hull.
    ``simplices`` index into ``vertices``; together with the origin they
    triangulate the hull.
    """

    vertices: np.ndarray
    facets: np.ndarray
    simplices: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def cone_volume(self) -> float:
        """Volume as a fan of simplices from the origin."""
        n = self.dim
        if n == 1:
            return float(self.vertices.max() - self.vertices.min())
        dets = np.linalg.det(self.vertices[self.simplices])
        return float(np.sum(np.abs(dets)) / np.prod(np.arange(1, n + 1)))


def _lex_sorted_unique(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    keys = np.round(rows, _ROUND) + 0.0
    _, idx = np.unique(keys, axis=0, return_index=True)
    out = rows[np.sort(idx)]
    order = np.lexsort(np.round(out, _ROUND).T[::-1])
    return out[order] + 0.0


def affine_rank(points: np.ndarray, tol: float = 1e-10) -> int:
    centered = points - points.mean(axis=0)
    if not np.any(centered):
        return 0
    s = np.linalg.svd(centered, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def hull(points) -> HullResult:
    """Convex hull of a point set whose interior contains the origin."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if not np.all(np.isfinite(pts)):
        raise InputError("hull: non-finite coordinates")
    n = pts.shape[1]
    if n > EXACT_DIM_CAP:
        raise CapabilityError(f"hull: dimension {n} exceeds exact cap {EXACT_DIM_CAP}")
    rank = affine_rank(pts)
    if rank < n:
        raise InputError(f"hull: points are degenerate (affine rank {rank} < dimension {n})")
    if n == 1:
        lo, hi = float(pts.min()), float(pts.max())
        if not (lo < 0.0 < hi):
            raise InputError("hull: origin must be interior")
        vertices = np.array([[lo], [hi]])
        facets = np.array([[1.0 / lo], [1.0 / hi]])
        return HullResult(vertices, facets, np.array([[0], [1]]))
    try:
        qh = ConvexHull(pts)
    except QhullError as exc:
        raise InputError(f"hull: qhull failed ({exc.args[0].splitlines()[0]})") from exc
    offsets = qh.equations[:, -1]
    if np.any(offsets >= -1e-12):
        raise InputError("hull: origin must be interior")
    normals = qh.equations[:, :-1] / (-offsets[:, None])
    verts_idx = np.asarray(qh.vertices)
    vertices = pts[verts_idx]
    order = np.lexsort(np.round(vertices, _ROUND).T[::-1])
    vertices = vertices[order] + 0.0
    remap = np.empty(len(pts), dtype=int)
    remap[verts_idx[order]] = np.arange(len(order))
    simplices = remap[qh.simplices]
    return HullResult(vertices, _lex_sorted_unique(normals), simplices)


def symmetric_closure(points: np.ndarray) -> np.ndarray:
    return np.vstack([points, -points])


def pair_representatives(rows: np.ndarray) -> np.ndarray:
    """One row from each +/- pair (first nonzero coordinate positive)."""
    rows = np.asarray(rows, dtype=float)
    out = rows.copy()
    for i, r in enumerate(rows):
        nz = np.flatnonzero(np.abs(r) > 1e-15)
        if len(nz) and r[nz[0]] < 0:
            out[i] = -r
    return _lex_sorted_unique(out)


def zonotope_facets(generators: np.ndarray) -> np.ndarray:
    """Unit-offset facet normals of the zonotope sum_i [-v_i, v_i].

    Each facet is spanned by an (n-1)-subset of generators; its normal ``w``
    is scaled by the support value sum_i |<v_i, w>|.
    """
    g, n = generators.shape
    if n == 1:
        h = float(np.sum(np.abs(generators)))
        return np.array([[-1.0 / h], [1.0 / h]])
    count = comb(g, n - 1)
    if count > MAX_FACET_SUBSETS:
        raise CapabilityError(f"zonotope facets: {count} generator subsets exceed cap {MAX_FACET_SUBSETS}")
    subsets = np.array(list(itertools.combinations(range(g), n - 1)))
    blocks = generators[subsets]  # (count, n-1, n)
    _, s, vt = np.linalg.svd(blocks)
    scale = np.max(np.abs(generators))
    ok = s[:, -1] > 1e-10 * scale
    w = vt[ok, -1, :]
    h = np.sum(np.abs(w @ generators.T), axis=1)
    normals = w / h[:, None]
    return _lex_sorted_unique(symmetric_closure(pair_representatives(normals)))


def zonotope_points(generators: np.ndarray) -> np.ndarray:
    """All 2^g signed sums of generators (brute force; small g only)."""
    g = len(generators)
    if g > 20:
        raise CapabilityError("zonotope_points: more than 20 generators")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=g)))
    return signs @ generators


def orthonormal_complement(direction: np.ndarray) -> np.ndarray:
    """An n x (n-1) matrix whose columns span direction-perp.

    Coordinate directions keep the remaining coordinate axes in order, so
    axis-aligned bodies stay axis-aligned.
    """
    d = np.asarray(direction, dtype=float)
    n = len(d)
    nz = np.flatnonzero(np.abs(d) > 0)
    if len(nz) == 1:
        keep = [i for i in range(n) if i != nz[0]]
        return np.eye(n)[:, keep]
    q, _ = np.linalg.qr(np.column_stack([d, np.eye(n)]))
    return q[:, 1:n]


def halfspace_cut_vertices(facets: np.ndarray, direction: np.ndarray, interior: np.ndarray) -> np.ndarray:
    """Vertices of {x : <u, x> <= 1 for all facets, <direction, x> >= 0}."""
    n = facets.shape[1]
    halfspaces = np.vstack([
        np.column_stack([facets, -np.ones(len(facets))]),
        np.append(-direction, 0.0)[None, :],
    ])
    hs = HalfspaceIntersection(halfspaces, interior)
    pts = hs.intersections
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    return _lex_sorted_unique(pts) if n > 1 else pts
