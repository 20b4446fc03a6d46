"""Polar bodies and the V/H conversions behind them."""
from __future__ import annotations

import numpy as np

from . import _hull
from ._hull import EXACT_DIM_CAP, HullResult, hull
from ._random import make_rng, sphere_points
from .bodies import (Body, EuclidBall, HPolytope, Interval, L1Sum, LinearImage, LinfSum, VPolytope,
                     Zonotope, gauge)
from .errors import CapabilityError, InputError
from .report import CheckReport

__all__ = ["HullResult", "hull", "polar", "bipolar_check", "enumerate_vertices", "vertex_set", "to_vpolytope"]

BIPOLAR_TOL = 1e-7


def enumerate_vertices(normals) -> np.ndarray:
    """Vertices of {x : |<u_i, x>| <= 1}, read off as facets of conv(+-u_i)."""
    u = np.asarray(normals, dtype=float)
    if u.shape[1] > EXACT_DIM_CAP:
        raise CapabilityError(f"vertex enumeration: dimension {u.shape[1]} exceeds cap {EXACT_DIM_CAP}")
    return hull(_hull.symmetric_closure(u)).facets


def polar(K: Body) -> Body:
    """K* = {y : <x, y> <= 1 for all x in K}, returned in the same variant algebra.

    Structural rules: balls are self-polar, Interval(a) -> Interval(1/a),
    V <-> H polytopes exchange vertices and normals, l1 and l-infinity sums
    swap, and polar(T K) = T^{-T} polar(K). A zonotope's polar is the
    V-polytope whose vertices are the zonotope's unit-offset facet normals.
    """
    if isinstance(K, EuclidBall):
        return K
    if isinstance(K, Interval):
        return Interval(1.0 / K.halfwidth)
    if isinstance(K, VPolytope):
        return HPolytope(_hull.pair_representatives(K.vertices))
    if isinstance(K, HPolytope):
        if K.dim > EXACT_DIM_CAP:
            raise CapabilityError(f"polar(HPolytope): dimension {K.dim} exceeds cap {EXACT_DIM_CAP}")
        return VPolytope(hull(K.facets).vertices)
    if isinstance(K, Zonotope):
        return VPolytope(K.facets)
    if isinstance(K, L1Sum):
        return LinfSum(tuple(polar(p) for p in K.parts))
    if isinstance(K, LinfSum):
        return L1Sum(tuple(polar(p) for p in K.parts))
    if isinstance(K, LinearImage):
        return LinearImage(K.inverse.T, polar(K.body))
    raise InputError(f"polar: unsupported body {type(K).__name__}")


def bipolar_check(K: Body, samples: int = 500, seed: int = 0) -> CheckReport:
    """Max deviation of gauge(K) from gauge(K**) over seeded unit directions."""
    if samples < 1:
        raise InputError("bipolar_check: samples must be positive")
    x = sphere_points(make_rng(seed, "bipolar"), samples, K.dim)
    dev = float(np.max(np.abs(gauge(K, x) - gauge(polar(polar(K)), x))))
    return CheckReport.compare("bipolar", dev, 0.0, "<=", BIPOLAR_TOL, relative=False,
                               inputs=(K,), seed=seed, samples=samples)


def vertex_set(K: Body) -> np.ndarray:
    """Extreme-point candidates of a polytopal body (sums and images included)."""
    if isinstance(K, Interval):
        return np.array([[-K.halfwidth], [K.halfwidth]])
    if isinstance(K, (VPolytope, HPolytope, Zonotope)):
        return np.asarray(K.extreme_points)
    if isinstance(K, L1Sum):
        rows = []
        for p, b in zip(K.parts, K.blocks):
            v = vertex_set(p)
            block = np.zeros((len(v), K.dim))
            block[:, b] = v
            rows.append(block)
        return np.vstack(rows)
    if isinstance(K, LinfSum):
        sets = [vertex_set(p) for p in K.parts]
        total = int(np.prod([len(s) for s in sets]))
        if total > 1_000_000:
            raise CapabilityError(f"vertex_set: {total} product vertices")
        grids = np.meshgrid(*[np.arange(len(s)) for s in sets], indexing="ij")
        idx = [g.reshape(-1) for g in grids]
        return np.hstack([s[i] for s, i in zip(sets, idx)])
    if isinstance(K, LinearImage):
        return vertex_set(K.body) @ K.matrix.T
    raise CapabilityError(f"vertex_set: {type(K).__name__} is not polytopal")


def to_vpolytope(K: Body) -> VPolytope:
    """The same body as a V-polytope (hull of :func:`vertex_set`)."""
    if isinstance(K, VPolytope):
        return K
    v = vertex_set(K)
    if K.dim == 1:
        r = float(np.max(np.abs(v)))
        return VPolytope(np.array([[-r], [r]]))
    return VPolytope(hull(v).vertices)
