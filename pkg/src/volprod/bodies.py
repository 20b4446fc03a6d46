"""Origin-symmetric convex bodies.

A body is one of a small closed set of variants (Euclidean ball, interval,
V- and H-polytopes, zonotopes, l1/l-infinity sums, invertible linear images).
Support function, gauge and membership are computed by structural recursion
over the variant tree; every variant is vectorized over rows of an
``(m, n)`` array.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from math import gamma, pi
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import _hull
from .errors import InputError

SYMMETRY_TOL = 1e-12
DET_FLOOR = 1e-10


def _frozen_array(data, ndim: int, name: str) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if arr.ndim != ndim:
        raise InputError(f"{name}: expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: entries must be finite")
    arr.setflags(write=False)
    return arr


class Body:
    """Common surface of all body variants."""

    dim: int

    def _support(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _gauge(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({json.dumps(self.to_json())})"


@dataclass(frozen=True, eq=False, repr=False)
class EuclidBall(Body):
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InputError("EuclidBall: dim must be >= 1")

    def _support(self, y):
        return np.linalg.norm(y, axis=1)

    _gauge = _support

    def to_json(self):
        return {"kind": "ball", "dim": int(self.dim)}


@dataclass(frozen=True, eq=False, repr=False)
class Interval(Body):
    halfwidth: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.halfwidth) and self.halfwidth > 0):
            raise InputError("Interval: halfwidth must be positive")

    @property
    def dim(self) -> int:
        return 1

    def _support(self, y):
        return self.halfwidth * np.abs(y[:, 0])

    def _gauge(self, x):
        return np.abs(x[:, 0]) / self.halfwidth

    def to_json(self):
        return {"kind": "interval", "halfwidth": float(self.halfwidth)}


class _Polytopal(Body):
    """Variants with a finite facet/vertex description."""

    @property
    def facets(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def extreme_points(self) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def vertex_hull(self) -> _hull.HullResult:
        """Hull of the extreme points (triangulation used for volumes and moments)."""
        return _hull.hull(self.extreme_points)

    def _gauge(self, x):
        return np.maximum(np.max(x @ self.facets.T, axis=1), 0.0)


@dataclass(frozen=True, eq=False, repr=False)
class VPolytope(_Polytopal):
    """Convex hull of a vertex set that is closed under negation."""

    vertices: np.ndarray

    def __post_init__(self):
        v = _frozen_array(self.vertices, 2, "VPolytope.vertices")
        object.__setattr__(self, "vertices", v)
        scale = max(1.0, float(np.max(np.abs(v))))
        for row in v:
            if np.min(np.max(np.abs(v + row), axis=1)) > SYMMETRY_TOL * scale:
                raise InputError(f"VPolytope: vertex {row.tolist()} has no negation in the vertex set")
        rank = np.linalg.matrix_rank(v)
        if rank < v.shape[1]:
            raise InputError(f"VPolytope: vertices span rank {rank} < dimension {v.shape[1]}")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @cached_property
    def _hull(self) -> _hull.HullResult:
        return _hull.hull(self.vertices)

    @property
    def facets(self):
        return self._hull.facets

    @property
    def extreme_points(self):
        return self._hull.vertices

    @property
    def vertex_hull(self):
        return self._hull

    def _support(self, y):
        return np.maximum(np.max(y @ self.vertices.T, axis=1), 0.0)

    def to_json(self):
        return {"kind": "vpolytope", "vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class HPolytope(_Polytopal):
    """The slab intersection {x : |<u_i, x>| <= 1 for all i}."""

    normals: np.ndarray

    def __post_init__(self):
        u = _frozen_array(self.normals, 2, "HPolytope.normals")
        object.__setattr__(self, "normals", u)
        if np.any(np.linalg.norm(u, axis=1) == 0):
            raise InputError("HPolytope: zero normal")
        rank = np.linalg.matrix_rank(u)
        if rank < u.shape[1]:
            raise InputError(f"HPolytope: normals span rank {rank} < dimension {u.shape[1]}; body is unbounded")

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    @cached_property
    def facets(self):
        return _hull.symmetric_closure(self.normals)

    @cached_property
    def extreme_points(self):
        # vertices of the slab body are the facets of its polar conv(+-u)
        return _hull.hull(self.facets).facets

    def _gauge(self, x):
        return np.max(np.abs(x @ self.normals.T), axis=1)

    def _support(self, y):
        return np.maximum(np.max(y @ self.extreme_points.T, axis=1), 0.0)

    def to_json(self):
        return {"kind": "hpolytope", "normals": self.normals.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class Zonotope(_Polytopal):
    """Minkowski sum of segments [-v_i, v_i]."""

    generators: np.ndarray

    def __post_init__(self):
        g = _frozen_array(self.generators, 2, "Zonotope.generators")
        object.__setattr__(self, "generators", g)
        if len(g) == 0:
            raise InputError("Zonotope: at least one generator required")
        if np.any(np.linalg.norm(g, axis=1) == 0):
            raise InputError("Zonotope: zero generator")
        rank = np.linalg.matrix_rank(g)
        if rank < g.shape[1]:
            raise InputError(f"Zonotope: generators span rank {rank} < dimension {g.shape[1]}")

    @property
    def dim(self) -> int:
        return self.generators.shape[1]

    @cached_property
    def facets(self):
        return _hull.zonotope_facets(self.generators)

    @cached_property
    def extreme_points(self):
        return _hull.hull(self.facets).facets

    def _support(self, y):
        return np.sum(np.abs(y @ self.generators.T), axis=1)

    def to_json(self):
        return {"kind": "zonotope", "generators": self.generators.tolist()}


class _Sum(Body):
    parts: tuple

    def _init_parts(self):
        parts = tuple(self.parts)
        if len(parts) == 0:
            raise InputError(f"{type(self).__name__}: needs at least one part")
        for p in parts:
            if not isinstance(p, Body):
                raise InputError(f"{type(self).__name__}: parts must be bodies")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    @cached_property
    def blocks(self) -> tuple:
        out, start = [], 0
        for p in self.parts:
            out.append(slice(start, start + p.dim))
            start += p.dim
        return tuple(out)

    def _per_part(self, method: str, z: np.ndarray) -> np.ndarray:
        return np.stack([getattr(p, method)(z[:, b]) for p, b in zip(self.parts, self.blocks)])


@dataclass(frozen=True, eq=False, repr=False)
class L1Sum(_Sum):
    """Unit ball of the norm sum_j ||x_j||_{K_j} (convex hull of the parts)."""

    parts: tuple

    def __post_init__(self):
        self._init_parts()

    def _gauge(self, x):
        return self._per_part("_gauge", x).sum(axis=0)

    def _support(self, y):
        return self._per_part("_support", y).max(axis=0)

    def to_json(self):
        return {"kind": "l1sum", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False, repr=False)
class LinfSum(_Sum):
    """Cartesian product of the parts: gauge is the max of block gauges."""

    parts: tuple

    def __post_init__(self):
        self._init_parts()

    def _gauge(self, x):
        return self._per_part("_gauge", x).max(axis=0)

    def _support(self, y):
        return self._per_part("_support", y).sum(axis=0)

    def to_json(self):
        return {"kind": "linfsum", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False, repr=False)
class LinearImage(Body):
    """T(K) for an invertible matrix T."""

    matrix: np.ndarray
    body: Body

    def __post_init__(self):
        t = _frozen_array(self.matrix, 2, "LinearImage.matrix")
        object.__setattr__(self, "matrix", t)
        if not isinstance(self.body, Body):
            raise InputError("LinearImage: body must be a Body")
        if t.shape != (self.body.dim, self.body.dim):
            raise InputError(f"LinearImage: matrix shape {t.shape} does not match body dimension {self.body.dim}")
        if abs(np.linalg.det(t)) < DET_FLOOR:
            raise InputError(f"LinearImage: |det| = {abs(np.linalg.det(t)):.3g} below {DET_FLOOR}")

    @property
    def dim(self) -> int:
        return self.body.dim

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def _gauge(self, x):
        return self.body._gauge(x @ self.inverse.T)

    def _support(self, y):
        return self.body._support(y @ self.matrix)

    def to_json(self):
        return {"kind": "linear", "matrix": self.matrix.tolist(), "body": self.body.to_json()}


ConvexBody = Union[EuclidBall, Interval, VPolytope, HPolytope, Zonotope, L1Sum, LinfSum, LinearImage]
POLYTOPAL = (VPolytope, HPolytope, Zonotope)


# ---------------------------------------------------------------------------
# evaluation


def _as_rows(K: Body, v, name: str):
    arr = np.asarray(v, dtype=float)
    single = arr.ndim == 1
    rows = np.atleast_2d(arr)
    if rows.ndim != 2 or rows.shape[1] != K.dim:
        raise InputError(f"{name}: vector dimension {rows.shape[-1]} does not match body dimension {K.dim}")
    if not np.all(np.isfinite(rows)):
        raise InputError(f"{name}: vector entries must be finite")
    return rows, single


def support(K: Body, y):
    """h_K(y) = sup{<x, y> : x in K}. Accepts a vector or an (m, n) array."""
    rows, single = _as_rows(K, y, "support")
    out = K._support(rows)
    return float(out[0]) if single else out


def gauge(K: Body, x):
    """||x||_K = inf{t > 0 : x in tK}. Accepts a vector or an (m, n) array."""
    rows, single = _as_rows(K, x, "gauge")
    out = K._gauge(rows)
    return float(out[0]) if single else out


def member(K: Body, x, tol: float = 0.0):
    if tol < 0:
        raise InputError("member: tol must be nonnegative")
    g = gauge(K, x)
    return bool(g <= 1.0 + tol) if np.ndim(g) == 0 else g <= 1.0 + tol


def ball_volume(n: int) -> float:
    """Volume of the unit Euclidean ball in R^n."""
    return pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} (= n * ball_volume(n))."""
    return n * ball_volume(n)


# ---------------------------------------------------------------------------
# zonotope measure


@dataclass(frozen=True, eq=False)
class BodyMeasure:
    """Discrete even measure on the sphere: atoms ``directions[i]`` with ``weights[i]``."""

    directions: np.ndarray
    weights: np.ndarray

    def support(self, y) -> np.ndarray:
        """Half the integral of |<u, y>| against the measure."""
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return 0.5 * np.abs(y @ self.directions.T) @ self.weights


def zonotope_measure(Z: Zonotope) -> BodyMeasure:
    """Atoms (+-v_i/|v_i|, |v_i|), listed in generator order with + before -."""
    if not isinstance(Z, Zonotope):
        raise InputError("zonotope_measure: expected a Zonotope")
    norms = np.linalg.norm(Z.generators, axis=1)
    units = Z.generators / norms[:, None]
    directions = np.empty((2 * len(units), Z.dim))
    directions[0::2] = units
    directions[1::2] = -units
    return BodyMeasure(directions, np.repeat(norms, 2))


# ---------------------------------------------------------------------------
# JSON


def body_from_json(obj) -> Body:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError("body JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "ball":
            return EuclidBall(int(obj["dim"]))
        if kind == "interval":
            return Interval(float(obj.get("halfwidth", 1.0)))
        if kind == "vpolytope":
            return VPolytope(obj["vertices"])
        if kind == "hpolytope":
            return HPolytope(obj["normals"])
        if kind == "zonotope":
            return Zonotope(obj["generators"])
        if kind in ("l1sum", "linfsum"):
            parts = tuple(body_from_json(p) for p in obj["parts"])
            return L1Sum(parts) if kind == "l1sum" else LinfSum(parts)
        if kind == "linear":
            return LinearImage(obj["matrix"], body_from_json(obj["body"]))
    except KeyError as exc:
        raise InputError(f"body JSON of kind {kind!r} is missing field {exc.args[0]!r}") from exc
    raise InputError(f"unknown body kind {kind!r}")


def body_to_json(K: Body) -> dict:
    return K.to_json()


def load_body(path) -> Body:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return body_from_json(obj)


# ---------------------------------------------------------------------------
# catalog


def ball(n: int) -> EuclidBall:
    return EuclidBall(n)


def interval(a: float = 1.0) -> Interval:
    return Interval(a)


def cube(n: int, a: float = 1.0) -> Body:
    """[-a, a]^n as an l-infinity sum of intervals."""
    return Interval(a) if n == 1 else LinfSum(tuple(Interval(a) for _ in range(n)))


def cross_polytope(n: int) -> Body:
    """The l1 unit ball B_1^n."""
    return Interval(1.0) if n == 1 else L1Sum(tuple(Interval(1.0) for _ in range(n)))


def cube_vpolytope(n: int) -> VPolytope:
    import itertools

    return VPolytope(np.array(list(itertools.product((-1.0, 1.0), repeat=n))))


def double_cone() -> L1Sum:
    """sqrt(x1^2 + x2^2) + |x3| <= 1."""
    return L1Sum((EuclidBall(2), Interval(1.0)))


def cylinder() -> LinfSum:
    return LinfSum((EuclidBall(2), Interval(1.0)))


def square_pyramid() -> L1Sum:
    """conv(+-e3, [-1, 1]^2 x {0})."""
    return L1Sum((cube(2), Interval(1.0)))


def hexagon() -> Zonotope:
    return Zonotope([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def catalog() -> dict[str, Body]:
    """Named bodies used by the property suites."""
    return {
        "interval": Interval(1.5),
        "ball2": EuclidBall(2),
        "ball3": EuclidBall(3),
        "ball4": EuclidBall(4),
        "square": cube(2),
        "cube3": cube(3),
        "diamond": cross_polytope(2),
        "octahedron": cross_polytope(3),
        "cube3_v": cube_vpolytope(3),
        "slab2": HPolytope([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]),
        "hexagon": hexagon(),
        "octagon": Zonotope([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]),
        "double_cone": double_cone(),
        "cylinder": cylinder(),
        "square_pyramid": square_pyramid(),
        "ellipse": LinearImage([[2.0, 0.5], [0.0, 0.5]], EuclidBall(2)),
        "rotated_square": LinearImage(rotation(np.pi / 6), cube(2)),
        "zono3": Zonotope([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]]),
    }


def random_unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_zonotope(rng: np.random.Generator, n: int, g: int) -> Zonotope:
    while True:
        gens = rng.standard_normal((g, n))
        if np.linalg.matrix_rank(gens) == n and np.min(np.linalg.svd(gens, compute_uv=False)) > 1e-3:
            return Zonotope(gens)


def random_vpolytope(rng: np.random.Generator, n: int, pairs: int) -> VPolytope:
    while True:
        pts = rng.standard_normal((pairs, n))
        if np.linalg.matrix_rank(pts) == n:
            return VPolytope(np.vstack([pts, -pts]))


def random_matrix(rng: np.random.Generator, n: int, cond_max: float = 20.0) -> np.ndarray:
    while True:
        t = rng.standard_normal((n, n))
        if np.linalg.cond(t) < cond_max:
            return t


def vectors(data: Sequence[Sequence[float]]) -> np.ndarray:
    return np.asarray(data, dtype=float)
