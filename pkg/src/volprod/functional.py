"""Polars of even functions on grids and the functional inequalities built on them.

The polar of f is f°(x) = inf_y exp(-<x, y>) / f(y) = exp(-phi*(x)) with
phi = -log f and phi* its Legendre transform. On a grid the sup defining
phi* runs over grid nodes; nodes where f = 0 (phi = +inf) drop out.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial, gamma, pi, sqrt
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from ._random import make_rng
from .bodies import Body, EuclidBall, ball_volume, body_from_json, gauge, support
from .errors import InputError, PreconditionError
from .report import CheckReport, McEstimate

__all__ = [
    "GridFunction", "PolarTransformResult", "default_points", "polar_function", "involution_check",
    "functional_santalo_check", "santalo_reduction_check", "second_moment", "ball_inequality_check",
    "functional_ball_check", "lemma52_check", "second_moment_profiles",
]

GRID_EQ_TOL = 1e-3
EXACT_TOL = 1e-7
TAIL_LIMIT = 1e-4
_CHUNK = 1 << 22


def default_points(dim: int) -> int:
    return 257 if dim <= 2 else 65


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Nonnegative even function sampled on the grid x = (i - c) h covering [-L, L]^n.

    ``values`` has shape (m,) * dim; ``tag`` names the analytic form, if any.
    """

    dim: int
    extent: float
    m: int
    values: np.ndarray
    tag: Optional[dict] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("GridFunction: dim must be >= 1")
        if self.m < 3 or self.m % 2 == 0:
            raise InputError("GridFunction: m must be an odd integer >= 3")
        if not self.extent > 0:
            raise InputError("GridFunction: extent must be positive")
        v = np.array(self.values, dtype=float).reshape((self.m,) * self.dim)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InputError("GridFunction: values must be finite and nonnegative")
        if not np.array_equal(v, np.flip(v)):
            raise InputError("GridFunction: values are not even (f(x) != f(-x) on the grid)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def h(self) -> float:
        return 2.0 * self.extent / (self.m - 1)

    @property
    def axis(self) -> np.ndarray:
        c = (self.m - 1) // 2
        return (np.arange(self.m) - c) * self.h

    def points(self) -> np.ndarray:
        grids = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    def _weights_1d(self) -> np.ndarray:
        w = np.full(self.m, self.h)
        w[[0, -1]] *= 0.5
        return w

    def integral(self, values: Optional[np.ndarray] = None, axis_weight: Optional[tuple] = None) -> float:
        """Trapezoid-rule integral of ``values`` (default: f), optionally times x_i^p on one axis."""
        v = self.values if values is None else values
        w = self._weights_1d()
        out = v
        for k in range(self.dim):
            wk = w
            if axis_weight is not None and axis_weight[0] == k:
                wk = w * self.axis ** axis_weight[1]
            out = np.tensordot(out, wk, axes=([0], [0]))
        return float(out)

    def boundary_mass(self) -> float:
        """Trapezoid mass carried by the outermost layer of nodes."""
        shell = np.zeros_like(self.values, dtype=bool)
        for k in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[k] = [0, -1]
            shell[tuple(idx)] = True
        return self.integral(np.where(shell, self.values, 0.0))

    def with_values(self, values: np.ndarray, tag: Optional[dict] = None) -> "GridFunction":
        return GridFunction(self.dim, self.extent, self.m, values, tag)

    def to_json(self) -> dict:
        return {"dim": self.dim, "extent": self.extent, "m": self.m, "tag": self.tag,
                "values": self.values.reshape(-1).tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        try:
            return cls(int(obj["dim"]), float(obj["extent"]), int(obj["m"]),
                       np.asarray(obj["values"], dtype=float), obj.get("tag"))
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"GridFunction JSON: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "GridFunction":
        return cls.from_json(json.loads(Path(path).read_text()))

    # constructors

    @classmethod
    def _from_fn(cls, dim, extent, m, fn, tag):
        m = default_points(dim) if m is None else m
        proto = cls(dim, extent, m, np.ones((m,) * dim))
        v = fn(proto.points()).reshape((m,) * dim)
        v = 0.5 * (v + np.flip(v))
        return cls(dim, extent, m, v, tag)

    @classmethod
    def gaussian(cls, dim: int, a: float = 0.5, extent: float = 8.0, m: Optional[int] = None) -> "GridFunction":
        """exp(-a |x|^2)."""
        if not a > 0:
            raise InputError("gaussian: a must be positive")
        return cls._from_fn(dim, extent, m, lambda x: np.exp(-a * np.sum(x * x, axis=1)),
                            {"kind": "gaussian", "a": a})

    @classmethod
    def indicator(cls, body: Body, extent: float = 8.0, m: Optional[int] = None) -> "GridFunction":
        return cls._from_fn(body.dim, extent, m, lambda x: (gauge(body, x) <= 1.0 + 1e-12).astype(float),
                            {"kind": "indicator", "body": body.to_json()})

    @classmethod
    def exp_neg_gauge(cls, body: Body, extent: float = 8.0, m: Optional[int] = None) -> "GridFunction":
        """exp(-||x||_K)."""
        return cls._from_fn(body.dim, extent, m, lambda x: np.exp(-gauge(body, x)),
                            {"kind": "exp_neg_gauge", "body": body.to_json()})


@dataclass(frozen=True, eq=False)
class PolarTransformResult:
    polar: GridFunction
    sup_error_vs_analytic: Optional[float] = None
    details: dict = field(default_factory=dict)


def _legendre_axis(G: np.ndarray, axis: int, xs: np.ndarray) -> np.ndarray:
    """out[..., i, ...] = max_j (xs[i] * xs[j] + G[..., j, ...]) along one axis."""
    moved = np.moveaxis(G, axis, -1)
    shape = moved.shape
    rows = moved.reshape(-1, shape[-1])
    m = len(xs)
    out = np.empty_like(rows)
    chunk = max(1, _CHUNK // max(1, rows.shape[0] * m))
    for start in range(0, m, chunk):
        stop = min(m, start + chunk)
        prod = xs[start:stop, None] * xs[None, :]  # (c, m)
        out[:, start:stop] = np.max(rows[:, None, :] + prod[None, :, :], axis=2)
    return np.moveaxis(out.reshape(shape), -1, axis)


def _analytic_polar(f: GridFunction):
    tag = f.tag or {}
    kind = tag.get("kind")
    if kind == "gaussian":
        a = float(tag["a"])
        return lambda x: np.exp(-np.sum(x * x, axis=1) / (4.0 * a))
    if kind == "indicator":
        body = body_from_json(tag["body"])
        return lambda x: np.exp(-support(body, x))
    return None


def polar_function(f: GridFunction) -> PolarTransformResult:
    """Grid polar f° = exp(-phi*) computed by a nested one-axis-at-a-time discrete sup.

    sup_y (<x,y> - phi(y)) = sup_{y_1} (x_1 y_1 + sup_{y_2} (x_2 y_2 + ...)),
    so n one-dimensional transforms give the exact grid sup for any phi.
    """
    if not np.any(f.values > 0):
        raise InputError("polar_function: input is identically zero")
    with np.errstate(divide="ignore"):
        G = np.log(f.values)  # -phi, -inf off the support
    xs = f.axis
    for k in range(f.dim):
        G = _legendre_axis(G, k, xs)
    values = np.exp(-G)
    values = 0.5 * (values + np.flip(values))
    tag = None
    if f.tag and f.tag.get("kind") == "gaussian":
        tag = {"kind": "gaussian", "a": 1.0 / (4.0 * float(f.tag["a"]))}
    elif f.tag and f.tag.get("kind") == "indicator":
        from .duality import polar as polar_body
        tag = {"kind": "exp_neg_gauge", "body": polar_body(body_from_json(f.tag["body"])).to_json()}
    out = f.with_values(values, tag)
    exact = _analytic_polar(f)
    err = None
    if exact is not None:
        err = float(np.max(np.abs(values.reshape(-1) - exact(f.points()))))
    return PolarTransformResult(out, err, {"h": f.h})


def _log_concavity_violation(f: GridFunction):
    """First axis-direction midpoint triple where -log f fails to be convex."""
    with np.errstate(divide="ignore"):
        phi = -np.log(f.values)
    for k in range(f.dim):
        p = np.moveaxis(phi, k, 0)
        a, b, c = p[:-2], p[1:-1], p[2:]
        finite = np.isfinite(a) & np.isfinite(b) & np.isfinite(c)
        # a zero inside the support also breaks log-concavity
        hole = np.isinf(b) & np.isfinite(a) & np.isfinite(c)
        bad = (finite & (b > 0.5 * (a + c) + 1e-9 * (1 + np.abs(b)))) | hole
        if np.any(bad):
            return k, np.argwhere(bad)[0]
    return None


def involution_check(f: GridFunction) -> CheckReport:
    """sup |f - f°°| over nodes with f > 1e-12, against 5 h max f."""
    bad = _log_concavity_violation(f)
    if bad is not None:
        raise PreconditionError(f"involution_check: f is not log-concave along axis {bad[0]} near index {bad[1].tolist()}")
    ff = polar_function(polar_function(f).polar).polar
    mask = f.values > 1e-12
    dist = float(np.max(np.abs(f.values - ff.values)[mask]))
    bound = 5.0 * f.h * float(f.values.max())
    return CheckReport.compare("involution", dist, 0.0, "<=", bound, relative=False,
                               details={"h": f.h, "tag": f.tag})


def functional_santalo_check(f: GridFunction) -> CheckReport:
    """(int f)(int f°) <= (2 pi)^n, equality flagged at 1e-3 relative."""
    pol = polar_function(f).polar
    for name, g in (("f", f), ("polar", pol)):
        total = g.integral()
        if total <= 0:
            raise InputError(f"functional_santalo_check: {name} has zero mass on the grid")
        frac = g.boundary_mass() / total
        if frac > TAIL_LIMIT:
            raise InputError(f"functional_santalo_check: extent too small ({name} boundary mass fraction {frac:.2e})")
    a, b = f.integral(), pol.integral()
    return CheckReport.compare("functional_santalo", a * b, (2 * pi) ** f.dim, "<=", GRID_EQ_TOL,
                               details={"integral_f": a, "integral_polar": b, "h": f.h, "tag": f.tag})


def _unconditional_grid(f: GridFunction) -> bool:
    return all(np.array_equal(f.values, np.flip(f.values, axis=k)) for k in range(f.dim))


def functional_ball_check(f: GridFunction) -> CheckReport:
    """sum_i (int x_i^2 f)(int y_i^2 f°) <= n (2 pi)^n for unconditional f."""
    if not _unconditional_grid(f):
        raise PreconditionError("functional_ball_check: grid values are not invariant under coordinate sign flips")
    pol = polar_function(f).polar
    terms = [f.integral(axis_weight=(i, 2)) * pol.integral(axis_weight=(i, 2)) for i in range(f.dim)]
    n = f.dim
    return CheckReport.compare("functional_ball", float(sum(terms)), n * (2 * pi) ** n, "<=", GRID_EQ_TOL,
                               details={"terms": terms, "h": f.h, "tag": f.tag,
                                        "equality_condition": "c exp(-|Tx|^2) with T diagonal"})


# ---------------------------------------------------------------------------
# bodies: the Gaussian-gauge reduction and the second-moment inequality


def santalo_reduction_check(K: Body, samples: int = 200_000, seed: int = 0) -> CheckReport:
    """int exp(-||x||_K^2 / 2) dx = c_n vol K with c_n = (2 pi)^{n/2} / omega_n.

    The integral is estimated by importance sampling from N(0, s^2 I) with
    s = sqrt(n) max_i h_K(e_i), which bounds the circumradius so the weights
    stay bounded. The report also requires (2 pi)^n / c_n^2 = omega_n^2 and
    P(K) <= omega_n^2, the body inequality that the functional one implies.
    """
    from .products import mahler_estimate
    from .volume import volume

    n = K.dim
    if samples < 1000:
        raise InputError("santalo_reduction_check: samples must be >= 1000")
    s = sqrt(n) * float(np.max(support(K, np.eye(n))))
    z = make_rng(seed, "santalo_reduction").standard_normal((samples, n)) * s
    g = gauge(K, z)
    logw = -0.5 * g * g + 0.5 * np.sum(z * z, axis=1) / s ** 2 + 0.5 * n * np.log(2 * pi * s * s)
    w = np.exp(logw)
    est = float(w.mean())
    err = float(w.std(ddof=1)) / sqrt(samples)
    c_n = (2 * pi) ** (n / 2) / ball_volume(n)
    vol = volume(K)
    p = mahler_estimate(K, "auto", samples, seed)
    implied = (2 * pi) ** n / c_n ** 2
    ok = abs(implied - ball_volume(n) ** 2) <= 1e-12 * implied and p.value <= implied * (1 + EXACT_TOL) + 4 * p.std_error
    band = max(4.0 * err, 1e-12 * c_n * vol)
    return CheckReport.compare("santalo_reduction", est, c_n * vol, "=", band, relative=False,
                               inputs=(K,), seed=seed, samples=samples, require=ok,
                               details={"c_n": c_n, "volume": vol, "mahler": p.value, "implied_upper": implied})


def second_moment(K: Body, axis: int, samples: int = 200_000, seed: int = 0) -> McEstimate:
    """int_K x_axis^2 dx; exact for every variant with an exact moment path, MC otherwise."""
    from .errors import CapabilityError
    from .volume import moment, moment_mc

    if not 0 <= axis < K.dim:
        raise InputError("second_moment: axis out of range")
    e = np.eye(K.dim)[axis]
    try:
        return McEstimate.exact(moment(K, e, 2))
    except CapabilityError:
        return moment_mc(K, e, 2, samples, seed)


def ball_inequality_check(K: Body, samples: int = 200_000, seed: int = 0) -> CheckReport:
    """int_K int_K* <x,y>^2 <= n omega_n^2 / (n+2)^2 for unconditional K.

    The left side uses the coordinate expansion sum_i (int_K x_i^2)(int_K* y_i^2);
    the vanishing of the mixed terms int x_i x_j on K and K* is checked by
    MC (within 4 sigma of 0) and required for a pass.
    """
    from .duality import polar
    from .perturb import is_unconditional
    from .volume import integral_mc

    n = K.dim
    if n < 2:
        raise InputError("ball_inequality_check: dimension must be >= 2")
    if not is_unconditional(K):
        raise PreconditionError("ball_inequality_check: body is not unconditional")
    Kp = polar(K)
    terms, errs = [], []
    for i in range(n):
        a, b = second_moment(K, i, samples, seed + 2 * i), second_moment(Kp, i, samples, seed + 2 * i + 1)
        terms.append(a.value * b.value)
        errs.append(sqrt((a.value * b.std_error) ** 2 + (b.value * a.std_error) ** 2))
    cross = []
    cross_ok = True
    for body, label in ((K, "K"), (Kp, "K*")):
        for i in range(n):
            for j in range(i + 1, n):
                est = integral_mc(body, lambda y, i=i, j=j: y[:, i] * y[:, j], samples, seed,
                                  key=f"cross-{label}-{i}-{j}")
                ok = abs(est.value) <= 4.0 * est.std_error + 1e-12
                cross_ok &= ok
                cross.append({"body": label, "i": i, "j": j, "value": est.value, "std_error": est.std_error, "ok": ok})
    lhs = float(sum(terms))
    err = float(sqrt(sum(e * e for e in errs)))
    rhs = n * ball_volume(n) ** 2 / (n + 2) ** 2
    details = {"terms": terms, "cross_terms": cross}
    if err == 0:
        return CheckReport.compare("ball_inequality", lhs, rhs, "<=", EXACT_TOL, inputs=(K,), seed=seed,
                                   samples=samples, require=cross_ok, details=details)
    return CheckReport.compare("ball_inequality", lhs, rhs, "<=", 4.0 * err, relative=False, inputs=(K,),
                               seed=seed, samples=samples, require=cross_ok, details=details)


# ---------------------------------------------------------------------------
# the three-function lemma


def lemma52_check(f1: Callable, f2: Callable, f3: Callable, sample_pairs: int = 10_000, seed: int = 0,
                  r_max: float = 4.0, upper: float = np.inf) -> CheckReport:
    """Hypothesis f1(r) f2(s) <= f3(sqrt(rs))^2 on seeded pairs in [0, r_max]^2,
    conclusion (int f1)(int f2) <= (int f3)^2 over [0, upper).

    A violated hypothesis fails the report (note "hypothesis violated") but
    the conclusion is still computed.
    """
    if sample_pairs < 1:
        raise InputError("lemma52_check: sample_pairs must be positive")
    rs = make_rng(seed, "lemma52").uniform(0.0, r_max, size=(sample_pairs, 2))
    worst = 0.0
    for r, s in rs:
        gap = f1(r) * f2(s) - f3(sqrt(r * s)) ** 2
        worst = max(worst, gap)
    hyp_ok = worst <= 1e-12
    kw = dict(limit=400, epsabs=1e-13, epsrel=1e-12)
    i1, i2, i3 = (quad(g, 0.0, upper, **kw)[0] for g in (f1, f2, f3))
    return CheckReport.compare("lemma52", i1 * i2, i3 ** 2, "<=", 1e-9, seed=seed, samples=sample_pairs,
                               require=hyp_ok, note="" if hyp_ok else "hypothesis violated",
                               details={"max_hypothesis_gap": worst, "integrals": [i1, i2, i3]})


def second_moment_profiles(K: Body):
    """(f1, f2, f3, upper) for the second-moment argument on the ball or the cube.

    f1(r) = r^2 g_K(r) and f2(s) = s^2 g_K*(s) with g the slice volume at
    x_1 = r; f3(t) = omega_{n-1} t^2 (1 - t^2)^{(n-1)/2} on [0, 1], whose
    integral is omega_n / (2 (n + 2)).
    """
    from .bodies import LinfSum, Interval

    n = K.dim
    if n < 2:
        raise InputError("second_moment_profiles: dimension must be >= 2")
    w = ball_volume(n - 1)

    def f3(t):
        return w * t * t * (1 - t * t) ** ((n - 1) / 2) if 0 <= t <= 1 else 0.0

    if isinstance(K, EuclidBall):
        f1 = f2 = f3
    elif isinstance(K, LinfSum) and all(isinstance(p, Interval) and p.halfwidth == 1.0 for p in K.parts):
        def f1(r):
            return r * r * 2.0 ** (n - 1) if 0 <= r <= 1 else 0.0

        def f2(s):
            return s * s * 2.0 ** (n - 1) / factorial(n - 1) * (1 - s) ** (n - 1) if 0 <= s <= 1 else 0.0
    else:
        raise InputError("second_moment_profiles: closed-form slices only for the ball and the cube")
    return f1, f2, f3, 1.0
