"""Fourier-side checks with closed-form transforms.

Convention: F^(xi) = int F(x) exp(-2 pi i <x, xi>) dx, and
sinc(t) = sin(pi t) / (pi t) as in :func:`numpy.sinc`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np
from scipy.special import jv, sici

from .bodies import Body, EuclidBall, Interval, LinfSum, ball_volume
from .errors import CapabilityError, InputError
from .report import CheckReport

__all__ = [
    "QuadConfig", "Sinc2Product", "IndicatorFT", "Gaussian", "sinc2_integral", "rho_witness_check",
    "eta_cube_check", "poisson_check", "plancherel_check",
]


@dataclass(frozen=True)
class QuadConfig:
    """Composite Gauss-Legendre settings for improper 1-D integrals."""

    radius: float = 1000.0
    panel_width: float = 0.5
    order: int = 24
    radial_radius: float = 4000.0

    def nodes(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        panels = max(1, int(np.ceil((b - a) / self.panel_width)))
        edges = np.linspace(a, b, panels + 1)
        x, w = np.polynomial.legendre.leggauss(self.order)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _integrate(fn, a: float, b: float, quad: QuadConfig) -> float:
    x, w = quad.nodes(a, b)
    return float(np.dot(w, fn(x)))


def sinc2_integral(a: float = 1.0, quad: QuadConfig = QuadConfig()) -> float:
    """Integral over R of sinc(a x)^2 (exactly 1/a), by quadrature on [0, R] plus the closed tail.

    With b = pi a the tail is int_R^inf sin^2(bx)/x^2 = sin^2(bR)/R + b (pi/2 - Si(2bR)).
    """
    b = pi * a
    R = quad.radius
    head = _integrate(lambda x: np.sinc(a * x) ** 2, 0.0, R, quad)
    tail = (np.sin(b * R) ** 2 / R + b * (pi / 2 - sici(2 * b * R)[0])) / b ** 2
    return 2.0 * (head + tail)


# ---------------------------------------------------------------------------
# catalog functions with closed-form transforms


@dataclass(frozen=True)
class Sinc2Product:
    """prod_k sinc(x_k)^2; transform is the tent prod_k (1 - |xi_k|)_+."""

    n: int = 1

    separable = True
    integrable_transform = True

    def value(self, x):
        return np.prod(np.sinc(np.atleast_2d(x)) ** 2, axis=1)

    def transform(self, xi):
        return np.prod(np.maximum(1.0 - np.abs(np.atleast_2d(xi)), 0.0), axis=1)

    def value_1d(self, t):
        return np.sinc(t) ** 2

    def transform_1d(self, t):
        return np.maximum(1.0 - np.abs(t), 0.0)

    def lattice_tail_1d(self, R: int) -> float:
        # sin(pi m) = 0 at every nonzero integer, so nothing is truncated
        return 0.0

    def transform_tail_1d(self, R: int) -> float:
        return 0.0

    def l2_1d(self, quad: QuadConfig) -> tuple[float, float, float]:
        R = quad.radius
        head = 2.0 * _integrate(lambda x: np.sinc(x) ** 4, 0.0, R, quad)
        tail = 2.0 / (3.0 * pi ** 4 * R ** 3)  # bound on int_{|x|>R} sinc^4
        other = 2.0 * _integrate(lambda t: (1.0 - t) ** 2, 0.0, 1.0, quad)
        return head, other, tail

    def to_json(self):
        return {"fn": "sinc2", "dim": self.n}


@dataclass(frozen=True)
class Gaussian:
    """exp(-pi |x / s|^2); transform s^n exp(-pi s^2 |xi|^2). Self-dual at s = 1."""

    n: int = 1
    scale: float = 1.0

    separable = True
    integrable_transform = True

    def value(self, x):
        x = np.atleast_2d(x)
        return np.exp(-pi * np.sum(x * x, axis=1) / self.scale ** 2)

    def transform(self, xi):
        xi = np.atleast_2d(xi)
        return self.scale ** self.n * np.exp(-pi * self.scale ** 2 * np.sum(xi * xi, axis=1))

    def value_1d(self, t):
        return np.exp(-pi * t * t / self.scale ** 2)

    def transform_1d(self, t):
        return self.scale * np.exp(-pi * self.scale ** 2 * t * t)

    @staticmethod
    def _gauss_tail(c: float, R: int) -> float:
        # sum over |m| > R of exp(-c m^2), bounded by a geometric series
        q = np.exp(-c * (2 * R + 3))
        return float(2.0 * np.exp(-c * (R + 1) ** 2) / (1.0 - q))

    def lattice_tail_1d(self, R: int) -> float:
        return self._gauss_tail(pi / self.scale ** 2, R)

    def transform_tail_1d(self, R: int) -> float:
        return self.scale * self._gauss_tail(pi * self.scale ** 2, R)

    def l2_1d(self, quad: QuadConfig) -> tuple[float, float, float]:
        s = self.scale
        head = 2.0 * _integrate(lambda x: self.value_1d(x) ** 2, 0.0, 12.0 * s, quad)
        other = 2.0 * _integrate(lambda t: self.transform_1d(t) ** 2, 0.0, 12.0 / s, quad)
        return head, other, 0.0

    def to_json(self):
        return {"fn": "gaussian", "dim": self.n, "scale": self.scale}


@dataclass(frozen=True)
class IndicatorFT:
    """(1/vol K) int_K exp(2 pi i <x, xi>) dxi for K the cube [-1,1]^n or the unit ball.

    Cube: prod_k sinc(2 x_k). Ball: J_{n/2}(2 pi |x|) / (omega_n |x|^{n/2}).
    The transform is the indicator of K scaled by 1/vol K; F(0) = 1.
    """

    kind: str = "cube"
    n: int = 1

    integrable_transform = False

    def __post_init__(self):
        if self.kind not in ("cube", "ball"):
            raise CapabilityError(f"IndicatorFT: unsupported body {self.kind!r}")

    @property
    def separable(self) -> bool:
        return self.kind == "cube"

    @property
    def body_volume(self) -> float:
        return 2.0 ** self.n if self.kind == "cube" else ball_volume(self.n)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        h = self.n / 2
        safe = np.where(r == 0, 1.0, r)
        out = jv(h, 2 * pi * safe) / (ball_volume(self.n) * safe ** h)
        return np.where(r == 0, 1.0, out)

    def value(self, x):
        x = np.atleast_2d(x)
        if self.kind == "cube":
            return np.prod(np.sinc(2 * x), axis=1)
        return self.radial(np.linalg.norm(x, axis=1))

    def transform(self, xi):
        xi = np.atleast_2d(xi)
        inside = (np.max(np.abs(xi), axis=1) if self.kind == "cube" else np.linalg.norm(xi, axis=1)) <= 1
        return inside / self.body_volume

    def value_1d(self, t):
        return np.sinc(2 * t)

    def transform_1d(self, t):
        return (np.abs(t) <= 1) * 0.5

    def l2_1d(self, quad: QuadConfig) -> tuple[float, float, float]:
        head = sinc2_integral(2.0, quad)
        other = 2.0 * _integrate(lambda t: 0.25 * np.ones_like(t), 0.0, 1.0, quad)
        return head, other, 0.0

    def l2_radial(self, quad: QuadConfig) -> float:
        """int |F|^2 for the ball witness by radial quadrature plus the averaged asymptotic tail."""
        n, R = self.n, quad.radial_radius
        surf = 2 * pi ** (n / 2) / gamma(n / 2)
        head = surf * _integrate(lambda r: r ** (n - 1) * self.radial(r) ** 2, 0.0, R, quad)
        # J_h(z)^2 ~ (2 / (pi z)) cos^2(.) has mean 1 / (pi z); integrate that past R
        c = surf / (ball_volume(n) ** 2 * pi * 2 * pi)
        tail = c / R if n == 2 else c * R ** (2 - n) / (n - 2) if n > 2 else np.inf
        return head + tail

    def to_json(self):
        return {"fn": "indicator_ft", "body": self.kind, "dim": self.n}


CatalogFunction = Sinc2Product | Gaussian | IndicatorFT


# ---------------------------------------------------------------------------
# checks


def _witness_kind(K) -> tuple[str, int]:
    if isinstance(K, tuple):
        return K
    if isinstance(K, EuclidBall):
        return "ball", K.dim
    if isinstance(K, Interval) and K.halfwidth == 1.0:
        return "cube", 1
    if isinstance(K, LinfSum) and all(isinstance(p, Interval) and p.halfwidth == 1.0 for p in K.parts):
        return "cube", K.dim
    raise CapabilityError("rho witness: only the cube [-1,1]^n and the unit ball are supported")


def rho_witness_check(K, quad: QuadConfig = QuadConfig(), n: int | None = None) -> CheckReport:
    """int |F|^2 = 1/vol K for the witness F = (1/vol K) int_K exp(2 pi i x.xi) dxi.

    ``K`` is a body (cube or ball) or a name "cube"/"ball" with ``n``.
    lhs is the Plancherel value int_K (1/vol K)^2; rhs the target 1/vol K;
    the report also requires the direct quadrature of |F|^2 to agree
    (1e-6 for the cube, 1e-4 for radial ball quadrature).
    """
    kind, dim = (K, n) if isinstance(K, str) else _witness_kind(K)
    if dim is None or dim < 1:
        raise InputError("rho_witness_check: dimension required")
    if dim > 3:
        raise CapabilityError("rho_witness_check: quadrature paths support n <= 3")
    F = IndicatorFT(kind, dim)
    vol = F.body_volume
    plancherel = vol * (1.0 / vol) ** 2
    if kind == "cube":
        direct = sinc2_integral(2.0, quad) ** dim
        closed = 0.5 ** dim
        qtol = 1e-6
    else:
        if dim == 1:
            direct = sinc2_integral(2.0, quad)
        else:
            direct = F.l2_radial(quad)
        closed = None
        qtol = 1e-4
    target = 1.0 / vol
    agree = abs(direct - target) <= qtol * target and (closed is None or abs(closed - target) <= 1e-12)
    return CheckReport.compare(f"rho_witness_{kind}{dim}", plancherel, target, "=", 1e-6,
                               inputs=(F,), require=agree, note="" if agree else "quadrature disagrees",
                               details={"quadrature": direct, "closed_form": closed, "witness_at_0": 1.0})


def eta_cube_check(n: int, lattice_radius: int = 50, quad: QuadConfig = QuadConfig()) -> CheckReport:
    """Both halves of the cube case for eta with the witness prod sinc(x_k)^2.

    Upper half: int prod sinc^2 = 1 (closed form and quadrature). Lower half:
    the lattice sum over |m|_inf <= lattice_radius equals F(0) = 1 because
    every nonzero integer is a zero of sin(pi m).
    """
    if not 1 <= n <= 3:
        raise InputError("eta_cube_check: n must be in 1..3")
    if lattice_radius < 1:
        raise InputError("eta_cube_check: lattice_radius must be >= 1")
    quad_value = sinc2_integral(1.0, quad) ** n
    m = np.arange(-lattice_radius, lattice_radius + 1, dtype=float)
    terms = np.sinc(m) ** 2
    nonzero_max = float(np.max(np.abs(terms[m != 0])))
    lattice = float(np.sum(terms)) ** n
    upper_ok = abs(quad_value - 1.0) <= 1e-9
    return CheckReport.compare(f"eta_cube{n}", lattice, 1.0, "=", 1e-9, relative=False, require=upper_ok,
                               note="" if upper_ok else "integral of the witness is not 1",
                               details={"integral_quadrature": quad_value, "integral_closed": 1.0,
                                        "max_nonzero_term": nonzero_max, "eta_cube": 2.0 ** n / 2.0 ** n})


def _separable_sums(f, R: int) -> tuple[float, float, float]:
    m = np.arange(-R, R + 1, dtype=float)
    s_f = float(np.sum(f.value_1d(m)))
    s_t = float(np.sum(f.transform_1d(m)))
    n = f.n
    t_f, t_t = f.lattice_tail_1d(R), f.transform_tail_1d(R)
    bound = ((s_f + t_f) ** n - s_f ** n) + ((s_t + t_t) ** n - s_t ** n)
    return s_f ** n, s_t ** n, bound


def poisson_check(f, lattice_radius: int = 10) -> CheckReport:
    """sum_m f(m) = sum_m f^(m) over Z^n, truncated to |m|_inf <= lattice_radius.

    Passes when the difference is within the truncation tail bound + 1e-9.
    Indicator witnesses are rejected: their transforms jump on the lattice.
    """
    if isinstance(f, IndicatorFT) or not getattr(f, "integrable_transform", False):
        raise InputError("poisson_check: needs a function whose transform is continuous on the lattice")
    if lattice_radius < 1:
        raise InputError("poisson_check: lattice_radius must be >= 1")
    lhs, rhs, tail = _separable_sums(f, lattice_radius)
    return CheckReport.compare("poisson", abs(lhs - rhs), 0.0, "<=", tail + 1e-9, relative=False,
                               inputs=(f,), details={"function_side": lhs, "transform_side": rhs,
                                                     "tail_bound": tail, "lattice_radius": lattice_radius})


def plancherel_check(f, quad: QuadConfig = QuadConfig(), tol: float = 1e-6) -> CheckReport:
    """int |f|^2 = int |f^|^2 by quadrature on both sides (separable n-th powers)."""
    if isinstance(f, IndicatorFT) and f.kind == "ball":
        lhs = f.l2_radial(quad) if f.n > 1 else sinc2_integral(2.0, quad)
        rhs = 1.0 / f.body_volume
        return CheckReport.compare("plancherel", lhs, rhs, "=", tol, inputs=(f,))
    head, other, tail = f.l2_1d(quad)
    lhs, rhs = head ** f.n, other ** f.n
    return CheckReport.compare("plancherel", lhs, rhs, "=", tol, inputs=(f,),
                               details={"tail_bound_1d": tail})
