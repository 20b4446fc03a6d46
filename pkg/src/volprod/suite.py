"""The bundled acceptance suite behind ``vp paper-suite``."""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial, pi

import numpy as np

from . import bodies as B
from . import functional as F
from . import harmonic as H
from . import perturb as P
from . import products as PR
from ._random import make_rng
from .duality import bipolar_check, polar
from .report import CheckReport
from .volume import volume

__all__ = ["CRITERIA", "Criterion", "paper_suite", "property_violations", "random_bodies"]


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    reports: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def _eq(name, lhs, rhs, tol, relative=True, **kw):
    return CheckReport.compare(name, lhs, rhs, "=", tol, relative=relative, **kw)


def c01(seed, quick):
    out = []
    for n in range(1, 5):
        target = 4.0 ** n / factorial(n)
        out.append(_eq(f"P(cube{n})", PR.mahler(B.cube(n)), target, 1e-9))
        out.append(_eq(f"P(cross{n})", PR.mahler(B.cross_polytope(n)), target, 1e-9))
    return out


def c02(seed, quick):
    out = []
    for n, target in ((2, pi ** 2), (3, (4 * pi / 3) ** 2)):
        K = B.ball(n)
        out.append(_eq(f"P(ball{n})", PR.mahler(K), target, 1e-9))
        upper, _ = PR.santalo_check(K)
        out.append(CheckReport.compare(f"santalo_upper_equality_ball{n}", upper.lhs, upper.rhs, "<=",
                                       upper.tolerance, require=upper.equal))
    return out


LEMMA35_CASES = (
    ("disk", B.ball(2), (1.0, 0.0), 4.0 / 3.0, pi ** 2 / 6, False),
    ("diamond", B.cross_polytope(2), (0.0, 1.0), 2.0 / 3.0, 2.0 / 3.0, True),
    ("double_cone", B.double_cone(), (0.0, 0.0, 1.0), pi / 6, pi / 6, True),
    ("square_pyramid", B.square_pyramid(), (0.0, 0.0, 1.0), 2.0 / 3.0, 2.0 / 3.0, True),
)


def c03(seed, quick):
    samples = 40_000 if quick else 400_000
    out = []
    for label, K, x, lhs, rhs, equal in LEMMA35_CASES:
        rep = PR.lemma35_check(K, x)
        ok = abs(rep.lhs - lhs) <= 1e-7 * lhs and abs(rep.rhs - rhs) <= 1e-7 * rhs and rep.equal == equal
        out.append(CheckReport.compare(f"lemma35_{label}", rep.lhs, rep.rhs, "<=", 1e-7, require=ok))
        mc = PR.lemma35_check(K, x, samples, seed, method="mc")
        out.append(mc.__class__.compare(f"lemma35_{label}_mc", mc.lhs, mc.rhs, "<=", mc.tolerance,
                                        relative=False, seed=seed, samples=samples))
    return out


def c04(seed, quick):
    Z = B.Zonotope(np.eye(2))
    rep = PR.lemma33_identity(Z)
    samples = 40_000 if quick else 400_000
    mc = PR.lemma33_identity(Z, samples, seed, method="mc")
    return [_eq("lemma33_lhs", rep.lhs, 32.0, 1e-7), _eq("lemma33_rhs", rep.rhs, 32.0, 1e-7),
            CheckReport.compare("lemma33_mc", mc.lhs, 32.0, "=", mc.tolerance, relative=False,
                                seed=seed, samples=samples)]


def c05(seed, quick):
    a = PR.lemma34_check(lambda t: max(1.0 - t, 0.0), 1.0, 1.0)
    b = PR.lemma34_check(lambda t: max(1.0 - t * t, 0.0), 1.0, 1.0)
    return [_eq("lemma34_tent_lhs", a.lhs, 1 / 6, 1e-9, relative=False),
            CheckReport.compare("lemma34_tent", a.lhs, a.rhs, "<=", 1e-9, relative=False, require=a.equal),
            _eq("lemma34_quad_lhs", b.lhs, 0.25, 1e-9, relative=False),
            _eq("lemma34_quad_rhs", b.rhs, 8 / 27, 1e-9, relative=False),
            CheckReport.compare("lemma34_quad", b.lhs, b.rhs, "<=", 1e-9, relative=False, require=not b.equal)]


def random_zonotopes(seed: int, count: int = 50):
    rng = make_rng(seed, "random-zonotopes")
    out = []
    for i in range(count):
        n = (2, 3, 4)[i % 3]
        g = int(rng.integers(n, 9))
        out.append(B.random_zonotope(rng, n, g))
    return out


def c06(seed, quick):
    zs = random_zonotopes(seed, 15 if quick else 50)
    fails = [i for i, Z in enumerate(zs) if not PR.zonoid_recursion_check(Z, seed).passed]
    hexa = PR.zonoid_recursion_check(B.hexagon(), seed)
    return [CheckReport.compare("zonoid_chain_failures", float(len(fails)), 0.0, "=", 0.0, relative=False,
                                seed=seed, samples=len(zs), details={"failed": fails}),
            _eq("hexagon_P", hexa.lhs, 9.0, 1e-7), _eq("hexagon_chain_end", hexa.details["chain"][-1], 8.0, 1e-7)]


def c07(seed, quick):
    samples = 20_000 if quick else 200_000
    disk = F.ball_inequality_check(B.ball(2), samples, seed)
    square = F.ball_inequality_check(B.cube(2), samples, seed)
    m = [F.second_moment(K, 0).value for K in (B.ball(2), B.cube(2), B.cross_polytope(2))]
    return [_eq("ball_disk_lhs", disk.lhs, pi ** 2 / 8, 1e-7),
            CheckReport.compare("ball_disk", disk.lhs, disk.rhs, "<=", 1e-7, require=disk.passed and disk.equal),
            _eq("ball_square_lhs", square.lhs, 8 / 9, 1e-7),
            CheckReport.compare("ball_square", square.lhs, square.rhs, "<=", 1e-7, require=square.passed and not square.equal),
            _eq("moment_disk", m[0], pi / 4, 1e-7), _eq("moment_square", m[1], 4 / 3, 1e-7),
            _eq("moment_diamond", m[2], 1 / 3, 1e-7)]


def c08(seed, quick):
    g = F.functional_santalo_check(F.GridFunction.gaussian(2))
    ind = F.functional_santalo_check(F.GridFunction.indicator(B.ball(2), 8.0, 513))
    return [_eq("fsantalo_gaussian", g.lhs, (2 * pi) ** 2, 1e-3),
            CheckReport.compare("fsantalo_gaussian_equality", g.lhs, g.rhs, "<=", 1e-3, require=g.equal),
            _eq("fsantalo_disk_grid", ind.lhs, 2 * pi ** 2, 1e-2),
            CheckReport.compare("fsantalo_disk_strict", ind.lhs, ind.rhs, "<=", 1e-3, require=not ind.equal)]


def c09(seed, quick):
    r = F.functional_ball_check(F.GridFunction.gaussian(2))
    return [_eq("fball_gaussian", r.lhs, 2 * (2 * pi) ** 2, 1e-2)]


def polar_grid_errors(make, sizes=(257, 513)):
    out = []
    for m in sizes:
        f = make(m)
        out.append((m, f.h, F.polar_function(f).sup_error_vs_analytic))
    return out


def c10(seed, quick):
    out = []
    cases = (("disk", lambda m: F.GridFunction.indicator(B.ball(2), 8.0, m)),
             ("gaussian", lambda m: F.GridFunction.gaussian(2, 0.5, 8.0, m)))
    for label, make in cases:
        (m0, h0, e0), (m1, h1, e1) = polar_grid_errors(make)
        out.append(CheckReport.compare(f"polar_{label}_sup_error", e0, 5 * h0, "<=", 0.0, relative=False,
                                       details={"h": h0, "m": m0}))
        # a transform that is exact at the nodes has nothing left to halve
        ratio = 0.0 if max(e0, e1) <= 1e-12 else e1 / e0
        out.append(CheckReport.compare(f"polar_{label}_halving", ratio, 0.6, "<=", 0.0, relative=False,
                                       details={"errors": [e0, e1]}))
    return out


def c11(seed, quick):
    out = []
    for n in (1, 2, 3):
        r = H.rho_witness_check("cube", n=n)
        out.append(_eq(f"rho_cube{n}", r.lhs, 1 / 2 ** n, 1e-6, require=r.passed))
        out.append(H.eta_cube_check(n))
    for f, R in ((H.Gaussian(1), 6), (H.Sinc2Product(1), 10), (H.Gaussian(2), 6)):
        out.append(H.poisson_check(f, R))
    for f in (H.IndicatorFT("cube", 1), H.Gaussian(1), H.Sinc2Product(1)):
        out.append(H.plancherel_check(f, tol=1e-9))
    return out


def random_bodies(seed: int, count: int = 50) -> list:
    rng = make_rng(seed, "random-bodies")
    out = []
    for i in range(count):
        n = (2, 3)[i % 2]
        kind = i % 5
        if kind == 0:
            out.append(B.random_zonotope(rng, n, int(rng.integers(n, 7))))
        elif kind == 1:
            out.append(B.random_vpolytope(rng, n, int(rng.integers(n, 8))))
        elif kind == 2:
            out.append(B.LinearImage(B.random_matrix(rng, n), B.cube(n)))
        elif kind == 3:
            out.append(B.LinearImage(B.random_matrix(rng, n), B.ball(n)))
        else:
            out.append(P.hanner(P.random_tree(n, rng)))
    return out


def property_violations(bodies, seed: int) -> dict:
    """Counts of failed structural identities over a list of bodies."""
    rng = make_rng(seed, "property-suite")
    counts = {"bipolar": 0, "support_gauge": 0, "mahler_linear": 0, "mahler_polar": 0, "hanner_duality": 0,
              "unconditional": 0}
    for K in bodies:
        n = K.dim
        if not bipolar_check(K, 200, seed).passed:
            counts["bipolar"] += 1
        y = rng.standard_normal((200, n))
        dual = np.abs(B.support(K, y) - B.gauge(polar(K), y))
        if np.max(dual) > 1e-9 * (1 + np.max(np.abs(y))):
            counts["support_gauge"] += 1
        if n >= 2:
            T = B.random_matrix(rng, n)
            p = PR.mahler(K)
            if abs(PR.mahler(B.LinearImage(T, K)) - p) > 1e-9 * p:
                counts["mahler_linear"] += 1
            if abs(PR.mahler(polar(K)) - p) > 1e-9 * p:
                counts["mahler_polar"] += 1
    for n in (1, 2, 3, 4):
        for _ in range(5):
            t = P.random_tree(n, rng)
            x = rng.standard_normal((100, n))
            if np.max(np.abs(B.gauge(polar(P.hanner(t)), x) - B.gauge(P.hanner(P.flip(t)), x))) > 1e-9:
                counts["hanner_duality"] += 1
            if not P.is_unconditional(P.hanner(t)):
                counts["unconditional"] += 1
    labels = [(B.cube(2), True), (B.cross_polytope(3), True), (B.ball(3), True), (B.cube_vpolytope(3), True),
              (B.VPolytope([[1.0, 0.3], [0.0, 1.0], [-1.0, -0.3], [0.0, -1.0]]), False),
              (B.LinearImage(B.rotation(pi / 6), B.cube(2)), False), (B.hexagon(), False),
              (B.LinearImage(np.diag([2.0, 0.5]), B.cross_polytope(2)), True)]
    for K, want in labels:
        if P.is_unconditional(K) != want:
            counts["unconditional"] += 1
    return counts


def c12(seed, quick):
    bodies = list(B.catalog().values()) + random_bodies(seed, 15 if quick else 50)
    counts = property_violations(bodies, seed)
    return [CheckReport.compare(f"violations_{k}", float(v), 0.0, "=", 0.0, relative=False, seed=seed,
                                samples=len(bodies)) for k, v in counts.items()]


def c13(seed, quick):
    trials = 10 if quick else 50
    out = []
    for n in (2, 3):
        a = P.stability_experiment(n, [0.02, 0.05, 0.1], trials, seed)
        b = P.stability_experiment(n, [0.02, 0.05, 0.1], trials, seed)
        same = a.rows == b.rows
        out.append(CheckReport.compare(a.report.name, a.report.lhs, a.report.rhs, ">=", a.report.tolerance,
                                       relative=False, seed=seed, samples=trials, require=a.report.passed and same,
                                       note="table deterministic" if same else "table not reproducible",
                                       details=a.report.details))
    return out


def c14(seed, quick):
    return [P.section_mahler_check(B.cross_polytope(3), j, 8.0) for j in range(3)]


CRITERIA = (
    (1, "Mahler product of cubes and cross-polytopes", c01),
    (2, "Mahler product of Euclidean balls and the upper bound", c02),
    (3, "section inequality on four bodies", c03),
    (4, "averaging identity on the square", c04),
    (5, "one-dimensional moment inequality", c05),
    (6, "zonoid recursion", c06),
    (7, "second-moment inequality for unconditional bodies", c07),
    (8, "functional Santalo", c08),
    (9, "functional second-moment inequality", c09),
    (10, "grid polar accuracy", c10),
    (11, "Fourier witnesses, Poisson and Plancherel", c11),
    (12, "duality and property suites", c12),
    (13, "stability probe", c13),
    (14, "central sections of the octahedron", c14),
)


def paper_suite(seed: int = 0, quick: bool = False, only=None) -> list[Criterion]:
    out = []
    for number, title, fn in CRITERIA:
        if only is not None and number not in only:
            continue
        out.append(Criterion(number, title, fn(seed, quick)))
    return out
