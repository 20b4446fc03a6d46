"""Named checks shared by the CLI, manifests and the bundled acceptance suite.

Every entry takes (body, params, seed) and returns a list of reports.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from . import functional as fn_mod
from . import harmonic, perturb, products
from .bodies import Body, body_from_json
from .duality import bipolar_check
from .errors import InputError
from .report import CheckReport
from .volume import brunn_concavity_check, section_profile

CheckFn = Callable[[Optional[Body], dict, int], list]

MOMENT_PROFILES = {
    "tent": lambda a, p: (lambda t: max(1.0 - a * t, 0.0) ** p),
    "quad": lambda a, p: (lambda t: max(1.0 - (a * t) ** 2, 0.0)),
}


def _need_body(body, name):
    if body is None:
        raise InputError(f"check {name!r} needs a body")
    return body


def _vector(v, name):
    try:
        arr = np.asarray([float(t) for t in v.split(",")] if isinstance(v, str) else v, dtype=float)
    except ValueError as exc:
        raise InputError(f"{name}: cannot parse {v!r}") from exc
    return arr


def grid_function(params: dict, body: Optional[Body]) -> fn_mod.GridFunction:
    """GridFunction from params: {"grid": path} or {"fn": gaussian|indicator|exp_neg_gauge, ...}."""
    if "grid" in params:
        return fn_mod.GridFunction.load(params["grid"])
    kind = params.get("fn", "gaussian")
    extent = float(params.get("extent", 8.0))
    m = params.get("m")
    m = None if m is None else int(m)
    if kind == "gaussian":
        return fn_mod.GridFunction.gaussian(int(params.get("dim", 2)), float(params.get("a", 0.5)), extent, m)
    if kind == "indicator":
        return fn_mod.GridFunction.indicator(_need_body(body, "indicator"), extent, m)
    if kind == "exp_neg_gauge":
        return fn_mod.GridFunction.exp_neg_gauge(_need_body(body, "exp_neg_gauge"), extent, m)
    raise InputError(f"unknown grid function {kind!r}")


def catalog_function(params: dict):
    kind = params.get("fn", "gaussian")
    dim = int(params.get("dim", 1))
    if kind == "gaussian":
        return harmonic.Gaussian(dim, float(params.get("scale", 1.0)))
    if kind == "sinc2":
        return harmonic.Sinc2Product(dim)
    if kind == "indicator_ft":
        return harmonic.IndicatorFT(params.get("body", "cube"), dim)
    raise InputError(f"unknown catalog function {kind!r}")


def _santalo(body, p, seed):
    return list(products.santalo_check(_need_body(body, "santalo"), p.get("method", "auto"),
                                       int(p.get("samples", 200_000)), seed))


def _invariance(body, p, seed):
    K = _need_body(body, "mahler-invariance")
    T = np.asarray(p.get("T", np.diag(np.linspace(2.0, 0.5, K.dim)) if K.dim > 1 else [[2.0]]), dtype=float)
    return [products.mahler_invariance_check(K, T, seed, p.get("method", "auto"), int(p.get("samples", 200_000)))]


def _lemma33(body, p, seed):
    return [products.lemma33_identity(_need_body(body, "lemma33"), int(p.get("samples", 200_000)), seed,
                                      p.get("method", "exact"))]


def _lemma33_x0(body, p, seed):
    return [products.lemma33_find_x0(_need_body(body, "lemma33-x0"), seed, p.get("method", "exact"))[1]]


def _lemma34(body, p, seed):
    profile = p.get("f", "tent")
    if profile not in MOMENT_PROFILES:
        raise InputError(f"lemma34: unknown profile {profile!r} (choose from {sorted(MOMENT_PROFILES)})")
    a, power = float(p.get("a", 1.0)), float(p.get("p", 1.0))
    f = MOMENT_PROFILES[profile](a, power)
    return [products.lemma34_check(f, power, float(p.get("t_max", 1.0 / a)), int(p.get("quad_points", 2001)))]


def _lemma35(body, p, seed):
    K = _need_body(body, "lemma35")
    x = _vector(p.get("x", [0.0] * (K.dim - 1) + [1.0]), "x")
    return [products.lemma35_check(K, x, int(p.get("samples", 200_000)), seed, p.get("method", "auto"))]


def _zonoid(body, p, seed):
    return [products.zonoid_recursion_check(_need_body(body, "zonoid"), seed)]


def _bipolar(body, p, seed):
    return [bipolar_check(_need_body(body, "bipolar"), int(p.get("samples", 500)), seed)]


def _brunn(body, p, seed):
    K = _need_body(body, "brunn")
    d = _vector(p.get("direction", [0.0] * (K.dim - 1) + [1.0]), "direction")
    prof = section_profile(K, d, int(p.get("grid_points", 33)), int(p.get("samples", 20_000)), seed)
    return [brunn_concavity_check(prof, K.dim)]


def _rho(body, p, seed):
    kind = p.get("body", "cube")
    return [harmonic.rho_witness_check(kind, n=int(p.get("dim", 1)))]


def _eta(body, p, seed):
    return [harmonic.eta_cube_check(int(p.get("dim", 1)), int(p.get("lattice_radius", 50)))]


def _poisson(body, p, seed):
    return [harmonic.poisson_check(catalog_function(p), int(p.get("lattice_radius", 10)))]


def _plancherel(body, p, seed):
    return [harmonic.plancherel_check(catalog_function(p), tol=float(p.get("tol", 1e-6)))]


def _fsantalo(body, p, seed):
    return [fn_mod.functional_santalo_check(grid_function(p, body))]


def _fball(body, p, seed):
    return [fn_mod.functional_ball_check(grid_function(p, body))]


def _involution(body, p, seed):
    return [fn_mod.involution_check(grid_function(p, body))]


def _ball(body, p, seed):
    return [fn_mod.ball_inequality_check(_need_body(body, "ball"), int(p.get("samples", 200_000)), seed)]


def _reduction(body, p, seed):
    return [fn_mod.santalo_reduction_check(_need_body(body, "santalo-reduction"), int(p.get("samples", 200_000)), seed)]


def _lemma52(body, p, seed):
    inst = p.get("instance", "ball")
    if inst in ("ball", "cube"):
        from .bodies import ball, cube
        K = ball(int(p.get("dim", 2))) if inst == "ball" else cube(int(p.get("dim", 2)))
        f1, f2, f3, upper = fn_mod.second_moment_profiles(K)
        r_max = 1.0
    elif inst == "exp":
        f1 = f2 = f3 = lambda t: float(np.exp(-t))
        upper, r_max = np.inf, 4.0
    else:
        raise InputError(f"lemma52: unknown instance {inst!r}")
    return [fn_mod.lemma52_check(f1, f2, f3, int(p.get("sample_pairs", 10_000)), seed, r_max, upper)]


def _hanner(body, p, seed):
    return [perturb.hanner_mahler_check(perturb.parse_tree(p.get("tree", "linf(I,I)")))]


def _bm(body, p, seed):
    K = _need_body(body, "bm")
    if "other" not in p:
        raise InputError("bm: params.other (second body) is required")
    L = p["other"] if isinstance(p["other"], Body) else body_from_json(p["other"])
    cert = perturb.bm_distance_upper(K, L, int(p.get("restarts", 20)), int(p.get("iterations", 400)), seed)
    rep = perturb.verify_certificate(cert, K, L, seed=seed + 1)
    return [rep]


def _stability(body, p, seed):
    eps = p.get("eps", [0.02, 0.05, 0.1])
    if isinstance(eps, str):
        eps = [float(e) for e in eps.split(",")]
    return [perturb.stability_experiment(int(p.get("dim", 2)), eps, int(p.get("trials", 50)), seed).report]


def _section_mahler(body, p, seed):
    return [perturb.section_mahler_check(_need_body(body, "section-mahler"), int(p.get("axis", 0)))]


def _unconditional(body, p, seed):
    K = _need_body(body, "unconditional")
    got = perturb.is_unconditional(K, int(p.get("samples", 200)), seed)
    want = bool(p.get("expect", got))
    return [CheckReport.compare("unconditional", float(got), float(want), "=", 0.0, relative=False,
                                inputs=(K,), seed=seed)]


CHECKS: dict[str, CheckFn] = {
    "santalo": _santalo,
    "mahler-invariance": _invariance,
    "lemma33": _lemma33,
    "lemma33-x0": _lemma33_x0,
    "lemma34": _lemma34,
    "lemma35": _lemma35,
    "zonoid": _zonoid,
    "bipolar": _bipolar,
    "brunn": _brunn,
    "rho": _rho,
    "eta": _eta,
    "poisson": _poisson,
    "plancherel": _plancherel,
    "functional-santalo": _fsantalo,
    "functional-ball": _fball,
    "involution": _involution,
    "ball": _ball,
    "santalo-reduction": _reduction,
    "lemma52": _lemma52,
    "hanner": _hanner,
    "bm": _bm,
    "stability": _stability,
    "section-mahler": _section_mahler,
    "unconditional": _unconditional,
}

BODY_CHECKS = {"santalo", "mahler-invariance", "lemma33", "lemma33-x0", "lemma35", "zonoid", "bipolar",
               "brunn", "ball", "santalo-reduction", "bm", "section-mahler", "unconditional"}


def run_check(name: str, body: Optional[Body], params: dict, seed: int) -> list:
    if name not in CHECKS:
        raise InputError(f"unknown check {name!r}")
    return CHECKS[name](body, params, int(seed))


def retolerance(rep: CheckReport, tol: float) -> CheckReport:
    """The same comparison re-evaluated at a caller-supplied tolerance."""
    fresh = CheckReport.compare(rep.name, rep.lhs, rep.rhs, rep.relation, tol, relative=rep.relative)
    return replace(rep, tolerance=fresh.tolerance, passed=fresh.passed, equal=fresh.equal)
