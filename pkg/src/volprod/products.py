"""Volume products, the Santalo bounds, and the zonoid lower-bound chain."""
from __future__ import annotations

from math import factorial, sqrt
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .bodies import (Body, EuclidBall, Interval, LinearImage, Zonotope, ball_volume,
                     zonotope_measure)
from .duality import polar
from .errors import CapabilityError, InputError, PreconditionError
from .report import CheckReport, McEstimate
from .volume import (central_section, moment, moment_mc, polar_volume_sphere, projection,
                     section_profile, unit_vector, volume, volume_mc)

__all__ = [
    "mahler", "mahler_mc", "mahler_estimate", "mahler_lower", "santalo_check", "mahler_invariance_check",
    "averaging_terms", "lemma33_identity", "lemma33_find_x0", "lemma34_check", "lemma35_check",
    "zonoid_recursion_check",
]

EXACT_TOL = 1e-7
MC_SIGMAS = 4.0
CONJECTURAL = "conjectural bound"


def mahler_lower(n: int) -> float:
    return 4.0 ** n / factorial(n)


def mahler(K: Body) -> float:
    """P(K) = vol(K) vol(K*) by exact volumes."""
    return volume(K) * volume(polar(K))


def mahler_mc(K: Body, samples: int = 200_000, seed: int = 0) -> McEstimate:
    """P(K) from a box-MC volume of K and the sphere formula for vol(K*)."""
    a = volume_mc(K, samples, seed)
    b = polar_volume_sphere(K, samples, seed)
    std = sqrt((a.value * b.std_error) ** 2 + (b.value * a.std_error) ** 2)
    return McEstimate(a.value * b.value, std, samples, seed, "mc")


def mahler_estimate(K: Body, method: str = "auto", samples: int = 200_000, seed: int = 0) -> McEstimate:
    if method not in ("auto", "exact", "mc"):
        raise InputError(f"unknown method {method!r}")
    if method != "mc":
        try:
            return McEstimate.exact(mahler(K))
        except CapabilityError:
            if method == "exact":
                raise
    return mahler_mc(K, samples, seed)


def _compare(name, est: McEstimate, rhs, relation, inputs, note="", details=None):
    if est.method == "exact":
        return CheckReport.compare(name, est.value, rhs, relation, EXACT_TOL, inputs=inputs,
                                   note=note, details=details)
    return CheckReport.compare(name, est.value, rhs, relation, MC_SIGMAS * est.std_error,
                               relative=False, inputs=inputs, seed=est.seed, samples=est.samples,
                               note=note, details=details)


def _is_zonoid(K: Body) -> bool:
    if isinstance(K, (Zonotope, EuclidBall, Interval)):
        return True
    return isinstance(K, LinearImage) and _is_zonoid(K.body)


def santalo_check(K: Body, method: str = "auto", samples: int = 200_000,
                  seed: int = 0) -> tuple[CheckReport, CheckReport]:
    """(upper, lower): P(K) <= omega_n^2 and P(K) >= 4^n/n!.

    The lower bound is a theorem for zonoids and unconditional bodies; for
    anything else the report carries the note "conjectural bound".
    """
    from .perturb import is_unconditional

    n = K.dim
    est = mahler_estimate(K, method, samples, seed)
    upper = _compare("santalo-upper", est, ball_volume(n) ** 2, "<=", (K,))
    proven = _is_zonoid(K) or is_unconditional(K)
    lower = _compare("santalo-lower", est, mahler_lower(n), ">=", (K,),
                     note="" if proven else CONJECTURAL)
    return upper, lower


def mahler_invariance_check(K: Body, T, seed: int = 0, method: str = "auto",
                            samples: int = 200_000) -> CheckReport:
    """P(TK) = P(K) and P(K) = P(K*).

    Exact paths compare relative deviations against 1e-6; MC paths report
    the larger deviation in units of the combined standard error against 4.
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (K.dim, K.dim) or abs(np.linalg.det(T)) < 1e-10:
        raise InputError("mahler_invariance_check: T must be an invertible n x n matrix")
    base = mahler_estimate(K, method, samples, seed)
    img = mahler_estimate(LinearImage(T, K), method, samples, seed + 1)
    dual = mahler_estimate(polar(K), method, samples, seed + 2)
    details = {"P(K)": base.value, "P(TK)": img.value, "P(K*)": dual.value}
    if base.method == img.method == dual.method == "exact":
        dev = max(abs(img.value - base.value), abs(dual.value - base.value)) / abs(base.value)
        return CheckReport.compare("mahler_invariance", dev, 0.0, "<=", 1e-6, relative=False,
                                   inputs=(K, T), details=details)
    z = 0.0
    for other in (img, dual):
        s = sqrt(base.std_error ** 2 + other.std_error ** 2)
        z = max(z, abs(other.value - base.value) / s if s > 0 else (0.0 if other.value == base.value else np.inf))
    return CheckReport.compare("mahler_invariance", z, 0.0, "<=", MC_SIGMAS, relative=False,
                               inputs=(K, T), seed=seed, samples=samples, note="deviation in sigma units",
                               details=details)


# ---------------------------------------------------------------------------
# the averaging identity over the supporting measure of a zonotope


def _require_zonotope(Z, name):
    if not isinstance(Z, Zonotope):
        raise InputError(f"{name}: expected a Zonotope")
    if Z.dim < 2:
        raise InputError(f"{name}: dimension must be >= 2")


def averaging_terms(Z: Zonotope, method: str = "exact", samples: int = 200_000, seed: int = 0):
    """Per-atom terms of the identity.

    Returns (measure, left, left_err, right) where for atom u with weight w
    left = (n+1)|Z| * int over Z* of |<u, y>| and right = 2|Z*| |P_u-perp Z|,
    both before weighting.
    """
    _require_zonotope(Z, "lemma33")
    if method not in ("exact", "mc"):
        raise InputError(f"unknown method {method!r}")
    n = Z.dim
    mu = zonotope_measure(Z)
    zp = polar(Z)
    vol, vol_polar = volume(Z), volume(zp)
    left, left_err, right = [], [], []
    for i, u in enumerate(mu.directions):
        # atoms come in +- pairs with identical terms
        if i % 2 == 1:
            left.append(left[-1]), left_err.append(left_err[-1]), right.append(right[-1])
            continue
        if method == "exact":
            m, e = moment(zp, u, 1), 0.0
        else:
            est = moment_mc(zp, u, 1, samples, seed + i // 2)
            m, e = est.value, est.std_error
        left.append((n + 1) * vol * m)
        left_err.append((n + 1) * vol * e)
        right.append(2.0 * vol_polar * volume(projection(Z, u)))
    return mu, np.array(left), np.array(left_err), np.array(right)


def lemma33_identity(Z: Zonotope, quad_samples: int = 200_000, seed: int = 0,
                     method: str = "exact") -> CheckReport:
    """Both sides of the averaging identity, integrated against the zonotope's measure."""
    mu, left, left_err, right = averaging_terms(Z, method, quad_samples, seed)
    w = mu.weights
    lhs, rhs = float(w @ left), float(w @ right)
    # +- atoms share one estimate, so their errors add linearly
    err = 2.0 * float(np.sqrt(np.sum((w[0::2] * left_err[0::2]) ** 2)))
    if method == "exact":
        return CheckReport.compare("lemma33_identity", lhs, rhs, "=", EXACT_TOL, inputs=(Z,))
    return CheckReport.compare("lemma33_identity", lhs, rhs, "=", MC_SIGMAS * err, relative=False,
                               inputs=(Z,), seed=seed, samples=quad_samples)


def lemma33_find_x0(Z: Zonotope, seed: int = 0, method: str = "exact",
                    samples: int = 200_000) -> tuple[np.ndarray, CheckReport]:
    """An atom x0 with (n+1)|Z| int_{Z*}|<x0,y>| >= 2|Z*| |P_{x0}-perp Z|.

    Picks the atom with the largest left/right ratio; ties keep the first
    atom in measure order (generator order, + before -).
    """
    mu, left, left_err, right = averaging_terms(Z, method, samples, seed)
    ratio = left / right
    best = float(np.max(ratio))
    i = int(np.flatnonzero(ratio >= best * (1 - 1e-12))[0])
    x0 = mu.directions[i].copy()
    details = {"x0": x0, "ratio": float(ratio[i])}
    if method == "exact":
        rep = CheckReport.compare("lemma33_x0", left[i], right[i], ">=", EXACT_TOL, inputs=(Z,), details=details)
    else:
        rep = CheckReport.compare("lemma33_x0", left[i], right[i], ">=", MC_SIGMAS * left_err[i],
                                  relative=False, inputs=(Z,), seed=seed, samples=samples, details=details)
    return x0, rep


# ---------------------------------------------------------------------------
# the 1-D moment inequality


def lemma34_check(f: Callable[[float], float], p: float, t_max: float,
                  quad_points: int = 2001) -> CheckReport:
    """int t f <= (p+1)/(p+2) (int f)^2 for f(0) = 1 with f^{1/p} concave on its support.

    Concavity is checked by midpoint triples on a uniform grid of
    ``quad_points`` nodes in [0, t_max], restricted to nodes where f > 0.
    """
    if not p > 0:
        raise InputError("lemma34_check: p must be positive")
    if not t_max > 0 or quad_points < 3:
        raise InputError("lemma34_check: need t_max > 0 and quad_points >= 3")
    if abs(f(0.0) - 1.0) > 1e-9:
        raise PreconditionError(f"lemma34_check: f(0) = {f(0.0)!r}, expected 1")
    ts = np.linspace(0.0, t_max, quad_points)
    vals = np.array([f(t) for t in ts], dtype=float)
    if np.any(vals < -1e-15):
        raise PreconditionError(f"lemma34_check: f negative at t = {ts[np.argmin(vals)]:.6g}")
    root = np.maximum(vals, 0.0) ** (1.0 / p)
    pos = vals > 0
    ok = pos[:-2] & pos[1:-1] & pos[2:]
    defect = 0.5 * (root[:-2] + root[2:]) - root[1:-1]
    bad = np.flatnonzero(ok & (defect > 1e-12))
    if len(bad):
        j = int(bad[0])
        raise PreconditionError(
            f"lemma34_check: f^(1/p) not concave at grid triple t = ({ts[j]:.6g}, {ts[j + 1]:.6g}, {ts[j + 2]:.6g})")
    # break the quadrature at the end of the support to keep quad accurate
    last = ts[np.flatnonzero(pos)[-1]] if np.any(pos) else 0.0
    edge = min(t_max, last + (ts[1] - ts[0]))
    kw = dict(limit=500, epsabs=1e-14, epsrel=1e-13)
    mass = quad(f, 0.0, edge, **kw)[0] + (quad(f, edge, t_max, **kw)[0] if edge < t_max else 0.0)
    first = quad(lambda t: t * f(t), 0.0, edge, **kw)[0] + (
        quad(lambda t: t * f(t), edge, t_max, **kw)[0] if edge < t_max else 0.0)
    rhs = (p + 1) / (p + 2) * mass ** 2
    return CheckReport.compare("lemma34", first, rhs, "<=", 1e-9, relative=False,
                               details={"p": p, "integral_f": mass})


# ---------------------------------------------------------------------------
# the section inequality


def lemma35_check(B: Body, x, samples: int = 200_000, seed: int = 0,
                  method: str = "auto") -> CheckReport:
    """int_B |<x,y>| dy <= n/(2(n+1)) |B|^2 / |B cap x-perp|.

    ``method``: "exact" (structural moments and sections), "mc" (box MC for
    the moment and volume, slice MC for the central section), "profile"
    (all three from one section profile), or "auto" (exact, else mc).
    """
    n = B.dim
    x = unit_vector(x, n, "x")
    if n < 2:
        raise InputError("lemma35_check: dimension must be >= 2")
    if method not in ("auto", "exact", "mc", "profile"):
        raise InputError(f"unknown method {method!r}")
    c = n / (2.0 * (n + 1))
    if method in ("auto", "exact"):
        try:
            lhs = moment(B, x, 1)
            vol = volume(B)
            sec = volume(central_section(B, x))
            if sec < 1e-12:
                raise InputError(f"lemma35_check: central section volume {sec:.3g} below 1e-12")
            return CheckReport.compare("lemma35", lhs, c * vol ** 2 / sec, "<=", EXACT_TOL,
                                       inputs=(B, x), details={"volume": vol, "section": sec})
        except CapabilityError:
            if method == "exact":
                raise
            method = "mc"
    prof = section_profile(B, x, 65, max(samples // 65, 1000), seed)
    sec, sec_err = prof.center, prof.center_err
    if sec < 1e-12:
        raise InputError(f"lemma35_check: central section volume {sec:.3g} below 1e-12")
    if method == "profile":
        lhs, lhs_err = prof.abs_moment()
        vol, vol_err = prof.volume()
    else:
        m = moment_mc(B, x, 1, samples, seed)
        v = volume_mc(B, samples, seed + 1)
        lhs, lhs_err, vol, vol_err = m.value, m.std_error, v.value, v.std_error
    rhs = c * vol ** 2 / sec
    rhs_err = rhs * sqrt((2 * vol_err / vol) ** 2 + (sec_err / sec) ** 2)
    band = MC_SIGMAS * sqrt(lhs_err ** 2 + rhs_err ** 2)
    return CheckReport.compare("lemma35", lhs, rhs, "<=", band, relative=False, inputs=(B, x),
                               seed=seed, samples=samples, note=method,
                               details={"volume": vol, "section": sec})


# ---------------------------------------------------------------------------
# the induction on dimension for zonotopes


def zonoid_recursion_check(Z: Zonotope, seed: int = 0) -> CheckReport:
    """Unrolled chain P(Z_n) >= (4/n) P(Z_{n-1}) >= ... >= 4^n/n!.

    Z_{k-1} is the projection of Z_k along the atom chosen by
    :func:`lemma33_find_x0`. The report's sides are P(Z) and 4^n/n!; it
    passes only if every link holds as well.
    """
    _require_zonotope(Z, "zonoid_recursion_check")
    n = Z.dim
    links = []
    current = Z
    p_cur = mahler(current)
    p_top = p_cur
    factor = 1.0
    all_ok = True
    for k in range(n, 1, -1):
        x0, rep = lemma33_find_x0(current, seed)
        nxt = projection(current, x0)
        p_next = mahler(nxt)
        link = CheckReport.compare(f"link_{k}", p_cur, 4.0 / k * p_next, ">=", EXACT_TOL)
        all_ok &= link.passed and rep.passed
        factor *= 4.0 / k
        links.append({"dim": k, "x0": x0, "P": p_cur, "P_next": p_next, "rhs": 4.0 / k * p_next,
                      "pass": link.passed, "equal": link.equal, "x0_pass": rep.passed})
        current, p_cur = nxt, p_next
    chain = [p_top] + [factor_prefix * l["P_next"] for factor_prefix, l in zip(_prefixes(n), links)]
    final = CheckReport.compare("zonoid_recursion", p_top, mahler_lower(n), ">=", EXACT_TOL,
                                inputs=(Z,), require=all_ok, details={"links": links, "chain": chain})
    return final


def _prefixes(n: int) -> list:
    out, acc = [], 1.0
    for k in range(n, 1, -1):
        acc *= 4.0 / k
        out.append(acc)
    return out
