"""Hanner polytopes, unconditionality, Banach-Mazur upper bounds and the stability probe."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import factorial
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize

from . import _hull
from ._random import make_rng, sphere_points
from .bodies import (Body, EuclidBall, HPolytope, Interval, L1Sum, LinearImage, LinfSum, VPolytope,
                     Zonotope, gauge, support)
from .duality import to_vpolytope
from .errors import CapabilityError, InputError
from .products import mahler, mahler_lower
from .report import CheckReport
from .volume import central_section

__all__ = [
    "Leaf", "Node", "HannerTree", "parse_tree", "hanner", "flip", "leaf_count", "random_tree",
    "hanner_mahler_check", "is_unconditional", "BmCertificate", "bm_distance_upper", "verify_certificate",
    "StabilityResult", "stability_experiment", "section_mahler_check",
]

EXACT_TOL = 1e-7
CERT_TOL = 1e-9


# ---------------------------------------------------------------------------
# Hanner trees


@dataclass(frozen=True)
class Leaf:
    def __str__(self):
        return "I"


@dataclass(frozen=True)
class Node:
    kind: str
    left: "HannerTree"
    right: "HannerTree"

    def __post_init__(self):
        if self.kind not in ("l1", "linf"):
            raise InputError(f"Hanner node kind must be 'l1' or 'linf', got {self.kind!r}")

    def __str__(self):
        return f"{self.kind}({self.left},{self.right})"


HannerTree = Union[Leaf, Node]


def parse_tree(text: str) -> HannerTree:
    """Parse e.g. ``l1(linf(I,I),I)``; ``I`` is the unit interval."""
    tokens = re.findall(r"linf|l1|I|\(|\)|,", text.replace(" ", ""))
    if "".join(tokens) != text.replace(" ", ""):
        raise InputError(f"Hanner tree: cannot parse {text!r}")
    pos = 0

    def take(expected=None):
        nonlocal pos
        if pos >= len(tokens):
            raise InputError(f"Hanner tree: unexpected end of {text!r}")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise InputError(f"Hanner tree: expected {expected!r} at token {pos} in {text!r}")
        pos += 1
        return tok

    def expr():
        tok = take()
        if tok == "I":
            return Leaf()
        if tok in ("l1", "linf"):
            take("(")
            a = expr()
            take(",")
            b = expr()
            take(")")
            return Node(tok, a, b)
        raise InputError(f"Hanner tree: unexpected token {tok!r} in {text!r}")

    tree = expr()
    if pos != len(tokens):
        raise InputError(f"Hanner tree: trailing input in {text!r}")
    return tree


def leaf_count(tree: HannerTree) -> int:
    return 1 if isinstance(tree, Leaf) else leaf_count(tree.left) + leaf_count(tree.right)


def hanner(tree: HannerTree) -> Body:
    """Realize a tree: leaves are [-1, 1], nodes are l1 / l-infinity sums."""
    if isinstance(tree, Leaf):
        return Interval(1.0)
    parts = (hanner(tree.left), hanner(tree.right))
    return L1Sum(parts) if tree.kind == "l1" else LinfSum(parts)


def flip(tree: HannerTree) -> HannerTree:
    """Swap l1 and l-infinity at every node; realizes the polar body."""
    if isinstance(tree, Leaf):
        return tree
    return Node("linf" if tree.kind == "l1" else "l1", flip(tree.left), flip(tree.right))


def random_tree(n: int, rng: np.random.Generator) -> HannerTree:
    if n < 1:
        raise InputError("random_tree: n must be >= 1")
    if n == 1:
        return Leaf()
    k = int(rng.integers(1, n))
    return Node("l1" if rng.random() < 0.5 else "linf", random_tree(k, rng), random_tree(n - k, rng))


def hanner_mahler_check(tree: HannerTree) -> CheckReport:
    n = leaf_count(tree)
    if n > 6:
        raise CapabilityError("hanner_mahler_check: at most 6 leaves")
    K = hanner(tree)
    return CheckReport.compare("hanner_mahler", mahler(K), mahler_lower(n), "=", EXACT_TOL,
                               inputs=(K,), details={"tree": str(tree)})


# ---------------------------------------------------------------------------
# unconditionality


def _structurally_unconditional(K: Body) -> Optional[bool]:
    if isinstance(K, (EuclidBall, Interval)):
        return True
    if isinstance(K, (L1Sum, LinfSum)):
        flags = [_structurally_unconditional(p) for p in K.parts]
        return True if all(f is True for f in flags) else None
    if isinstance(K, LinearImage):
        T = K.matrix
        if np.count_nonzero(T - np.diag(np.diag(T))) == 0 and _structurally_unconditional(K.body):
            return True
    return None


def is_unconditional(K: Body, samples: int = 200, seed: int = 0) -> bool:
    """Invariance of the gauge under every coordinate sign pattern.

    Balls, intervals, sums of unconditional parts and diagonal images of
    those are accepted structurally; anything else is tested on seeded
    points against all 2^n patterns (up to 1e-9 relative).
    """
    fast = _structurally_unconditional(K)
    if fast:
        return True
    n = K.dim
    if n > 12:
        raise CapabilityError("is_unconditional: dimension too large for the 2^n pattern test")
    x = sphere_points(make_rng(seed, "unconditional"), samples, n)
    if isinstance(K, (VPolytope, HPolytope, Zonotope)):
        x = np.vstack([x, K.extreme_points])
    base = gauge(K, x)
    signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * n), indexing="ij")).reshape(n, -1).T
    for s in signs:
        if np.any(np.abs(gauge(K, x * s) - base) > 1e-9 * (1.0 + base)):
            return False
    return True


# ---------------------------------------------------------------------------
# Banach-Mazur upper bounds


@dataclass(frozen=True, eq=False)
class BmCertificate:
    """L is contained in T K, which is contained in d L.

    ``exact`` is True when both containments were certified through
    facets/vertices rather than sampled directions.
    """

    T: np.ndarray
    d: float
    exact: bool
    note: str = "upper bound only; the infimum over GL(n) is not certified"

    def to_json(self):
        return {"d_upper": self.d, "T": self.T.tolist(), "exact": self.exact, "note": self.note}


def _polytopal(K: Body) -> Optional[VPolytope]:
    try:
        return to_vpolytope(K)
    except CapabilityError:
        return None


def _containment_factors(K: Body, L: Body, T: np.ndarray, Kp, Lp, directions):
    """(s1, s2, exact) with L in s1 T K and T K in s2 L."""
    Tinv = np.linalg.inv(T)
    exact = True
    if Lp is not None:
        s1 = float(np.max(gauge(K, Lp.extreme_points @ Tinv.T)))
        s2 = float(np.max(support(K, Lp.facets @ T)))
    elif Kp is not None:
        s1 = float(np.max(support(L, Kp.facets @ Tinv)))
        s2 = float(np.max(gauge(L, Kp.extreme_points @ T.T)))
    else:
        r = support(K, directions @ T) / support(L, directions)
        s1, s2, exact = 1.0 / float(r.min()), float(r.max()), False
    return s1, s2, exact


def bm_distance_upper(K: Body, L: Body, restarts: int = 20, iterations: int = 400,
                      seed: int = 0) -> BmCertificate:
    """Search T = I + A minimizing max/min of h_{TK}/h_L over 256 seeded directions.

    Restarts alternate between Haar-random rotations and uniform A in [-1, 1].

    The best candidate is rescaled so that L is inside T K and its distance
    recomputed from exact containment factors where a polytopal description
    exists (sampled otherwise).
    """
    n = K.dim
    if L.dim != n:
        raise InputError("bm_distance_upper: dimension mismatch")
    if n > 4:
        raise CapabilityError("bm_distance_upper: dimension must be <= 4")
    if restarts < 1:
        raise InputError("bm_distance_upper: restarts must be >= 1")
    rng = make_rng(seed, "bm")
    U = sphere_points(rng, 256, n)
    U = np.vstack([U, np.eye(n), -np.eye(n)])
    hL = support(L, U)

    def objective(a):
        T = np.eye(n) + a.reshape(n, n)
        if abs(np.linalg.det(T)) < 1e-8:
            return 1e6
        r = support(K, U @ T) / hL
        return float(np.log(r.max() / r.min()))

    Kp, Lp = _polytopal(K), _polytopal(L)
    best = None
    for k in range(restarts):
        if k == 0:
            a0 = np.zeros(n * n)
        elif k % 2:
            # a random rotation: the objective has one basin per symmetry of L
            q, r = np.linalg.qr(rng.standard_normal((n, n)))
            a0 = (q * np.sign(np.diag(r)) - np.eye(n)).reshape(-1)
        else:
            a0 = rng.uniform(-1.0, 1.0, n * n)
        if objective(a0) >= 1e6:
            continue
        opts = {"maxiter": iterations, "xatol": 1e-10, "fatol": 1e-12}
        res = minimize(objective, a0, method="Nelder-Mead", options=opts)
        # a restart from the end point rebuilds a collapsed simplex
        res = minimize(objective, res.x, method="Nelder-Mead", options=opts)
        T = np.eye(n) + res.x.reshape(n, n)
        if abs(np.linalg.det(T)) < 1e-8:
            continue
        s1, s2, exact = _containment_factors(K, L, T, Kp, Lp, U)
        d = s1 * s2
        if best is None or d < best[1] - 1e-15:
            best = (s1 * T, d, exact)
    if best is None:
        raise CapabilityError("bm_distance_upper: no nonsingular candidate found")
    T, d, exact = best
    return BmCertificate(T, max(1.0, d), exact)


def verify_certificate(cert: BmCertificate, K: Body, L: Body, samples: int = 500, seed: int = 1) -> CheckReport:
    """h_L <= h_{TK} <= d h_L on a fresh direction sample, within 1e-9."""
    U = sphere_points(make_rng(seed, "bm-verify"), samples, K.dim)
    hL = support(L, U)
    hTK = support(K, U @ cert.T)
    worst = float(max(np.max(hL / hTK), np.max(hTK / (cert.d * hL))))
    return CheckReport.compare("bm_certificate", worst, 1.0, "<=", CERT_TOL, inputs=(K, L), seed=seed,
                               samples=samples, details={"d": cert.d})


# ---------------------------------------------------------------------------
# stability of the lower bound near the cube


@dataclass(frozen=True)
class StabilityResult:
    rows: list
    report: CheckReport
    header: tuple = field(default=("eps", "trial", "P", "delta_P", "d_hat_minus_1", "ratio"))


def _cube_pairs(n: int) -> np.ndarray:
    v = np.array(np.meshgrid(*([[-1.0, 1.0]] * n), indexing="ij")).reshape(n, -1).T
    return v[v[:, 0] > 0]


def _flip_hull(V: np.ndarray) -> VPolytope:
    n = V.shape[1]
    signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * n), indexing="ij")).reshape(n, -1).T
    pts = np.vstack([V * s for s in signs])
    return VPolytope(_hull.hull(pts).vertices)


def stability_experiment(n: int, epsilons, trials: int = 50, seed: int = 0,
                         restarts: int = 1, iterations: int = 300) -> StabilityResult:
    """Perturb the cube, record delta P = P(K) - 4^n/n! and d_hat - 1.

    One vertex of each +- pair moves by eps U[-1, 1]^n and is mirrored;
    d_hat is the best BM upper bound to two unconditional candidates (the
    cube and the hull of all sign flips of K). Volumes are exact, so the
    sigma of delta P is 0 and "delta P >= -4 sigma" means delta P >= -1e-9 P.
    d_hat only bounds the true distance from above, which biases the
    reported ratio delta P / (d_hat - 1) downward. In the plane the scheme
    only moves two vertex pairs, so K stays a parallelogram (d_hat = 1,
    delta P = 0) and the ratio is undefined; such rows carry ratio None.
    """
    if n not in (2, 3):
        raise InputError("stability_experiment: n must be 2 or 3")
    eps_list = [float(e) for e in epsilons]
    if any(e < 0 or e > 0.2 for e in eps_list):
        raise InputError("stability_experiment: each eps must lie in [0, 0.2]")
    if trials < 1:
        raise InputError("stability_experiment: trials must be >= 1")
    base = _cube_pairs(n)
    cube = VPolytope(np.vstack([base, -base]))
    target = mahler_lower(n)
    rows, worst, ratio_min = [], np.inf, {}
    for eps in eps_list:
        for t in range(trials):
            rng = make_rng(seed, "stability", n, eps, t)
            reps = base + eps * rng.uniform(-1.0, 1.0, base.shape)
            K = VPolytope(_hull.hull(np.vstack([reps, -reps])).vertices)
            P = mahler(K)
            dP = P - target
            if eps == 0:
                dhat = 1.0
            else:
                dhat = min(bm_distance_upper(K, L, restarts, iterations, seed=t).d
                           for L in (cube, _flip_hull(K.vertices)))
            # below the search noise floor K is a linear image of an unconditional body
            ratio = dP / (dhat - 1.0) if dhat - 1.0 > 1e-6 else None
            if ratio is not None:
                ratio_min[eps] = min(ratio_min.get(eps, np.inf), ratio)
            worst = min(worst, dP)
            rows.append({"eps": eps, "trial": t, "P": P, "delta_P": dP, "d_hat_minus_1": dhat - 1.0,
                         "ratio": ratio})
    ratios_ok = all(v > 0 for v in ratio_min.values())
    report = CheckReport.compare(
        f"stability_n{n}", worst, 0.0, ">=", 1e-9 * target, relative=False, seed=seed,
        samples=trials, require=ratios_ok,
        note="empirical probe; d_hat is a search upper bound",
        details={"min_ratio_per_eps": {str(k): v for k, v in ratio_min.items()},
                 "defined_ratios": sum(r["ratio"] is not None for r in rows)})
    return StabilityResult(rows, report)


def section_mahler_check(K: Body, axis: int, expected: Optional[float] = None) -> CheckReport:
    """P(K cap e_axis-perp) against ``expected`` (default 4^{n-1}/(n-1)!)."""
    n = K.dim
    if not 0 <= axis < n:
        raise InputError("section_mahler_check: axis out of range")
    S = central_section(K, np.eye(n)[axis])
    rhs = mahler_lower(n - 1) if expected is None else expected
    return CheckReport.compare(f"section_mahler_e{axis + 1}", mahler(S), rhs, "=", 1e-9, inputs=(K,))
