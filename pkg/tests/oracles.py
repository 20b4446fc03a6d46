"""Independent reference computations used by the tests.

Nothing here imports the package; each oracle takes plain arrays.
"""
from itertools import product
from math import gamma, pi

import numpy as np


def ball_volume(n):
    return pi ** (n / 2) / gamma(n / 2 + 1)


def minkowski_points(generators):
    """All sign sums of the generators (the zonotope's candidate vertices)."""
    g = np.asarray(generators, dtype=float)
    signs = np.array(list(product((-1.0, 1.0), repeat=len(g))))
    return signs @ g


def shoelace(points):
    """Area of the convex hull of planar points (monotone chain, then shoelace)."""
    x, y = planar_hull(points).T
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _monotone_chain(points):
    pts = sorted(set(points))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-12:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-12:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def planar_hull(points):
    return np.array(_monotone_chain([tuple(x) for x in np.asarray(points, dtype=float)]))


def polar_polygon_area(vertices):
    """Area of the polar of a symmetric polygon from its radial function 1/h_K(u)."""
    v = np.asarray(vertices, dtype=float)
    theta = np.linspace(0.0, 2 * pi, 400_001)[:-1]
    u = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    h = np.max(u @ v.T, axis=1)
    return 0.5 * np.mean(h ** -2.0) * 2 * pi


def mc_volume(indicator, box, n, samples, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box, box, (samples, n))
    hits = indicator(x).astype(float)
    scale = (2 * box) ** n
    return scale * hits.mean(), scale * hits.std(ddof=1) / np.sqrt(samples)
