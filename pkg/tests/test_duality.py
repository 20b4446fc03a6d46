import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import minkowski_points, planar_hull
from volprod.bodies import (EuclidBall, HPolytope, L1Sum, LinearImage, LinfSum, VPolytope, Zonotope, ball,
                            catalog, cross_polytope, cube, cube_vpolytope, cylinder, double_cone, gauge, hexagon,
                            random_matrix, random_vpolytope, random_zonotope, square_pyramid, support)
from volprod.duality import bipolar_check, enumerate_vertices, hull, polar, to_vpolytope, vertex_set
from volprod.errors import InputError


def _same_body(K, L, rng, count=300):
    x = rng.standard_normal((count, K.dim))
    return np.allclose(gauge(K, x), gauge(L, x), rtol=1e-9, atol=1e-12)


def test_polar_examples(rng):
    assert _same_body(polar(cube(2)), cross_polytope(2), rng)
    P = polar(double_cone())
    assert isinstance(P, LinfSum)
    assert _same_body(P, cylinder(), rng)
    assert _same_body(polar(square_pyramid()), LinfSum((cross_polytope(2), cube(1))), rng)
    assert polar(ball(3)) is not None and _same_body(polar(ball(3)), ball(3), rng)


def test_hull_examples():
    h = hull([[1, 0], [-1, 0], [0, 1], [0, -1], [0.5, 0]])
    assert {tuple(v) for v in h.vertices} == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    sq = hull([[1, 1], [1, -1], [-1, 1], [-1, -1]])
    assert len(sq.vertices) == 4
    assert {tuple(u) for u in sq.facets} == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    hx = hull(minkowski_points([[1, 0], [0, 1], [1, 1]]))
    assert {tuple(v) for v in hx.vertices} == {(2, 2), (0, 2), (-2, 0), (-2, -2), (0, -2), (2, 0)}


def test_hull_rejects_degenerate_input():
    with pytest.raises(InputError, match="rank 1"):
        hull([[1, 1], [-1, -1], [2, 2]])


def test_hull_vertices_match_monotone_chain(rng):
    for _ in range(10):
        pts = rng.standard_normal((30, 2))
        pts = np.vstack([pts, -pts])
        got = {tuple(np.round(v, 12)) for v in hull(pts).vertices}
        want = {tuple(np.round(v, 12)) for v in planar_hull(pts)}
        assert got == want


def test_polar_support_is_gauge_of_polar(rng):
    for K in catalog().values():
        y = rng.standard_normal((100, K.dim))
        assert np.allclose(support(K, y), gauge(polar(K), y), rtol=1e-9, atol=1e-12)


def test_zonotope_polar_vertices_are_facets(rng):
    Z = hexagon()
    P = polar(Z)
    assert isinstance(P, VPolytope)
    # every vertex u of the polar has h_Z(u) = 1
    assert np.allclose(support(Z, P.vertices), 1.0)


@pytest.mark.parametrize("K", [cube(3), hexagon(), ball(4), cube_vpolytope(3), double_cone()])
def test_bipolar_examples(K):
    rep = bipolar_check(K, 500, 0)
    assert rep.passed and rep.lhs <= 1e-9


def test_ball_bipolar_is_exact():
    assert bipolar_check(EuclidBall(4), 500, 3).lhs == 0.0


def test_enumerate_vertices_square():
    v = enumerate_vertices([[1.0, 0.0], [0.0, 1.0]])
    assert {tuple(x) for x in v} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_vertex_set_and_to_vpolytope(rng):
    assert len(vertex_set(cube(3))) == 8
    assert len(vertex_set(cross_polytope(3))) == 6
    for K in (cube(3), square_pyramid(), LinearImage(random_matrix(rng, 2), cube(2)), hexagon()):
        assert _same_body(to_vpolytope(K), K, rng)


def test_polar_of_hpolytope_is_vpolytope(rng):
    H = HPolytope([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    P = polar(H)
    assert isinstance(P, VPolytope)
    assert _same_body(polar(P), H, rng)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_bipolar_random_bodies(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 2
    for K in (random_zonotope(rng, n, n + 2), random_vpolytope(rng, n, n + 3),
              LinearImage(random_matrix(rng, n), ball(n))):
        assert bipolar_check(K, 200, seed).passed


@given(st.integers(0, 10_000))
def test_antitonicity(seed):
    rng = np.random.default_rng(seed)
    K = random_vpolytope(rng, 2, 4)
    L = to_vpolytope(L1Sum((cube(1), cube(1))))
    L = VPolytope(np.vstack([K.vertices, L.vertices * 3.0]))
    u = rng.standard_normal((200, 2))
    assert np.all(support(K, u) <= support(L, u) + 1e-12)
    # K in L gives L* in K*: the smaller body has the larger gauge
    assert np.all(gauge(polar(K), u) <= gauge(polar(L), u) + 1e-9)
    assert np.all(support(polar(L), u) <= support(polar(K), u) + 1e-9)


@given(st.integers(0, 10_000))
def test_polar_of_linear_image(seed):
    rng = np.random.default_rng(seed)
    T = random_matrix(rng, 3)
    K = LinearImage(T, cross_polytope(3))
    y = rng.standard_normal((50, 3))
    # polar(TK) = T^{-T} polar(K): h_{TK}(y) = h_K(T^T y)
    assert np.allclose(gauge(polar(K), y), support(cross_polytope(3), y @ T), rtol=1e-9)
