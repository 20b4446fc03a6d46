from math import factorial, pi

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ball_volume, polar_polygon_area, shoelace
from volprod.bodies import (Interval, LinearImage, Zonotope, ball, cross_polytope, cube, double_cone, gauge,
                            hexagon, random_matrix, random_vpolytope, random_zonotope, rotation, square_pyramid)
from volprod.errors import InputError, PreconditionError
from volprod.products import (CONJECTURAL, lemma33_find_x0, lemma33_identity, lemma34_check, lemma35_check,
                              mahler, mahler_estimate, mahler_invariance_check, mahler_lower, mahler_mc,
                              santalo_check, zonoid_recursion_check)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_mahler_cube_and_cross(n):
    assert mahler(cube(n)) == pytest.approx(4.0 ** n / factorial(n), rel=1e-12)
    assert mahler(cross_polytope(n)) == pytest.approx(4.0 ** n / factorial(n), rel=1e-12)
    assert mahler_lower(n) == pytest.approx(4.0 ** n / factorial(n))


def test_mahler_examples():
    assert mahler(cube(3)) == pytest.approx(32 / 3)
    assert mahler(ball(2)) == pytest.approx(pi ** 2)
    assert mahler(square_pyramid()) == pytest.approx(32 / 3)
    assert mahler(double_cone()) == pytest.approx((2 * pi / 3) * (2 * pi))


def test_mahler_polygons_against_shoelace(rng):
    for _ in range(8):
        K = random_vpolytope(rng, 2, 5)
        want = shoelace(K.vertices) * polar_polygon_area(K.vertices)
        assert mahler(K) == pytest.approx(want, rel=1e-7)


def test_mahler_mc_agrees():
    est = mahler_mc(hexagon(), 400_000, 3)
    assert abs(est.value - 9.0) <= 4 * est.std_error
    assert mahler_estimate(hexagon(), "exact").std_error == 0.0


def test_santalo_examples():
    up, low = santalo_check(ball(3))
    assert up.passed and up.equal and up.lhs == pytest.approx(ball_volume(3) ** 2)
    up, low = santalo_check(cross_polytope(2))
    assert low.passed and low.equal and low.lhs == pytest.approx(8.0)
    up, low = santalo_check(hexagon())
    assert low.passed and not low.equal and low.lhs == pytest.approx(9.0)
    assert up.name == "santalo-upper" and low.name == "santalo-lower"


def test_santalo_lower_is_flagged_conjectural_off_the_proven_classes(rng):
    K = random_vpolytope(rng, 3, 5)
    _, low = santalo_check(K)
    assert low.note == CONJECTURAL
    _, low = santalo_check(hexagon())
    assert low.note == ""


def test_santalo_mc_route():
    up, low = santalo_check(ball(2), method="mc", samples=200_000, seed=4)
    assert up.passed and low.passed and up.samples == 200_000


def test_invariance_examples():
    assert mahler_invariance_check(cube(2), np.diag([2.0, 0.5])).passed
    assert mahler_invariance_check(ball(2), rotation(0.7)).passed
    assert mahler_invariance_check(cross_polytope(2), np.eye(2)).details["P(K*)"] == pytest.approx(8.0)
    rep = mahler_invariance_check(hexagon(), np.diag([2.0, 0.5]), seed=1, method="mc", samples=100_000)
    assert rep.passed
    with pytest.raises(InputError):
        mahler_invariance_check(cube(2), np.zeros((2, 2)))


def test_averaging_identity_square():
    # Z* = diamond: 3 * 4 * int_diamond |y_1| = 12 * 2/3 = 8 per atom, four atoms of weight 1
    rep = lemma33_identity(Zonotope(np.eye(2)))
    assert rep.lhs == pytest.approx(32.0, rel=1e-12) and rep.rhs == pytest.approx(32.0, rel=1e-12)
    mc = lemma33_identity(Zonotope(np.eye(2)), 200_000, 0, method="mc")
    assert mc.passed and abs(mc.lhs - 32.0) <= mc.tolerance


def test_averaging_identity_hexagon_both_routes():
    ex = lemma33_identity(hexagon())
    assert ex.passed
    mc = lemma33_identity(hexagon(), 200_000, 1, method="mc")
    assert mc.passed and abs(mc.lhs - ex.lhs) <= mc.tolerance


def test_averaging_identity_rejects_one_dimensional():
    with pytest.raises(InputError):
        lemma33_identity(Zonotope([[1.0]]))


def test_x0_selection_examples():
    x0, rep = lemma33_find_x0(Zonotope(np.eye(2)))
    assert np.allclose(x0, [1, 0]) and rep.passed and rep.equal
    x0, rep = lemma33_find_x0(hexagon())
    assert rep.passed
    x0, rep = lemma33_find_x0(Zonotope([[2.0, 0.0], [0.0, 1.0]]))
    assert rep.passed


def test_moment_inequality_1d_examples():
    a = lemma34_check(lambda t: max(1 - t, 0.0), 1.0, 1.0)
    assert a.lhs == pytest.approx(1 / 6, abs=1e-12) and a.rhs == pytest.approx(1 / 6, abs=1e-12) and a.equal
    b = lemma34_check(lambda t: max(1 - t * t, 0.0), 1.0, 1.0)
    assert b.lhs == pytest.approx(0.25, abs=1e-12) and b.rhs == pytest.approx(8 / 27, abs=1e-12)
    assert b.passed and not b.equal
    c = lemma34_check(lambda t: max(1 - 2 * t, 0.0) ** 2, 2.0, 0.5)
    assert c.lhs == pytest.approx(1 / 48, abs=1e-12) and c.rhs == pytest.approx(1 / 48, abs=1e-12) and c.equal


def test_moment_inequality_1d_rejects_nonconcave_profile():
    with pytest.raises(PreconditionError):
        lemma34_check(lambda t: float(np.exp(-5 * t) * (1 + 0.5 * np.sin(20 * t))), 1.0, 1.0)


@settings(max_examples=25)
@given(st.floats(0.2, 5.0), st.floats(0.3, 4.0))
def test_moment_inequality_1d_equality_family(a, p):
    rep = lemma34_check(lambda t: max(1 - a * t, 0.0) ** p, p, 1.0 / a)
    assert rep.passed and rep.equal


@pytest.mark.parametrize("K,x,lhs,rhs,equal", [
    (ball(2), [0.6, 0.8], 4 / 3, pi ** 2 / 6, False),
    (cross_polytope(2), [0, 1], 2 / 3, 2 / 3, True),
    (double_cone(), [0, 0, 1], pi / 6, pi / 6, True),
    (square_pyramid(), [0, 0, 1], 2 / 3, 2 / 3, True),
])
def test_section_inequality_cases(K, x, lhs, rhs, equal):
    rep = lemma35_check(K, x)
    assert rep.lhs == pytest.approx(lhs, rel=1e-9) and rep.rhs == pytest.approx(rhs, rel=1e-9)
    assert rep.passed and rep.equal == equal
    mc = lemma35_check(K, x, 200_000, 5, method="mc")
    assert mc.passed and abs(mc.lhs - lhs) <= 4 * mc.tolerance


def test_section_inequality_profile_route():
    rep = lemma35_check(double_cone(), [0, 0, 1], 400_000, 2, method="profile")
    assert rep.passed


def test_zonoid_recursion_examples():
    rep = zonoid_recursion_check(Zonotope(np.eye(3)))
    assert rep.passed and rep.lhs == pytest.approx(32 / 3)
    assert all(link["equal"] for link in rep.details["links"])
    assert rep.details["chain"] == pytest.approx([32 / 3, 32 / 3, 32 / 3])
    hx = zonoid_recursion_check(hexagon())
    assert hx.passed and hx.lhs == pytest.approx(9.0) and hx.details["chain"][-1] == pytest.approx(8.0)
    assert zonoid_recursion_check(Zonotope([[1, 0], [0, 1], [1, 1], [1, -1.0]])).passed


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_mahler_bounds_on_random_zonotopes(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 2
    Z = random_zonotope(rng, n, n + 2)
    p = mahler(Z)
    assert mahler_lower(n) * (1 - 1e-9) <= p <= ball_volume(n) ** 2 * (1 + 1e-9)
    T = random_matrix(rng, n)
    assert mahler(LinearImage(T, Z)) == pytest.approx(p, rel=1e-9)


def test_interval_mahler():
    assert mahler(Interval(0.3)) == pytest.approx(4.0)
