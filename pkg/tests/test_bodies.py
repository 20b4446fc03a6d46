import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import minkowski_points
from volprod.bodies import (EuclidBall, HPolytope, Interval, L1Sum, LinearImage, LinfSum, VPolytope, Zonotope,
                            ball, body_from_json, catalog, cross_polytope, cube, double_cone, gauge, hexagon,
                            load_body, member, random_matrix, random_zonotope, support, zonotope_measure)
from volprod.errors import InputError

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_support_examples():
    assert support(cube(2), [1.0, 1.0]) == pytest.approx(2.0)
    assert support(hexagon(), [1.0, 0.0]) == pytest.approx(2.0)
    assert support(ball(2), [3.0, 4.0]) == pytest.approx(5.0)


def test_gauge_examples():
    assert gauge(cube(2), [0.5, -0.25]) == pytest.approx(0.5)
    assert gauge(double_cone(), [0.3, 0.4, 0.5]) == pytest.approx(1.0)
    assert gauge(cross_polytope(2), [0.5, 0.5]) == pytest.approx(1.0)
    assert gauge(cube(3), np.zeros(3)) == 0.0


def test_member_examples():
    assert member(cube(2), [1.0, 1.0], 0.0)
    assert not member(cross_polytope(2), [1.0, 1.0], 0.0)
    assert member(ball(2), [0.6, 0.8], 1e-12)


def test_dimension_mismatch_is_input_error():
    with pytest.raises(InputError):
        support(cube(2), [1.0, 2.0, 3.0])
    with pytest.raises(InputError):
        gauge(ball(3), [1.0, 2.0])


def test_zonotope_support_matches_vertex_max(rng):
    for _ in range(10):
        Z = random_zonotope(rng, 3, 5)
        y = rng.standard_normal((50, 3))
        brute = np.max(y @ minkowski_points(Z.generators).T, axis=1)
        assert np.allclose(support(Z, y), brute, rtol=1e-12)


def test_zonotope_measure_reconstructs_support(rng):
    Z = hexagon()
    mu = zonotope_measure(Z)
    assert len(mu.weights) == 6
    y = rng.standard_normal((100, 2))
    assert np.allclose(mu.support(y), support(Z, y), rtol=1e-12)
    one = zonotope_measure(Zonotope([[2.0]]))
    assert np.allclose(one.support([[1.5]]), [3.0])


def test_zero_generator_rejected():
    with pytest.raises(InputError):
        Zonotope([[1.0, 0.0], [0.0, 0.0]])


def test_asymmetric_vpolytope_rejected():
    with pytest.raises(InputError):
        VPolytope([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])


def test_rank_deficient_rejected():
    with pytest.raises(InputError):
        VPolytope([[1.0, 1.0], [-1.0, -1.0]])


def test_linear_image_support_and_gauge(rng):
    T = random_matrix(rng, 2)
    K = LinearImage(T, cube(2))
    y = rng.standard_normal((30, 2))
    assert np.allclose(support(K, y), support(cube(2), y @ T), rtol=1e-12)
    x = rng.standard_normal((30, 2))
    assert np.allclose(gauge(K, x), gauge(cube(2), np.linalg.solve(T, x.T).T), rtol=1e-10)


def test_sums_match_block_norms(rng):
    K = L1Sum((ball(2), Interval(2.0)))
    L = LinfSum((ball(2), Interval(2.0)))
    x = rng.standard_normal((40, 3))
    r = np.linalg.norm(x[:, :2], axis=1)
    assert np.allclose(gauge(K, x), r + np.abs(x[:, 2]) / 2)
    assert np.allclose(gauge(L, x), np.maximum(r, np.abs(x[:, 2]) / 2))
    assert np.allclose(support(K, x), np.maximum(r, 2 * np.abs(x[:, 2])))
    assert np.allclose(support(L, x), r + 2 * np.abs(x[:, 2]))


@pytest.mark.parametrize("name", sorted(catalog()))
def test_json_round_trip(name, tmp_path):
    K = catalog()[name]
    path = tmp_path / "k.json"
    path.write_text(json.dumps(K.to_json()))
    L = load_body(path)
    y = np.random.default_rng(1).standard_normal((20, K.dim))
    assert np.allclose(support(K, y), support(L, y), rtol=1e-12)


def test_body_json_errors():
    with pytest.raises(InputError):
        body_from_json({"dim": 2})
    with pytest.raises(InputError):
        body_from_json({"kind": "zonotope"})
    with pytest.raises(InputError):
        body_from_json({"kind": "torus"})


def test_hpolytope_square():
    K = HPolytope([[1.0, 0.0], [0.0, 1.0]])
    assert support(K, [1.0, 1.0]) == pytest.approx(2.0)
    assert gauge(K, [0.5, -0.75]) == pytest.approx(0.75)


@given(arrays(float, 3, elements=finite), st.floats(0.01, 10))
def test_gauge_is_positively_homogeneous(x, t):
    for K in (cube(3), ball(3), double_cone(), cross_polytope(3), Zonotope(np.eye(3) + 0.2)):
        assert gauge(K, t * x) == pytest.approx(t * gauge(K, x), rel=1e-9, abs=1e-12)
        assert gauge(K, -x) == pytest.approx(gauge(K, x), rel=1e-12, abs=1e-15)


@given(arrays(float, 2, elements=finite), arrays(float, 2, elements=finite))
def test_support_is_subadditive(a, b):
    for K in catalog().values():
        if K.dim != 2:
            continue
        assert support(K, a + b) <= support(K, a) + support(K, b) + 1e-9 * (1 + np.abs(a).sum() + np.abs(b).sum())


@given(arrays(float, 3, elements=finite))
def test_cauchy_schwarz_type_bound(y):
    # <x, y> <= ||x||_K h_K(y) with x = y
    for K in (cube(3), double_cone(), Zonotope(np.eye(3) + 0.2)):
        assert y @ y <= gauge(K, y) * support(K, y) * (1 + 1e-9) + 1e-12


def test_vectorized_shapes():
    y = np.ones((7, 3))
    assert support(cube(3), y).shape == (7,)
    assert isinstance(support(cube(3), y[0]), float)
    assert member(cube(3), y * 0.5).all()
