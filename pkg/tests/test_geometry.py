import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab import geometry as geo
from horolab.errors import ContractError, DegeneratePointError, DomainError

from conftest import dims, random_boundary, random_interior, random_isometry, seeds


def test_identity_fixes_points():
    x = np.array([0.3, -0.2, 0.5])
    assert np.allclose(geo.apply_isometry(geo.Isometry.identity(), x), x)
    xi = np.array([0.6, 0.8])
    assert np.allclose(geo.apply_isometry(geo.Isometry.identity(), xi), xi)


def test_diagonal_moves_origin_by_two():
    g = geo.diagonal(math.e)
    p = geo.apply_isometry(g, geo.origin(2))
    assert math.isclose(np.linalg.norm(p), math.tanh(1), abs_tol=1e-12)
    assert math.isclose(geo.hyperbolic_distance(p, geo.origin(2)), 2.0, abs_tol=1e-12)


def test_non_unit_determinant_rejected():
    with pytest.raises(ContractError):
        geo.Isometry(np.array([[2, 0], [0, 1]]))


def test_complex_matrix_cannot_act_on_disk():
    g = geo.Isometry(np.array([[1j, 0], [0, -1j]]))
    with pytest.raises(DomainError):
        geo.apply_isometry(g, np.array([0.1, 0.2]))


def test_composition_keeps_unit_determinant():
    rng = np.random.default_rng(3)
    g = geo.Isometry.identity()
    for _ in range(200):
        g = g @ random_isometry(rng, 3, spread=0.5)
        m = g.matrix
        # rounding in ad - bc scales with the entries
        assert abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] - 1) <= 1e-12 * max(1.0, np.abs(m).max() ** 2)
    h = geo.Isometry.identity()
    for _ in range(50):
        h = h @ random_isometry(rng, 2)
    assert h.real
    assert np.abs(h.matrix.imag).max() <= 1e-12


def test_distance_examples():
    assert geo.hyperbolic_distance(np.zeros(3), np.zeros(3)) == 0
    y = np.array([math.tanh(0.5), 0.0])
    assert math.isclose(geo.hyperbolic_distance(np.zeros(2), y), 1.0, abs_tol=1e-12)
    with pytest.raises(DomainError):
        geo.hyperbolic_distance(np.zeros(2), np.array([1.0, 0.0]) * 1.0000001)


def test_chordal_examples():
    e = np.eye(3)
    assert geo.chordal_distance(e[0], e[0]) == 0
    assert math.isclose(geo.chordal_distance(e[0], -e[0]), 2.0)
    assert math.isclose(geo.chordal_distance(e[0], e[1]), math.sqrt(2))


@given(seeds, dims)
def test_inverse_cancels(seed, dim):
    rng = np.random.default_rng(seed)
    g = random_isometry(rng, dim)
    x = random_interior(rng, dim)
    assert np.allclose(geo.apply_isometry(g.inverse(), geo.apply_isometry(g, x)), x, atol=1e-10)
    xi = random_boundary(rng, dim)
    assert np.allclose(geo.apply_isometry(g.inverse(), geo.apply_isometry(g, xi)), xi, atol=1e-10)


@given(seeds, dims)
def test_isometry_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    g = random_isometry(rng, dim)
    x, y = random_interior(rng, dim), random_interior(rng, dim)
    d = geo.hyperbolic_distance(x, y)
    assert abs(geo.hyperbolic_distance(geo.apply_isometry(g, x), geo.apply_isometry(g, y)) - d) <= 1e-9


@given(seeds, dims)
def test_distance_is_a_metric(seed, dim):
    rng = np.random.default_rng(seed)
    x, y, z = (random_interior(rng, dim) for _ in range(3))
    dxy = geo.hyperbolic_distance(x, y)
    assert math.isclose(dxy, geo.hyperbolic_distance(y, x), abs_tol=1e-12)
    assert dxy <= geo.hyperbolic_distance(x, z) + geo.hyperbolic_distance(z, y) + 1e-9


@given(seeds, dims)
def test_distance_from_origin_is_twice_atanh(seed, dim):
    x = random_interior(np.random.default_rng(seed), dim, spread=20.0)
    assert abs(geo.hyperbolic_distance(np.zeros(dim), x) - 2 * math.atanh(np.linalg.norm(x))) <= 1e-10


@given(seeds, dims)
def test_stretch_chain_and_inverse(seed, dim):
    rng = np.random.default_rng(seed)
    g, h = random_isometry(rng, dim), random_isometry(rng, dim)
    xi = random_boundary(rng, dim)
    lhs = geo.boundary_stretch(g @ h, xi)
    rhs = geo.boundary_stretch(g, geo.apply_isometry(h, xi)) * geo.boundary_stretch(h, xi)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, lhs)
    inv = geo.boundary_stretch(g.inverse(), geo.apply_isometry(g, xi))
    assert abs(inv * geo.boundary_stretch(g, xi) - 1) <= 1e-9
    assert geo.boundary_stretch(geo.Isometry.identity(), xi) == pytest.approx(1.0, abs=1e-15)


@given(seeds, dims)
def test_stretch_finite_difference(seed, dim):
    rng = np.random.default_rng(seed)
    g = random_isometry(rng, dim, spread=1.5)
    xi = random_boundary(rng, dim)
    tangent = rng.normal(size=dim)
    tangent -= (tangent @ xi) * xi
    tangent /= np.linalg.norm(tangent)
    eps = 1e-6
    xe = math.cos(eps) * xi + math.sin(eps) * tangent
    ratio = geo.chordal_distance(geo.apply_isometry(g, xi), geo.apply_isometry(g, xe)) / geo.chordal_distance(xi, xe)
    assert abs(ratio - geo.boundary_stretch(g, xi)) <= 1e-4 * max(1.0, ratio)


@given(seeds, dims, st.floats(0, 15), st.floats(0, 15))
def test_ray_unit_speed(seed, dim, t1, t2):
    rng = np.random.default_rng(seed)
    ray = geo.GeodesicRay(random_interior(rng, dim), random_boundary(rng, dim))
    assert np.allclose(geo.ray_point(ray, 0.0), ray.base, atol=1e-12)
    d = geo.hyperbolic_distance(geo.ray_point(ray, t1), geo.ray_point(ray, t2))
    assert abs(d - abs(t1 - t2)) <= 1e-9 * max(1.0, abs(t1 - t2) * 1e-3 + 1)


def test_radial_ray_formula():
    xi = np.array([0.6, 0.8])
    ray = geo.GeodesicRay(np.zeros(2), xi)
    assert np.allclose(geo.ray_point(ray, 3.0), math.tanh(1.5) * xi)
    with pytest.raises(DomainError):
        geo.ray_point(ray, -1.0)


@given(seeds, dims, st.floats(0, 12))
def test_busemann_along_ray(seed, dim, t):
    rng = np.random.default_rng(seed)
    ray = geo.GeodesicRay(random_interior(rng, dim), random_boundary(rng, dim))
    assert abs(geo.busemann(ray, ray.base)) <= 1e-12
    assert abs(geo.busemann(ray, geo.ray_point(ray, t)) + t) <= 1e-9


@given(seeds, dims)
def test_busemann_truncated_limit(seed, dim):
    rng = np.random.default_rng(seed)
    ray = geo.GeodesicRay(random_interior(rng, dim, 1.0), random_boundary(rng, dim))
    x = random_interior(rng, dim, 2.0)
    T = 40.0
    # the far ray point is formed from the frame so it keeps full precision
    m = ray.frame() @ np.diag([math.exp(T / 2), math.exp(-T / 2)])
    tx = geo.translation_to(x).matrix
    limit = geo.displacement(np.linalg.inv(tx) @ m) - T
    assert abs(limit - geo.busemann(ray, x)) <= 1e-8


@given(seeds, dims)
def test_busemann_cocycle(seed, dim):
    rng = np.random.default_rng(seed)
    xi = random_boundary(rng, dim)
    r1 = geo.GeodesicRay(random_interior(rng, dim), xi)
    r2 = geo.GeodesicRay(random_interior(rng, dim), xi)
    x, y = random_interior(rng, dim), random_interior(rng, dim)
    d1 = geo.busemann(r1, x) - geo.busemann(r1, y)
    d2 = geo.busemann(r2, x) - geo.busemann(r2, y)
    assert abs(d1 - d2) <= 1e-9


@given(seeds, dims, st.floats(0.01, 20), st.floats(0.01, 5), st.floats(0, 1))
def test_ray_shadow_consistency(seed, dim, t, c, kappa):
    xi = random_boundary(np.random.default_rng(seed), dim)
    z = geo.ray_point(geo.GeodesicRay(np.zeros(dim), xi), t)
    assert geo.shadow_contains(z, c, kappa, xi)


def test_shadow_threshold():
    xi = np.array([1.0, 0.0, 0.0])
    z = (1 - 1e-4) * xi
    for kappa, c in ((0.0, 1.0), (0.5, 2.0), (1.0, 0.5)):
        edge = c * 1e-4 ** (1 / (1 + kappa))
        for off, expect in ((0.9 * edge, True), (1.1 * edge, False)):
            eta = np.array([math.cos(2 * math.asin(off / 2)), math.sin(2 * math.asin(off / 2)), 0.0])
            assert geo.shadow_contains(z, c, kappa, eta) is expect
    with pytest.raises(DegeneratePointError):
        geo.shadow_contains(np.zeros(3), 1.0, 0.0, xi)


def test_orbit_shadow_matches_point_shadow():
    rng = np.random.default_rng(11)
    for _ in range(50):
        g = random_isometry(rng, 3, spread=6.0)
        xi = random_boundary(rng, 3)
        z = geo.orbit_point(g, 3)
        if np.linalg.norm(z) < 1e-9:
            continue
        assert geo.shadow_contains(z, 3.0, 0.5, xi) == geo.shadow_contains_orbit(g, 3, 3.0, 0.5, xi)
