import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from horolab import coded as cd
from horolab import geometry as geo
from horolab import groups as gr
from horolab.errors import DomainError
from horolab.words import (
    count_reduced, cyclically_reduced, format_word, has_all_subwords, inverse_word, is_reduced,
    parse_word, reduce_word, reduced_words,
)

raw = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=16)


@given(raw)
def test_reduce_is_idempotent_and_reduced(w):
    r = reduce_word(w)
    assert is_reduced(r) and reduce_word(r) == r
    assert reduce_word(tuple(w) + inverse_word(tuple(w))) == ()


@given(raw)
def test_format_parse_round_trip(w):
    r = reduce_word(w)
    assert parse_word(format_word(r, ["a", "b", "c"]), ["a", "b", "c"]) == r


@given(raw)
def test_cyclic_reduction(w):
    c = cyclically_reduced(w)
    assert is_reduced(c) and (len(c) <= 1 or c[0] != -c[-1])


def test_counts():
    for k in range(5):
        assert sum(1 for w in reduced_words(3, k) if len(w) == k) == count_reduced(3, k)
    pairs = [w for w in reduced_words(2, 2) if len(w) == 2]
    assert has_all_subwords(sum(pairs, ()), 2)
    assert not has_all_subwords((1, 2, 1, 2), 2)
    with pytest.raises(DomainError):
        reduce_word((1, 0))


def test_coded_point_is_fixed_point(schottky2):
    x = cd.CodedPoint(schottky2, (1, 2, -1, 2))
    g = schottky2.element((1, 2, -1, 2))
    _, att, _ = gr.axis_data(g, 2)
    assert np.allclose(x.point(), att, atol=1e-12)
    with pytest.raises(DomainError):
        cd.CodedPoint(schottky2, (1, -1))


def test_coded_point_in_cylinder(expl1):
    x = cd.CodedPoint(expl1, (3, 2), preperiod=(1, 2))
    for n in (1, 2):
        assert expl1.cylinder(x.prefix(n)).contains(x.point(), 1e-12)


def test_busemann_word_matches_float(schottky2):
    x = cd.CodedPoint(schottky2, (1, 2, 2))
    xi = x.point()
    for w in [(), (1,), (1, 2), (2, -1, -1), (1, 2, 2, 1)]:
        m = schottky2.element(w).matrix
        assert cd.busemann_word(x, schottky2, w) == pytest.approx(geo.busemann_at_orbit(xi, m), abs=1e-9)


def test_ray_frame_matches_ray(schottky2):
    x = cd.CodedPoint(schottky2, (2, 1))
    ray = geo.GeodesicRay(np.zeros(2), x.point())
    for t in (0.0, 3.0, 9.0):
        n, a = cd.ray_frame(x, t)
        p = schottky2.element(x.prefix(n)).matrix
        y = geo.orbit_point(p @ a, 2)
        assert geo.hyperbolic_distance(y, geo.ray_point(ray, t)) <= 1e-8


def test_phi_value_matches_enumeration(schottky2):
    ball = gr.enumerate_orbit(schottky2, np.zeros(2), 21.0)
    x = cd.CodedPoint(schottky2, (1, -2, -2))
    a, b = geo.GeodesicRay(np.zeros(2), x.point()), None
    for t in (2.0, 5.5, 10.0):
        d, w = cd.phi_value(schottky2, x, t)
        y = geo.ray_point(a, t)
        brute = min(geo.hyperbolic_distance(y, p) for p in ball.points)
        assert d == pytest.approx(brute, abs=1e-8)


def test_horoball_depth_matches_enumeration(expl1):
    ball = gr.enumerate_orbit(expl1, np.zeros(3), 14.0)
    spec = expl1.homomorphisms["phi"]
    x = cd.CodedPoint(expl1, (1, 2, 1, 3))
    sub = gr.suborbit(ball, spec)
    from horolab.classify import orbit_busemann

    brute = float(orbit_busemann(sub, x).min())
    b, w, _ = cd.horoball_depth(expl1, x, 14.0, kernel=spec)
    assert b == pytest.approx(brute, abs=1e-8)
    assert gr.kernel_contains(spec, w)


def test_conjugate_seeds_in_kernel(expl1):
    spec = expl1.homomorphisms["phi"]
    x = cd.CodedPoint(expl1, (1, 2, 1, 3))
    for s in cd.conjugate_seeds(x, spec, [1], 4):
        assert gr.kernel_contains(spec, reduce_word(s))


def test_word_point(schottky2):
    x = cd.WordPoint(schottky2, lambda i: 1 if i % 3 else 2, name="periodic")
    y = cd.CodedPoint(schottky2, (2, 1, 1))
    assert np.allclose(x.point(), y.point(), atol=1e-12)
    assert math.isclose(x.level(6), y.level(6), abs_tol=1e-9)
