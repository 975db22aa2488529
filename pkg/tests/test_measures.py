import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab import geometry as geo
from horolab import groups as gr
from horolab import measures as ms
from horolab.errors import ConstructionError, DomainError, InsufficientDataError


def trivial_orbit(x, R=10.0):
    x = np.asarray(x, float)
    return gr.OrbitSet(x, [()], np.eye(2, dtype=complex)[None], np.zeros(1), R, True)


@pytest.fixture(scope="module")
def s2_ball(schottky2):
    return gr.enumerate_orbit(schottky2, np.zeros(2), 25.0)


@pytest.fixture(scope="module")
def cyc_ball(cyclic):
    return gr.enumerate_orbit(cyclic, np.zeros(2), 110.0)


def test_trivial_series():
    p = ms.poincare_partial(trivial_orbit(np.zeros(2)), 0.7, z=np.array([math.tanh(0.5), 0.0]))
    assert np.allclose(p.values[p.radii >= 1.0], math.exp(-0.7))
    assert np.all(p.values[p.radii < 1.0] == 0)


def test_cyclic_series(cyclic, cyc_ball):
    ell = gr.min_translation_length(cyclic)
    s = 0.8
    p = ms.poincare_partial(cyc_ball, s)
    for R, v in zip(p.radii, p.values):
        n = math.floor(R / ell + 1e-12)
        assert v == pytest.approx(1 + 2 * sum(math.exp(-s * k * ell) for k in range(1, n + 1)), rel=1e-9)
    q = math.exp(-s * ell)
    assert p.values[-1] == pytest.approx(1 + 2 * q / (1 - q), rel=1e-12)


@settings(max_examples=30)
@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_series_monotone(s1, s2):
    from horolab import config

    ball = _cached_ball()
    lo, hi = sorted((s1, s2))
    a, b = ms.poincare_partial(ball, lo), ms.poincare_partial(ball, hi)
    assert np.all(np.diff(a.values) >= 0) and np.all(np.diff(b.values) >= 0)
    assert np.all(a.values >= b.values - 1e-12)


_BALL = {}


def _cached_ball():
    from horolab import config

    if "s2" not in _BALL:
        _BALL["s2"] = gr.enumerate_orbit(config.load_presentation("schottky2"), np.zeros(2), 18.0)
    return _BALL["s2"]


def test_exponent_cyclic(cyc_ball):
    d, se = ms.critical_exponent_estimate(cyc_ball, (60, 110))
    assert d <= 0.02


def test_exponent_positive_and_near_oracle(schottky2, s2_ball):
    d, se = ms.critical_exponent_estimate(s2_ball, (12.5, 25))
    assert d > 0
    assert abs(d - ms.exponent_oracle(schottky2)) <= 0.05


def test_exponent_errors(s2_ball, cyclic):
    with pytest.raises(InsufficientDataError):
        ms.critical_exponent_estimate(s2_ball, (10, 13))
    small = gr.enumerate_orbit(cyclic, np.zeros(2), 8.0)
    with pytest.raises(InsufficientDataError):
        ms.critical_exponent_estimate(small, (1, 8))


def test_divergence_examples(cyc_ball):
    assert ms.divergence_diagnostic(ms.poincare_partial(cyc_ball, 1e-9)).label == "diverging-like"
    assert ms.divergence_diagnostic(ms.poincare_partial(cyc_ball, 0.5)).label == "converging-like"


def test_divergence_far_above(s2_ball):
    assert ms.divergence_diagnostic(ms.poincare_partial(s2_ball, 3.0)).label == "converging-like"


def test_patterson_trivial():
    mu = ms.patterson_approx(trivial_orbit(np.array([0.3, 0.4])), 1.0, delta_hat=0.0)
    assert len(mu) == 1 and mu.total_mass == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(mu.points[0], [0.6, 0.8])


def test_patterson_cyclic_symmetry(cyclic):
    ball = gr.enumerate_orbit(cyclic, np.zeros(2), 40.0)
    mu = ms.patterson_approx(ball, 1.0, delta_hat=0.0)
    right = mu.weights[mu.points[:, 0] > 0].sum()
    left = mu.weights[mu.points[:, 0] < 0].sum()
    assert right == pytest.approx(left, abs=1e-12)


def test_patterson_mass_and_support(schottky2, expl1, s2_ball):
    d, se = ms.critical_exponent_estimate(s2_ball, (12.5, 25))
    mu = ms.patterson_approx(s2_ball, d + 0.1, delta_hat=d, stderr=se)
    assert abs(mu.total_mass - 1) <= 1e-12
    assert all(schottky2.in_limit_enclosure(p) for p in mu.points)
    ball = gr.enumerate_orbit(expl1, np.zeros(3), 15.0)
    nu = ms.patterson_approx(ball, 0.5, delta_hat=0.3)
    assert abs(nu.total_mass - 1) <= 1e-12
    assert all(expl1.in_limit_enclosure(p) for p in nu.points)


def test_patterson_rejects_low_exponent(s2_ball):
    with pytest.raises(DomainError):
        ms.patterson_approx(s2_ball, 0.3, delta_hat=0.33, stderr=0.01)


def test_defect_identity(s2_ball, schottky2):
    mu = ms.patterson_approx(s2_ball, 0.45, delta_hat=0.33)
    caps = [schottky2.cylinder(w) for w in ((1,), (2,), (-2,))]
    assert ms.conformal_defect(mu, geo.Isometry.identity(), caps).max_defect == pytest.approx(0, abs=1e-12)


def test_defect_trivial_group():
    mu = ms.patterson_approx(trivial_orbit(np.array([0.3, 0.4])), 1.0, delta_hat=0.0)
    cap = gr.Cap(np.array([0.6, 0.8]), 0.1)
    assert ms.conformal_defect(mu, geo.Isometry.identity(), [cap]).max_defect == 0


def test_defect_skips_light_boxes(s2_ball, schottky2):
    mu = ms.patterson_approx(s2_ball, 0.45, delta_hat=0.33)
    empty = gr.Cap(np.array([math.cos(0.7), math.sin(0.7)]), 0.01)
    with pytest.warns(RuntimeWarning):
        rep = ms.conformal_defect(mu, schottky2.generators[0], [empty])
    assert rep.skipped == 1


def test_defect_decreases_with_radius(schottky2):
    ball = gr.enumerate_orbit(schottky2, np.zeros(2), 25.0)
    d, se = ms.critical_exponent_estimate(ball, (12.5, 25))
    caps = [schottky2.cylinder(w) for w in ((2,), (-2,), (2, 2), (-2, -2), (2, 1), (-2, 1))]
    g = schottky2.generators[0]
    defects = [
        ms.conformal_defect(ms.patterson_approx(ball.within(R), d + 0.1, delta_hat=d, stderr=se), g, caps).max_defect
        for R in (15, 20, 25)
    ]
    assert defects[0] > defects[1] > defects[2]


def test_ending_measure_cyclic(cyclic):
    ball = gr.enumerate_orbit(cyclic, np.zeros(2), 40.0)
    xs = [math.tanh(n / 2) * np.array([0.0, 1.0]) for n in range(1, 7)]
    mu = ms.ending_measure_approx(ball, 1.0, xs)
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)
    stats = mu.meta["cauchy"]
    assert all(a > b for a, b in zip(stats, stats[1:]))


def test_ending_measure_trivial():
    xs = [math.tanh(n / 2) * np.array([0.6, 0.8]) for n in (2, 4, 8)]
    mu = ms.ending_measure_approx(trivial_orbit(np.zeros(2)), 1.0, xs)
    assert len(mu) == 1 and np.allclose(mu.points[0], [0.6, 0.8])


def test_ending_measure_rejects_divergent(cyc_ball):
    with pytest.raises(DomainError):
        ms.ending_measure_approx(cyc_ball, 1e-9, [np.array([0.0, 0.5])])


def test_uniform_net(schottky2):
    ball = gr.enumerate_orbit(schottky2, np.zeros(2), 15.0)
    lp = ball.points[1:60] / np.linalg.norm(ball.points[1:60], axis=1)[:, None]
    hull = ms.hull_sample(lp, 15.0, spacing=1.0, max_pairs=80)
    net = ms.build_uniform_net(schottky2, hull, 0.5, 3.0, 15.0)
    cover, sep = ms.check_uniform_net(net, hull)
    assert sep >= 0.5 and cover <= 3.0
    with pytest.raises(DomainError):
        ms.build_uniform_net(schottky2, hull, 3.0, 0.5, 15.0)
    # hull points beyond the net radius are never admitted, so they go uncovered
    with pytest.raises(ConstructionError):
        ms.build_uniform_net(schottky2, hull, 0.5, 3.0, 8.0)


def test_axis_net_and_bounded_type(cyclic):
    ell = gr.min_translation_length(cyclic)
    hull = ms.hull_sample([np.array([1.0, 0.0]), np.array([-1.0, 0.0])], 20.0)
    net = ms.build_uniform_net(cyclic, hull, ell / 2, 3.0, 20.0)
    assert np.allclose(net.points[:, 1], 0, atol=1e-12)
    ratio = ms.bounded_type_ratio(net, [3.0, 5.0, 8.0])
    assert 1.0 <= ratio <= 2.0 + 0.5


def test_extended_series_equals_ordinary(schottky2):
    ball = gr.enumerate_orbit(schottky2, np.zeros(2), 12.0)
    net = ms.UniformNet(ball.points, tuple(ball.words), 0.1, 10.0, 12.0, np.zeros(2))
    a = ms.extended_poincare(net, 0.5)
    b = ms.poincare_partial(ball, 0.5)
    assert np.allclose(a.values, b.values, rtol=1e-12, atol=0)
    assert ms.bounded_type_ratio(net, [2.0, 4.0]) >= 1.0


def test_basepoint_invariance(schottky2):
    z = np.array([0.3, 0.2])
    a = gr.enumerate_orbit(schottky2, np.zeros(2), 25.0)
    b = gr.enumerate_orbit(schottky2, z, 25.0)
    d1, e1 = ms.critical_exponent_estimate(a, (12.5, 25))
    d2, e2 = ms.critical_exponent_estimate(b, (12.5, 25))
    assert abs(d1 - d2) <= 2 * (e1 + e2)


def test_measure_table_header(s2_ball):
    mu = ms.patterson_approx(s2_ball, 0.45, delta_hat=0.33)
    head = mu.table().splitlines()[0]
    assert head.startswith("# s=0.45 R=25") and "provenance=patterson" in head
