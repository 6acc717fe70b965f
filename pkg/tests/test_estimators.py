import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import joint_sigma, within_sigmas
from mirrorvis.billiard import Retro, Scene, trace_batch
from mirrorvis.catalog import shipped, two_disc_union
from mirrorvis.estimators import (BLOCK, Custom, OneMinusCos, PowerLaw, angle_function,
                                  convex_resistance, estimate_F, estimate_F_R,
                                  finite_radius_angle, mean_resistance, reduced_quantities,
                                  resistance_scale, simulate)
from mirrorvis.geometry import Ball, Body, Box, Union, boundary_area, disc, empty, volume
from mirrorvis.sampling import PhaseSample
from mirrorvis.stats import Accumulator, Estimate


# ---------------------------------------------------------------- angle functions


def test_one_minus_cos():
    f = OneMinusCos()
    assert (f.c, f.kappa) == (0.5, 2.0)
    th = np.linspace(0, math.pi, 7)
    np.testing.assert_allclose(f(th), 1 - np.cos(th), atol=1e-15)
    v = np.array([[1.0, 0.0]])
    assert f.of_pair(v, v)[0] == 0.0


def test_angle_function_parse():
    assert isinstance(angle_function("one-minus-cos"), OneMinusCos)
    p = angle_function("power:0.5,2")
    assert (p.c, p.kappa) == (0.5, 2.0)
    assert angle_function(p.spec()) == p
    for bad in ("power:1", "power:a,b", "cosine", "power:-1,2"):
        with pytest.raises(ValueError):
            angle_function(bad)


def test_custom_table():
    f = Custom((0, 1, math.pi), (0, 1, 2))
    assert f(0.5) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        Custom((0, 1, 2), (0, 1, 2))
    with pytest.raises(ValueError):
        Custom((0, 1, math.pi), (0, 2, 1))


# ---------------------------------------------------------------- stats


def test_estimate_validation():
    with pytest.raises(ValueError):
        Estimate(1.0, -1.0, 10)
    with pytest.raises(ValueError):
        Estimate(1.0, 0.0, 10, trapped_fraction=1.5)
    assert Estimate(0, 0, 1, trapped_fraction=0.02).unreliable


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=60), st.integers(1, 59))
def test_accumulator_merge_matches_direct(xs, cut):
    cut = min(cut, len(xs) - 1)
    a = Accumulator.from_values(xs[:cut]).merge(Accumulator.from_values(xs[cut:]))
    e = a.estimate()
    assert e.mean == pytest.approx(np.mean(xs), abs=1e-9)
    assert e.stderr == pytest.approx(np.std(xs, ddof=1) / math.sqrt(len(xs)), abs=1e-7)


# ---------------------------------------------------------------- estimators


def test_empty_body_zero():
    sc = Scene(empty(2), sphere_radius=1.0)
    for f in (OneMinusCos(), PowerLaw(2.0, 0.5)):
        e = estimate_F(sc, f, 50_000, 1)
        assert (e.mean, e.stderr) == (0.0, 0.0)
    e = estimate_F_R(sc, 3.0, OneMinusCos(), 50_000, 1)
    assert e.mean == 0.0


def test_disc_specular():
    e = mean_resistance(Scene(disc()), 400_000, 2)
    assert e.mean == pytest.approx(16 * math.pi / 3, rel=0.01)
    assert within_sigmas(e, 16 * math.pi / 3)


def test_disc_retro_exact():
    e = mean_resistance(Scene(disc(), law=Retro()), 100_000, 2)
    assert e.mean == pytest.approx(8 * math.pi, rel=1e-12)


def test_retro_in_larger_sphere():
    # only lines meeting the disc contribute 2 each; their measure is 2 pi * 2
    e = mean_resistance(Scene(disc(), law=Retro(), sphere_radius=3.0), 400_000, 2)
    assert within_sigmas(e, 8 * math.pi)
    assert e.mean == pytest.approx(8 * math.pi, rel=0.01)


def test_ball_3d():
    e = mean_resistance(Scene(shipped("ball")), 200_000, 2)
    assert e.mean == pytest.approx(4 * math.pi ** 2, rel=0.01)


def test_thread_count_invariance():
    sc = Scene(two_disc_union())
    n = 3 * BLOCK + 123
    a = mean_resistance(sc, n, 5, threads=1)
    b = mean_resistance(sc, n, 5, threads=4)
    assert a == b


def test_common_random_numbers():
    sc = Scene(disc())
    seen = []
    simulate(sc, 1000, 3, lambda s, b: seen.append(s.xi.copy()) or np.zeros(len(s)))
    simulate(sc.with_law(Retro()), 1000, 3, lambda s, b: seen.append(s.xi.copy()) or np.zeros(len(s)))
    np.testing.assert_array_equal(seen[0], seen[1])


def test_upper_bracket():
    # trapped rays: a narrow slot between plates
    plates = Body(2, Union((Box((-0.9, 0.02), (0.9, 0.4)), Box((-0.9, -0.4), (0.9, -0.02)))))
    sc = Scene(plates)
    lo = estimate_F(sc, OneMinusCos(), 20_000, 1)
    hi = estimate_F(sc, OneMinusCos(), 20_000, 1, upper_bracket=True)
    assert hi.mean >= lo.mean


def test_unreliable_warning():
    plates = Body(2, Union((Box((-0.9, 0.02), (0.9, 0.4)), Box((-0.9, -0.4), (0.9, -0.02)))))
    sc = Scene(plates)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        e = simulate(sc, 2000, 1, lambda s, b: np.ones(len(s)), max_reflections=1)
    assert e.unreliable
    assert any("unreliable" in str(x.message) for x in w)


# ---------------------------------------------------------------- finite radius


def test_head_on_theta_R():
    sc = Scene(disc(), sphere_radius=2.0)
    v = np.array([[1.0, 0.0]])
    xi = np.array([[-2.0, 0.0]])
    b = trace_batch(sc, v, xi)
    smp = PhaseSample(v, xi, sc.c)
    assert finite_radius_angle(smp, b, 2.0)[0] == pytest.approx(math.pi)


def test_F_R_requires_large_radius():
    with pytest.raises(ValueError):
        estimate_F_R(Scene(disc(2.0)), 1.0, OneMinusCos(), 10, 0)


def test_F_R_converges():
    sc = Scene(disc())
    F = mean_resistance(sc, 400_000, 5)
    devs = []
    for R in (4, 16, 64):
        e = estimate_F_R(sc, R, OneMinusCos(), 100_000 * R, 5)
        assert abs(e.mean - F.mean) <= 4 * joint_sigma(e, F)
        devs.append((abs(e.mean - F.mean), joint_sigma(e, F)))
    for (d0, s0), (d1, s1) in zip(devs, devs[1:]):
        assert d1 <= d0 + 4 * math.hypot(s0, s1)


# ---------------------------------------------------------------- invariances


def test_radius_invariance():
    sc = Scene(two_disc_union())
    a = mean_resistance(sc, 300_000, 4)
    b = mean_resistance(sc.with_radius(2 * sc.r0), 600_000, 4)
    assert abs(a.mean - b.mean) <= 4 * joint_sigma(a, b)


def test_scale_invariance():
    small = two_disc_union()
    big = Body(2, Union((Ball((-1.1, 0), 0.9), Ball((1.1, 0), 0.9))))
    rows = []
    for body in (small, big):
        sc = Scene(body)
        red = reduced_quantities(2, volume(body), mean_resistance(sc, 300_000, 6), sc.r0)
        rows.append(red)
    assert rows[0].kappa == pytest.approx(rows[1].kappa, rel=1e-12)
    assert abs(rows[0].fhat - rows[1].fhat) <= 4 * math.hypot(rows[0].fhat_stderr,
                                                              rows[1].fhat_stderr)


def test_f_dominance_on_common_samples():
    sc = Scene(shipped("ring-of-discs"))
    lo = estimate_F(sc, PowerLaw(0.25, 2.0), 100_000, 3)   # <= 1 - cos on [0, pi]
    hi = estimate_F(sc, OneMinusCos(), 100_000, 3)
    assert lo.mean <= hi.mean + 4 * joint_sigma(lo, hi)


# ---------------------------------------------------------------- convex and reduced


def test_convex_resistance():
    assert convex_resistance(2, 4.0) == pytest.approx(32 / 3, rel=1e-15)
    assert convex_resistance(2, 2 * math.pi * 1.5) == pytest.approx(16 * math.pi * 1.5 / 3)
    assert convex_resistance(3, 4 * math.pi) == pytest.approx(4 * math.pi ** 2, rel=1e-15)
    with pytest.raises(ValueError):
        convex_resistance(2, 0.0)


def test_convex_square_by_simulation():
    sq = Body(2, Box((-0.5, -0.5), (0.5, 0.5)))
    e = mean_resistance(Scene(sq), 400_000, 7)
    assert within_sigmas(e, convex_resistance(2, boundary_area(sq)))


def test_reduced_examples():
    r = reduced_quantities(2, math.pi, 16 * math.pi / 3, 1.0)
    assert (r.kappa, r.fhat) == pytest.approx((1.0, 1.0), rel=1e-15)
    assert reduced_quantities(2, math.pi, 8 * math.pi, 1.0).fhat == pytest.approx(1.5)
    assert reduced_quantities(3, 4 * math.pi / 3, 8 * math.pi ** 2, 1.0).fhat == pytest.approx(2.0)
    assert resistance_scale(3, 2.0) == pytest.approx(16 * math.pi ** 2)


def test_reduced_errors_and_warnings():
    with pytest.raises(ValueError):
        reduced_quantities(2, 4.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        reduced_quantities(2, 1.0, 1.0, 0.0)
    with pytest.warns(RuntimeWarning):
        reduced_quantities(2, 0.0, 1.0, 1.0)
    # within 4 standard errors of 1 is tolerated
    with pytest.warns(RuntimeWarning):
        r = reduced_quantities(2, Estimate(math.pi * 1.001, 0.01, 100), 1.0, 1.0)
    assert r.kappa > 1


@given(st.floats(0.01, 1.0), st.floats(0.0, 50.0), st.floats(0.1, 10.0), st.sampled_from([2, 3]))
def test_reduced_scaling(frac, res, r0, d):
    from mirrorvis.constants import ball_volume

    vol = frac * ball_volume(d) * r0 ** d
    a = reduced_quantities(d, vol, res, r0)
    b = reduced_quantities(d, vol * 8 ** d, res * 8 ** (d - 1), 8 * r0)
    assert a.kappa == pytest.approx(b.kappa, rel=1e-12)
    assert a.fhat == pytest.approx(b.fhat, rel=1e-12, abs=1e-300)
