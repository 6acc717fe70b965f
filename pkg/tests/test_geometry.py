import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from mirrorvis.geometry import (NEAR_EDGE, REGULAR, Ball, Body, Box, Difference, Polygon,
                                Polytope, Union, VolumeConfig, boundary_area, contains, disc,
                                empty, enclosing_radius, min_enclosing_ball, ray_intersect,
                                regular_polygon, shell, volume)
from mirrorvis.sampling import stream_generator


# ---------------------------------------------------------------- construction


def test_invalid_leaves():
    with pytest.raises(ValueError):
        Ball((0, 0), 0.0)
    with pytest.raises(ValueError):
        Box((0, 0), (1, 0))
    with pytest.raises(ValueError):
        Polygon(((0, 0), (0, 1), (1, 0)))  # clockwise
    with pytest.raises(ValueError):
        Polygon(((0, 0), (1, 1), (1, 0), (0, 1)))  # self-intersecting
    with pytest.raises(ValueError):
        Polytope(((1.0, 0.0), (0.0, 1.0)), (1.0, 1.0))  # unbounded
    with pytest.raises(ValueError):
        Polytope(((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)), (-1.0, -1.0, 1.0, 1.0))


def test_mixed_dimensions_rejected():
    with pytest.raises(ValueError):
        Body(2, Union((Ball((0, 0), 1), Ball((0, 0, 0), 1))))


# ---------------------------------------------------------------- ray_intersect


def test_disc_head_on():
    hit = ray_intersect(disc(), (-2, 0), (1, 0))
    assert hit.t == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(hit.point, (-1, 0), atol=1e-15)
    np.testing.assert_allclose(hit.normal, (-1, 0), atol=1e-15)
    assert hit.feature_quality == REGULAR


def test_disc_miss():
    assert ray_intersect(disc(), (-2, 2), (1, 0)) is None


def test_annulus_outer_and_inner_wall():
    ann = shell(1.0, 0.5, 2)
    hit = ray_intersect(ann, (-2, 0), (1, 0))
    np.testing.assert_allclose(hit.point, (-1, 0), atol=1e-15)
    np.testing.assert_allclose(hit.normal, (-1, 0), atol=1e-15)
    # from inside the material the next boundary is the cavity wall; the
    # outward normal of the material there points into the cavity
    hit = ray_intersect(ann, (-0.75, 0), (1, 0))
    assert hit.t == pytest.approx(0.25, abs=1e-14)
    np.testing.assert_allclose(hit.point, (-0.5, 0), atol=1e-14)
    np.testing.assert_allclose(hit.normal, (1, 0), atol=1e-14)


def _sdf_gradient(body, p, h=1e-6):
    """Central-difference gradient of a brute-force signed distance proxy:
    the fraction of a tiny disc inside the body, which falls across the
    boundary along the outward normal."""
    g = np.zeros(2)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        g[i] = float(contains(body, p - e)) - float(contains(body, p + e))
    return g


def test_annulus_inner_normal_matches_brute_force():
    ann = shell(1.0, 0.5, 2)
    hit = ray_intersect(ann, (-0.75, 0), (1, 0))
    g = _sdf_gradient(ann, hit.point)
    assert np.dot(g, hit.normal) > 0


def test_near_edge_flag():
    sq = Body(2, Box((-1, -1), (1, 1)))
    hit = ray_intersect(sq, (-2, -2), (math.sqrt(0.5), math.sqrt(0.5)))
    assert hit.feature_quality == NEAR_EDGE
    hit = ray_intersect(sq, (-2, 0.3), (1, 0))
    assert hit.feature_quality == REGULAR
    np.testing.assert_allclose(hit.normal, (-1, 0))


def test_union_seam_flagged():
    # concave corner where two overlapping discs meet
    body = Body(2, Union((Ball((-0.5, 0), 1), Ball((0.5, 0), 1))))
    hit = ray_intersect(body, (0, -3), (0, 1))
    np.testing.assert_allclose(hit.point, (0, -math.sqrt(0.75)), atol=1e-12)
    assert hit.feature_quality == NEAR_EDGE
    hit = ray_intersect(body, (0.2, -3), (0, 1))
    assert hit.feature_quality == REGULAR


def test_nonconvex_polygon_hit():
    # an L shape
    L = Body(2, Polygon(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2))))
    hit = ray_intersect(L, (3, 1.5), (-1, 0))
    assert hit.t == pytest.approx(2.0)
    np.testing.assert_allclose(hit.normal, (1, 0))


def test_polytope_hit_3d():
    cube = Body(3, Polytope(tuple(map(tuple, np.vstack([np.eye(3), -np.eye(3)]))), (1.0,) * 6))
    hit = ray_intersect(cube, (0.2, 0.1, 5), (0, 0, -1))
    assert hit.t == pytest.approx(4.0)
    np.testing.assert_allclose(hit.normal, (0, 0, 1), atol=1e-12)


def test_direction_must_be_unit():
    with pytest.raises(ValueError):
        ray_intersect(disc(), (-2, 0), (2, 0))


# ---------------------------------------------------------------- contains


def test_contains_examples():
    assert contains(disc(), (0, 0))
    assert not contains(disc(), (2, 0))
    assert not contains(shell(1.0, 0.5, 2), (0, 0))
    assert contains(shell(1.0, 0.5, 2), (0.75, 0))


def test_empty_body():
    e = empty(2)
    assert e.is_empty
    assert not contains(e, (0, 0))
    assert ray_intersect(e, (-2, 0), (1, 0)) is None
    assert volume(e).mean == 0.0


# ---------------------------------------------------------------- volume


def test_volume_examples():
    v = volume(disc())
    assert (v.mean, v.stderr) == (math.pi, 0.0)
    two = Body(2, Union((Ball((-3, 0), 1), Ball((3, 0), 1))))
    v = volume(two)
    assert v.mean == pytest.approx(2 * math.pi, rel=1e-15) and v.stderr == 0.0


def test_annulus_volume_mc():
    v = volume(shell(1.0, 0.5, 2), VolumeConfig(samples=1_000_000, seed=3, method="mc"))
    assert v.stderr > 0
    assert abs(v.mean - 0.75 * math.pi) <= 3 * v.stderr


def test_annulus_volume_analytic():
    v = volume(shell(1.0, 0.5, 2))
    assert v.stderr == 0 and v.mean == pytest.approx(0.75 * math.pi, rel=1e-15)


def test_primitive_mc_agrees_for_most_seeds():
    body = Body(3, Box((0, 0, 0), (1, 2, 0.5)))
    bad = 0
    for seed in range(30):
        v = volume(body, VolumeConfig(samples=20_000, seed=seed, method="mc"))
        bad += abs(v.mean - 1.0) > 4 * v.stderr
    assert bad <= 1


def test_polygon_volume():
    assert volume(regular_polygon(6)).mean == pytest.approx(3 * math.sqrt(3) / 2)


# ---------------------------------------------------------------- boundary area


def test_boundary_area_examples():
    assert boundary_area(disc()) == pytest.approx(2 * math.pi)
    assert boundary_area(Body(3, Ball((0, 0, 0), 1))) == pytest.approx(4 * math.pi)
    assert boundary_area(Body(2, Box((0, 0), (1, 1)))) == pytest.approx(4.0)
    assert boundary_area(shell(1.0, 0.5, 2)) is None
    L = Body(2, Polygon(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2))))
    assert boundary_area(L) is None


def test_polytope_area():
    cube = Body(3, Polytope(tuple(map(tuple, np.vstack([np.eye(3), -np.eye(3)]))), (1.0,) * 6))
    assert boundary_area(cube) == pytest.approx(24.0)


# ---------------------------------------------------------------- enclosing ball


def test_enclosing_examples():
    c, r = enclosing_radius(Body(2, Ball((1, 0), 2)))
    np.testing.assert_allclose(c, (1, 0))
    assert r == 2
    c, r = enclosing_radius(Body(2, Union((Ball((-1, 0), 1), Ball((1, 0), 1)))))
    np.testing.assert_allclose(c, (0, 0), atol=1e-15)
    assert r == pytest.approx(2.0)
    c, r = enclosing_radius(Body(2, Box((-1, -1), (1, 1))))
    np.testing.assert_allclose(c, (0, 0), atol=1e-15)
    assert r == pytest.approx(math.sqrt(2))


def test_min_enclosing_ball_points():
    pts = np.array([[0, 0], [2, 0], [1, 0.1]])
    c, r = min_enclosing_ball(pts)
    np.testing.assert_allclose(c, (1, 0), atol=1e-12)
    assert r == pytest.approx(1.0)


@pytest.mark.parametrize("body", [
    shell(1.0, 0.5, 2),
    Body(2, Union((Ball((-1, 0.3), 0.4), Box((0, 0), (1, 2)), Ball((0.5, -1), 0.2)))),
    Body(3, Union((Ball((0, 0, 0), 1), Box((0.5, 0.5, 0.5), (1.5, 1.2, 1.0))))),
    regular_polygon(5, 2.0, (1, 1)),
])
def test_enclosing_contains_samples(body):
    c, r = enclosing_radius(body)
    rng = stream_generator(11, 0)
    inside = np.empty((0, body.dim))
    while len(inside) < 100_000:
        pts = c + r * rng.uniform(-1, 1, size=(200_000, body.dim))
        inside = np.vstack([inside, pts[contains(body, pts)]])
    assert np.max(np.linalg.norm(inside[:100_000] - c, axis=1)) <= r * (1 + 1e-12)


# ---------------------------------------------------------------- properties


coord = st.floats(-1.0, 1.0, allow_nan=False)
size = st.floats(0.15, 0.8)


@st.composite
def leaves2d(draw):
    kind = draw(st.sampled_from(["ball", "box", "polygon"]))
    cx, cy = draw(coord), draw(coord)
    if kind == "ball":
        return Ball((cx, cy), draw(size))
    if kind == "box":
        w, h = draw(size), draw(size)
        return Box((cx - w, cy - h), (cx + w, cy + h))
    k = draw(st.integers(3, 7))
    ph = draw(st.floats(0, 1))
    return regular_polygon(k, draw(size), (cx, cy), ph).node


@st.composite
def bodies2d(draw):
    kids = tuple(draw(st.lists(leaves2d(), min_size=1, max_size=3)))
    node = kids[0] if len(kids) == 1 else Union(kids)
    if draw(st.booleans()):
        node = Difference(node, draw(leaves2d()))
    return Body(2, node)


@given(bodies2d(), st.floats(0, 2 * math.pi), st.floats(-1.2, 1.2))
def test_hit_consistent_with_contains(body, ang, offset):
    c, r = enclosing_radius(body)
    assume(r > 0)
    u = np.array([math.cos(ang), math.sin(ang)])
    perp = np.array([-u[1], u[0]])
    origin = c - 2.5 * r * u + offset * r * perp
    hit = ray_intersect(body, origin, u)
    if hit is None:
        # a miss may still graze the body tangentially
        ts = np.linspace(0, 5 * r, 4001)
        assert np.count_nonzero(contains(body, origin + ts[:, None] * u)) <= 2
        return
    assert abs(np.linalg.norm(hit.normal) - 1) < 1e-12
    assert hit.t > 0
    # nothing of the body lies strictly before the hit
    ts = np.linspace(0, hit.t, 2001)[:-1]
    before = contains(body, origin + ts[:, None] * u)
    assert not np.any(before[: int(0.999 * len(ts))])
    if hit.feature_quality == REGULAR:
        eps = 1e-7 * r
        assert not contains(body, hit.point + eps * hit.normal)
        assert contains(body, hit.point - eps * hit.normal)


@given(bodies2d())
def test_shape_volume_nonnegative_and_bounded(body):
    c, r = enclosing_radius(body)
    v = volume(body, VolumeConfig(samples=20_000, seed=1))
    assert 0 <= v.mean <= math.pi * r * r + 4 * v.stderr + 1e-12
