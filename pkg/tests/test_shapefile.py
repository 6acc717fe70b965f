import json
import math
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from mirrorvis.catalog import SHIPPED
from mirrorvis.geometry import Ball, Body, Box, Difference, Polygon, Polytope, Union, volume
from mirrorvis.shapefile import ShapeFileError, dumps, load, loads

SHAPES = Path(__file__).resolve().parents[1] / "shapes"


@pytest.mark.parametrize("name", ["disc.json", "annulus.json", "ring_of_discs.json"])
def test_shipped_files_load(name):
    body = load(SHAPES / name)
    assert body.dim == 2
    assert volume(body).stderr == 0


def test_annulus_file_area():
    assert volume(load(SHAPES / "annulus.json")).mean == pytest.approx(0.75 * math.pi)


@pytest.mark.parametrize("name", sorted(SHIPPED))
def test_catalog_round_trip(name):
    body = SHIPPED[name]()
    text = dumps(body)
    again = loads(text)
    assert again == body
    assert dumps(again) == text


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
positive = st.floats(1e-3, 10, allow_nan=False)


@st.composite
def nodes(draw, depth=2):
    kind = draw(st.sampled_from(["ball", "box", "polytope"] + (["union", "diff"] if depth else [])))
    if kind == "ball":
        return Ball((draw(finite), draw(finite)), draw(positive))
    if kind == "box":
        x, y, w, h = draw(finite), draw(finite), draw(positive), draw(positive)
        return Box((x, y), (x + w, y + h))
    if kind == "polytope":
        off = tuple(draw(positive) for _ in range(3))
        nrm = ((1.0, 0.0), (-0.5, math.sqrt(3) / 2), (-0.5, -math.sqrt(3) / 2))
        return Polytope(nrm, off)
    if kind == "union":
        return Union(tuple(draw(st.lists(nodes(depth=depth - 1), max_size=3))))
    return Difference(draw(nodes(depth=depth - 1)), draw(nodes(depth=depth - 1)))


@given(nodes())
def test_round_trip_bit_exact(node):
    body = Body(2, node)
    text = dumps(body)
    assert loads(text) == body
    assert dumps(loads(text)) == text


@pytest.mark.parametrize("text", [
    "not json",
    '{"dim": 4, "shape": {"type": "ball", "center": [0,0,0,0], "radius": 1}}',
    '{"dim": 2, "shape": {"type": "sphere", "center": [0,0], "radius": 1}}',
    '{"dim": 2, "shape": {"type": "ball", "center": [0,0]}}',
    '{"dim": 2, "shape": {"type": "ball", "center": [0,0], "radius": -1}}',
    '{"dim": 2, "shape": {"type": "ball", "center": [0,0,0], "radius": 1}}',
    '{"dim": 2, "shape": {"type": "ball", "center": [0,0], "radius": 1, "colour": 3}}',
    '{"dim": 2}',
])
def test_malformed(text):
    with pytest.raises(ShapeFileError):
        loads(text)


def test_polygon_json():
    text = json.dumps({"dim": 2, "shape": {"type": "polygon",
                                           "vertices": [[0, 0], [1, 0], [0, 1]]}})
    body = loads(text)
    assert isinstance(body.node, Polygon)
    assert volume(body).mean == pytest.approx(0.5)
