"""JSON shape files.

Schema::

    {"dim": 2 | 3, "shape": NODE}

    NODE := {"type": "ball",       "center": [x, ...], "radius": r}
          | {"type": "box",        "min": [x, ...], "max": [x, ...]}
          | {"type": "polygon",    "vertices": [[x, y], ...]}          # CCW
          | {"type": "polytope",   "normals": [[...], ...], "offsets": [b, ...]}
          | {"type": "union",      "children": [NODE, ...]}
          | {"type": "difference", "base": NODE, "subtract": NODE}

Floats are written with ``repr`` precision, so load -> dump -> load is the
identity.
"""

from __future__ import annotations

import json

from .geometry import Ball, Body, Box, Difference, Polygon, Polytope, Union


class ShapeFileError(ValueError):
    pass


def _expect(obj, keys, where):
    if not isinstance(obj, dict):
        raise ShapeFileError(f"{where}: expected an object, got {type(obj).__name__}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ShapeFileError(f"{where}: missing key(s) {missing}")
    extra = set(obj) - set(keys) - {"type"}
    if extra:
        raise ShapeFileError(f"{where}: unexpected key(s) {sorted(extra)}")


def node_from_dict(obj, where="shape"):
    if not isinstance(obj, dict) or "type" not in obj:
        raise ShapeFileError(f"{where}: node needs a 'type'")
    kind = obj["type"]
    try:
        if kind == "ball":
            _expect(obj, ["center", "radius"], where)
            return Ball(tuple(obj["center"]), obj["radius"])
        if kind == "box":
            _expect(obj, ["min", "max"], where)
            return Box(tuple(obj["min"]), tuple(obj["max"]))
        if kind == "polygon":
            _expect(obj, ["vertices"], where)
            return Polygon(tuple(tuple(v) for v in obj["vertices"]))
        if kind == "polytope":
            _expect(obj, ["normals", "offsets"], where)
            return Polytope(tuple(tuple(n) for n in obj["normals"]), tuple(obj["offsets"]))
        if kind == "union":
            _expect(obj, ["children"], where)
            return Union(tuple(node_from_dict(ch, f"{where}.children[{i}]")
                               for i, ch in enumerate(obj["children"])))
        if kind == "difference":
            _expect(obj, ["base", "subtract"], where)
            return Difference(node_from_dict(obj["base"], f"{where}.base"),
                              node_from_dict(obj["subtract"], f"{where}.subtract"))
    except ShapeFileError:
        raise
    except (TypeError, ValueError) as exc:
        raise ShapeFileError(f"{where}: {exc}") from None
    raise ShapeFileError(f"{where}: unknown node type {kind!r}")


def node_to_dict(node):
    if isinstance(node, Ball):
        return {"type": "ball", "center": list(node.center), "radius": node.radius}
    if isinstance(node, Box):
        return {"type": "box", "min": list(node.min), "max": list(node.max)}
    if isinstance(node, Polygon):
        return {"type": "polygon", "vertices": [list(v) for v in node.vertices]}
    if isinstance(node, Polytope):
        return {"type": "polytope", "normals": [list(n) for n in node.normals],
                "offsets": list(node.offsets)}
    if isinstance(node, Union):
        return {"type": "union", "children": [node_to_dict(ch) for ch in node.children]}
    if isinstance(node, Difference):
        return {"type": "difference", "base": node_to_dict(node.base),
                "subtract": node_to_dict(node.subtract)}
    raise TypeError(f"not a shape node: {node!r}")


def body_from_dict(obj) -> Body:
    _expect(obj, ["dim", "shape"], "file")
    if obj["dim"] not in (2, 3):
        raise ShapeFileError(f"dim must be 2 or 3, got {obj['dim']!r}")
    try:
        return Body(obj["dim"], node_from_dict(obj["shape"]))
    except ShapeFileError:
        raise
    except ValueError as exc:
        raise ShapeFileError(str(exc)) from None


def body_to_dict(body: Body):
    return {"dim": body.dim, "shape": node_to_dict(body.node)}


def loads(text: str) -> Body:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ShapeFileError(f"not valid JSON: {exc}") from None
    return body_from_dict(obj)


def dumps(body: Body) -> str:
    return json.dumps(body_to_dict(body), indent=2) + "\n"


def load(path) -> Body:
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ShapeFileError(f"cannot read {path}: {exc}") from None


def dump(body: Body, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(body))
