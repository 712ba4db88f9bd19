"""JSON formats for complexes, subdivisions, moves, and geometric data.

Loaders close under faces and validate; writers emit sorted, canonical
structures so identical inputs produce byte-identical files.
"""
from __future__ import annotations

import json
import numpy as np

from .complexes import Complex, close_under_faces
from .geometry import GeomComplex, Geometry
from .intersect import CommonSubdivision, PolytopalComplex
from .pachner import MoveSequence, PachnerMove
from .subdivision import SubdividedComplex


class FormatError(Exception):
    pass


def complex_to_dict(k: Complex) -> dict:
    return {
        "dimension": k.dimension,
        "vertices": k.vertices(),
        "maximal_simplexes": [list(s) for s in k.maximal_simplexes()],
    }


def complex_from_dict(data: dict) -> Complex:
    try:
        maxes = data["maximal_simplexes"]
    except (KeyError, TypeError) as e:
        raise FormatError("missing maximal_simplexes") from e
    try:
        k = close_under_faces([tuple(int(v) for v in s) for s in maxes])
    except (ValueError, TypeError) as e:
        raise FormatError(f"bad simplex data: {e}") from e
    if "dimension" in data and data["dimension"] != k.dimension:
        raise FormatError(
            f"declared dimension {data['dimension']} != actual {k.dimension}"
        )
    if "vertices" in data and sorted(data["vertices"]) != k.vertices():
        raise FormatError("declared vertex set differs from the simplexes")
    return k


def subdivided_to_dict(sub: SubdividedComplex) -> dict:
    out = complex_to_dict(sub.complex)
    out["parent"] = complex_to_dict(sub.parent)
    out["carrier"] = [
        [list(child), list(parent)] for child, parent in sorted(sub.carrier.items())
    ]
    if sub.apex_of:
        out["barycenters"] = [[list(s), v] for s, v in sorted(sub.apex_of.items())]
    return out


def subdivided_from_dict(data: dict) -> SubdividedComplex:
    parent = complex_from_dict(data["parent"])
    child = complex_from_dict(data)
    try:
        carrier = {
            tuple(int(v) for v in c): tuple(int(v) for v in p)
            for c, p in data["carrier"]
        }
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad carrier data: {e}") from e
    apex_of = {
        tuple(int(v) for v in s): int(b) for s, b in data.get("barycenters", [])
    }
    sub = SubdividedComplex(child, parent, carrier, apex_of)
    sub.validate()
    return sub


def move_to_dict(m: PachnerMove) -> dict:
    return {"A": list(m.a), "B": list(m.b), "fresh": sorted(m.added_vertices)}


def move_from_dict(data: dict) -> PachnerMove:
    try:
        return PachnerMove(
            tuple(int(v) for v in data["A"]), tuple(int(v) for v in data["B"])
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad move data: {e}") from e


def sequence_to_dict(seq: MoveSequence) -> dict:
    return {
        "start_digest": seq.start_digest,
        "end_digest": seq.end_digest,
        "moves": [move_to_dict(m) for m in seq.moves],
    }


def sequence_from_dict(data: dict) -> MoveSequence:
    try:
        return MoveSequence(
            tuple(move_from_dict(m) for m in data["moves"]),
            str(data["start_digest"]),
            str(data["end_digest"]),
        )
    except (KeyError, TypeError) as e:
        raise FormatError(f"bad sequence data: {e}") from e


def geom_complex_to_dict(gk: GeomComplex) -> dict:
    out = complex_to_dict(gk.complex)
    out["geometry"] = gk.tag.value
    out["coordinates"] = {
        str(v): [float(x) for x in gk.coords[v]] for v in gk.complex.vertices()
    }
    if gk.period is not None:
        out["torus_period"] = gk.period
    return out


def geom_complex_from_dict(data: dict) -> GeomComplex:
    k = complex_from_dict(data)
    try:
        tag = Geometry(data["geometry"])
        coords = {
            int(v): np.asarray([float(x) for x in xs])
            for v, xs in data["coordinates"].items()
        }
    except (KeyError, ValueError, TypeError) as e:
        raise FormatError(f"bad geometric data: {e}") from e
    period = data.get("torus_period")
    gk = GeomComplex(k, tag, coords, period)
    missing = set(k.vertices()) - set(coords)
    if missing:
        raise FormatError(f"coordinates missing for vertices {sorted(missing)}")
    return gk


def polytopal_to_dict(poly: PolytopalComplex) -> dict:
    return {
        "dimension": poly.dim,
        "torus_period": poly.period,
        "vertices": {
            str(v): [float(x) for x in c] for v, c in sorted(poly.vertices.items())
        },
        "cells": [
            {
                "vertex_ids": list(c.vertex_ids),
                "vertex_coordinates": [[float(x) for x in row] for row in c.lift],
                "provenance": [list(c.provenance[0]), list(c.provenance[1])],
                "measure": c.measure,
            }
            for c in poly.cells
        ],
        "discarded": [
            {"provenance": [list(p[0]), list(p[1])], "measure": m}
            for (p, m) in poly.discarded
        ],
    }


def common_subdivision_to_dict(common: CommonSubdivision) -> dict:
    out = complex_to_dict(common.complex)
    out["torus_period"] = common.period
    out["coordinates"] = {
        str(v): [float(x) for x in common.coords[v]] for v in common.complex.vertices()
    }
    out["carrier1"] = [
        [list(c), list(p)] for c, p in sorted(common.carrier1.items())
    ]
    out["carrier2"] = [
        [list(c), list(p)] for c, p in sorted(common.carrier2.items())
    ]
    return out


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def loads(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"malformed JSON: {e}") from e
    if not isinstance(data, dict):
        raise FormatError("expected a JSON object at the top level")
    return data
