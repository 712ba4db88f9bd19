import numpy as np
import pytest

from trimoves.fixtures import grid_torus_complex
from trimoves.pachner import PachnerMove, sequence_from_moves
from trimoves.serialize import (
    FormatError,
    complex_from_dict,
    complex_to_dict,
    dumps,
    geom_complex_from_dict,
    geom_complex_to_dict,
    loads,
    sequence_from_dict,
    sequence_to_dict,
    subdivided_from_dict,
    subdivided_to_dict,
)
from trimoves.subdivision import barycentric
from .test_complexes import boundary_delta3


class TestComplexFormat:
    def test_round_trip(self):
        k = boundary_delta3()
        assert complex_from_dict(complex_to_dict(k)) == k

    def test_loader_closes_under_faces(self):
        k = complex_from_dict({"maximal_simplexes": [[1, 2, 3]]})
        assert len(k) == 7

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(FormatError):
            complex_from_dict({"dimension": 3, "maximal_simplexes": [[1, 2]]})

    def test_vertex_list_checked(self):
        with pytest.raises(FormatError):
            complex_from_dict({"vertices": [1, 9], "maximal_simplexes": [[1, 2]]})

    def test_malformed_json(self):
        with pytest.raises(FormatError):
            loads("{oops")
        with pytest.raises(FormatError):
            loads("[1, 2]")


class TestSubdividedFormat:
    def test_round_trip_with_carriers(self):
        sub = barycentric(boundary_delta3())
        data = subdivided_to_dict(sub)
        back = subdivided_from_dict(data)
        assert back.complex == sub.complex
        assert back.carrier == sub.carrier
        assert back.apex_of == sub.apex_of

    def test_broken_carrier_rejected(self):
        sub = barycentric(boundary_delta3())
        data = subdivided_to_dict(sub)
        data["carrier"] = data["carrier"][:-1]
        with pytest.raises((FormatError, ValueError)):
            subdivided_from_dict(data)


class TestSequenceFormat:
    def test_round_trip(self):
        k = boundary_delta3()
        seq = sequence_from_moves(k, [PachnerMove((1, 2, 3), (5,))])
        data = sequence_to_dict(seq)
        assert data["moves"][0]["fresh"] == [5]
        assert sequence_from_dict(data) == seq


class TestGeomFormat:
    def test_torus_round_trip(self):
        gk = grid_torus_complex(3)
        back = geom_complex_from_dict(geom_complex_to_dict(gk))
        assert back.complex == gk.complex
        assert back.period == gk.period
        for v in gk.complex.vertices():
            assert np.allclose(back.coords[v], gk.coords[v])

    def test_missing_coordinates_rejected(self):
        gk = grid_torus_complex(3)
        data = geom_complex_to_dict(gk)
        del data["coordinates"]["0"]
        with pytest.raises(FormatError):
            geom_complex_from_dict(data)

    def test_dumps_sorted_and_stable(self):
        gk = grid_torus_complex(3)
        assert dumps(geom_complex_to_dict(gk)) == dumps(geom_complex_to_dict(gk))
