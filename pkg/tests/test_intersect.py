import numpy as np
import pytest

from trimoves.complexes import close_under_faces
from trimoves.fixtures import grid_torus_complex, random_chart_pair
from trimoves.geometry import GeomComplex, Geometry
from trimoves.intersect import (
    IntersectionError,
    barycentric_polytopal,
    clip_simplex_pair,
    commonsub_count_check,
    intersect_linear,
    torus_intersect,
)

E = Geometry.EUCLIDEAN


def interval_complex(breaks, labels=None):
    labels = labels or list(range(len(breaks)))
    edges = [(labels[i], labels[i + 1]) for i in range(len(breaks) - 1)]
    coords = {labels[i]: np.array([breaks[i]]) for i in range(len(breaks))}
    return GeomComplex(close_under_faces(edges), E, coords)


def square_pair():
    """Unit square cut by the two different diagonals."""
    corners = {0: [0.0, 0.0], 1: [1.0, 0.0], 2: [1.0, 1.0], 3: [0.0, 1.0]}
    k1 = GeomComplex(
        close_under_faces([(0, 1, 2), (0, 2, 3)]),
        E,
        {k: np.array(v) for k, v in corners.items()},
    )
    k2 = GeomComplex(
        close_under_faces([(0, 1, 3), (1, 2, 3)]),
        E,
        {k: np.array(v) for k, v in corners.items()},
    )
    return k1, k2


class TestClipPair:
    def test_identical_triangles(self):
        tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        pts, labels = clip_simplex_pair(tri, tri)
        assert len(pts) == 3

    def test_disjoint(self):
        a = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        b = a + 10.0
        pts, _ = clip_simplex_pair(a, b)
        assert pts == []

    def test_quad_overlap(self):
        a = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
        b = np.array([[1.6, 1.6], [-0.4, 1.6], [1.6, -0.4]])
        pts, _ = clip_simplex_pair(a, b)
        assert len(pts) == 6  # hexagonal overlap of two opposite triangles


class TestIntersectLinear:
    def test_identical_complexes(self):
        k1, _ = square_pair()
        poly = intersect_linear(k1, k1)
        assert len(poly.cells) == 2
        assert poly.total_measure() == pytest.approx(1.0, abs=1e-12)

    def test_interval_splits(self):
        k1 = interval_complex([0.0, 0.5, 1.0])
        k2 = interval_complex([0.0, 0.3, 1.0], labels=[10, 11, 12])
        poly = intersect_linear(k1, k2)
        measures = sorted(round(c.measure, 9) for c in poly.cells)
        assert measures == [0.2, 0.3, 0.5]

    def test_crossed_diagonals(self):
        k1, k2 = square_pair()
        poly = intersect_linear(k1, k2)
        # oracle: the two diagonals cross at the centre into 4 triangles
        assert len(poly.cells) == 4
        assert poly.total_measure() == pytest.approx(1.0, abs=1e-9)
        assert any(
            np.allclose(v, [0.5, 0.5], atol=1e-9) for v in poly.vertices.values()
        )

    def test_region_mismatch_rejected(self):
        k1, _ = square_pair()
        small = GeomComplex(
            close_under_faces([(0, 1, 2)]),
            E,
            {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0]), 2: np.array([0.0, 1.0])},
        )
        with pytest.raises(IntersectionError):
            intersect_linear(k1, small)

    def test_provenance_contains_cells(self):
        k1, k2 = square_pair()
        poly = intersect_linear(k1, k2)
        for cell in poly.cells:
            c1 = k1.lift(cell.provenance[0])
            c2 = k2.lift(cell.provenance[1])
            from trimoves.intersect import _affine_coords

            for p in cell.lift:
                assert np.all(_affine_coords(c1, p) > -1e-9)
                assert np.all(_affine_coords(c2, p) > -1e-9)


class TestTorus:
    def test_identical_grids(self):
        k = grid_torus_complex(3)
        poly = torus_intersect(k, k)
        assert len(poly.cells) == 18
        assert poly.total_measure() == pytest.approx(1.0, abs=1e-9)

    def test_shifted_grids(self):
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3, shift=(1 / 6, 1 / 6))
        poly = torus_intersect(k1, k2)
        assert poly.total_measure() == pytest.approx(1.0, abs=1e-9)
        # every pair intersects in at most one convex cell
        seen = {}
        for c in poly.cells:
            assert c.provenance not in seen
            seen[c.provenance] = c

    def test_coarse_triangulation_guard(self):
        # a 1x1 grid is not even simplicial
        with pytest.raises(ValueError):
            grid_torus_complex(1)
        # stretched legs of 0.467 give diameter 0.66 >= period/2
        k = grid_torus_complex(3)
        bad = GeomComplex(
            k.complex, E, {v: (c * 1.4) % 1.0 for v, c in k.coords.items()}, 1.0
        )
        with pytest.raises(IntersectionError):
            torus_intersect(bad, bad)


class TestBarycentricPolytopal:
    def test_single_triangle_cell(self):
        tri = GeomComplex(
            close_under_faces([(0, 1, 2)]),
            E,
            {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0]), 2: np.array([0.0, 1.0])},
        )
        poly = intersect_linear(tri, tri)
        common = barycentric_polytopal(poly, tri, tri)
        assert common.complex.f_vector()[2] == 6

    def test_square_cell_eight_triangles(self):
        k1, k2 = square_pair()
        # intersect a triangulation with itself rotated: use the crossed
        # diagonals to get 4 triangle cells, then check 6 triangles each
        poly = intersect_linear(k1, k2)
        common = barycentric_polytopal(poly, k1, k2)
        assert common.complex.f_vector()[2] == 24
        common.as_subdivided(1).validate()
        common.as_subdivided(2).validate()

    def test_one_dimensional(self):
        k1 = interval_complex([0.0, 0.4, 1.0])
        k2 = interval_complex([0.0, 0.6, 1.0], labels=[10, 11, 12])
        poly = intersect_linear(k1, k2)
        common = barycentric_polytopal(poly, k1, k2)
        assert common.complex.f_vector()[1] == 6

    def test_cells_respect_facet_count_law(self):
        # a cell cut from a k-simplex and an l-simplex has at most
        # (k+1) + (l+1) codimension-one faces; for triangle pairs that
        # caps every polygon cell at 6 vertices
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3, shift=(0.11, 0.043))
        poly = torus_intersect(k1, k2)
        for c in poly.cells:
            assert len(c.vertex_ids) <= 6
        common = barycentric_polytopal(poly, k1, k2)
        # per-cell subdivision count is twice the facet count, so each cell
        # contributes at most 12 triangles
        assert common.complex.f_vector()[2] <= 12 * len(poly.cells)

    def test_quad_cells_cone_to_eight_triangles(self):
        # a k-gon cell cones over its subdivided boundary into 2k triangles;
        # the shifted-grid overlay contains genuine quadrilateral cells
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3, shift=(1 / 6, 1 / 6))
        poly = torus_intersect(k1, k2)
        assert any(len(c.vertex_ids) == 4 for c in poly.cells)
        common = barycentric_polytopal(poly, k1, k2)
        assert common.complex.f_vector()[2] == sum(
            2 * len(c.vertex_ids) for c in poly.cells
        )

    def test_carriers_contain_simplexes(self):
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3, shift=(1 / 6, 1 / 6))
        poly = torus_intersect(k1, k2)
        common = barycentric_polytopal(poly, k1, k2)
        gk = common.as_geom()
        for s in list(common.complex.simplexes)[:200]:
            c1 = common.carrier1[s]
            chart = k1.lift(c1)
            lifted = gk.lift(s)
            anchor = lifted.mean(axis=0)
            chart = chart + np.round((anchor - chart.mean(axis=0)))
            from trimoves.intersect import _affine_coords

            for p in lifted:
                coords = _affine_coords(chart, p)
                assert np.all(coords > -1e-7)


class TestCounts:
    def test_single_triangle_chart(self):
        tri = GeomComplex(
            close_under_faces([(0, 1, 2)]),
            E,
            {0: np.array([0.0, 0.0]), 1: np.array([1.0, 0.0]), 2: np.array([0.0, 1.0])},
        )
        poly = intersect_linear(tri, tri)
        common = barycentric_polytopal(poly, tri, tri)
        report = commonsub_count_check(tri, tri, common)
        row = report["skeleton"][2]
        assert row["s_i"] == 6
        assert row["bound"] == 3 * 36
        assert report["all_ok"] and report["measure_ok"]

    def test_interval_case(self):
        k1 = interval_complex([0.0, 0.5, 1.0])
        k2 = interval_complex([0.0, 0.3, 1.0], labels=[10, 11, 12])
        common = barycentric_polytopal(intersect_linear(k1, k2), k1, k2)
        report = commonsub_count_check(k1, k2, common)
        assert report["all_ok"] and report["measure_ok"]

    def test_torus_fixture(self):
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3, shift=(1 / 6, 1 / 6))
        common = barycentric_polytopal(torus_intersect(k1, k2), k1, k2)
        report = commonsub_count_check(k1, k2, common)
        assert report["all_ok"] and report["measure_ok"]


class TestChartPairs:
    def test_random_delaunay_pairs(self):
        rng = np.random.default_rng(14)
        for _ in range(3):
            k1, k2 = random_chart_pair(rng)
            poly = intersect_linear(k1, k2)
            assert poly.total_measure() == pytest.approx(1.0, rel=1e-9)
            common = barycentric_polytopal(poly, k1, k2)
            report = commonsub_count_check(k1, k2, common)
            assert report["all_ok"] and report["measure_ok"]


class TestVertexRegistry:
    def test_torus_wraparound_merges(self):
        from trimoves.intersect import _VertexRegistry

        reg = _VertexRegistry(period=1.0)
        a = reg.get_id(np.array([1.0 - 1e-12, 0.5]))
        b = reg.get_id(np.array([0.0, 0.5]))
        assert a == b

    def test_distinct_points_not_merged(self):
        from trimoves.intersect import _VertexRegistry

        reg = _VertexRegistry(period=None)
        a = reg.get_id(np.array([0.0, 0.0]))
        b = reg.get_id(np.array([5e-9, 0.0]))
        assert a != b

    def test_close_points_merged(self):
        from trimoves.intersect import _VertexRegistry

        reg = _VertexRegistry(period=None)
        a = reg.get_id(np.array([0.2, 0.7]))
        b = reg.get_id(np.array([0.2 + 2e-10, 0.7 - 2e-10]))
        assert a == b


class TestThreeD:
    def test_tet_self_intersection(self):
        tet = GeomComplex(
            close_under_faces([(0, 1, 2, 3)]),
            E,
            {
                0: np.array([0.0, 0.0, 0.0]),
                1: np.array([1.0, 0.0, 0.0]),
                2: np.array([0.0, 1.0, 0.0]),
                3: np.array([0.0, 0.0, 1.0]),
            },
        )
        poly = intersect_linear(tet, tet)
        assert len(poly.cells) == 1
        assert poly.total_measure() == pytest.approx(1 / 6, abs=1e-12)

    def test_two_tet_complexes(self):
        coords = {
            0: np.array([0.0, 0.0, 0.0]),
            1: np.array([1.0, 0.0, 0.0]),
            2: np.array([0.0, 1.0, 0.0]),
            3: np.array([0.0, 0.0, 1.0]),
            4: np.array([1.0, 1.0, 1.0]),
        }
        k1 = GeomComplex(close_under_faces([(0, 1, 2, 3)]), E, coords)
        # same region, cut differently: split along an interior plane point
        mid = {**coords, 5: np.array([0.25, 0.25, 0.25])}
        k2 = GeomComplex(
            close_under_faces([(0, 1, 2, 5), (0, 1, 3, 5), (0, 2, 3, 5), (1, 2, 3, 5)]),
            E,
            mid,
        )
        poly = intersect_linear(k1, k2)
        assert poly.total_measure() == pytest.approx(1 / 6, rel=1e-9)
        assert len(poly.cells) == 4
        common = barycentric_polytopal(poly, k1, k2)
        common.as_subdivided(1).validate()
        report = commonsub_count_check(k1, k2, common)
        assert report["measure_ok"]
        # beta of a 3-cell: one tetrahedron per (facet, facet edge, cone) pair
        want = sum(
            sum(2 * len(cyc) for cyc in c.faces_by_dim[2]) for c in poly.cells
        )
        assert common.complex.f_vector()[3] == want

    def test_offset_tetrahedra_volume_against_monte_carlo(self):
        # independent oracle: rejection sampling of the overlap volume
        rng = np.random.default_rng(33)
        a = np.array(
            [[0.0, 0.0, 0.0], [1.1, 0.1, 0.0], [0.0, 1.2, 0.1], [0.1, 0.0, 1.0]]
        )
        b = a * 0.9 + np.array([0.18, 0.1, 0.07])
        from trimoves.intersect import cell_face_lattice, cell_measure, clip_simplex_pair

        pts, labels = clip_simplex_pair(b, a)
        assert len(pts) >= 4
        lattice = cell_face_lattice(3, pts, labels)
        vol = cell_measure(3, pts, lattice)

        from trimoves.intersect import _affine_coords

        lo = np.min(np.vstack([a, b]), axis=0)
        hi = np.max(np.vstack([a, b]), axis=0)
        n_samples = 200_000
        samples = rng.uniform(lo, hi, size=(n_samples, 3))

        def inside(simplex, pts_arr):
            mat = np.vstack([simplex.T, np.ones(4)])
            coords = np.linalg.solve(
                mat, np.hstack([pts_arr, np.ones((len(pts_arr), 1))]).T
            )
            return np.all(coords >= -1e-12, axis=0)

        frac = np.mean(inside(a, samples) & inside(b, samples))
        mc = frac * np.prod(hi - lo)
        assert vol == pytest.approx(mc, rel=0.05)
