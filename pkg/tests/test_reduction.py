import numpy as np
import pytest

from trimoves.bounds import barymoves_bound, reduction_sum_bound, bridge_sum_bound
from trimoves.complexes import close_under_faces, find_isomorphism
from trimoves.fixtures import circle_complex, grid_torus_complex
from trimoves.pachner import apply_sequence, replay_verified
from trimoves.reduction import (
    ReductionError,
    alpha_to_beta,
    beta2_bridge,
    relate,
)
from trimoves.subdivision import (
    barycentric,
    identity_subdivision,
    skeleton_counts,
)
from .test_complexes import boundary_delta3


class TestAlphaToBeta:
    def test_sphere_identity_alpha(self):
        k = boundary_delta3()
        seq, trace = alpha_to_beta(k, identity_subdivision(k))
        # replay lands on a complex isomorphic to the barycentric subdivision
        out = apply_sequence(k, seq)
        assert out == trace.result
        want = barycentric(k).complex
        assert find_isomorphism(out, want) is not None
        # per-level bound and the total shape
        n, p = 2, k.f_vector()
        s = skeleton_counts(identity_subdivision(k))
        for r, used in trace.per_level_moves.items():
            assert used <= trace.per_level_bounds[r]
        assert trace.total_moves <= reduction_sum_bound(n, p, s)
        assert trace.total_moves <= barymoves_bound(n, 0, p[n])
        assert seq.removed_vertices() & set(k.vertices()) == set()

    def test_triangle_circle(self):
        k = close_under_faces([(0, 1), (1, 2), (0, 2)])
        seq, trace = alpha_to_beta(k, identity_subdivision(k))
        assert len(seq) == 3  # one starring per edge
        out = apply_sequence(k, seq)
        assert find_isomorphism(out, barycentric(k).complex) is not None

    def test_triangle_circle_against_bfs_oracle(self):
        # independent one-dimensional oracle: breadth-first search finds a
        # shortest path to the subdivided circle, which our constructive
        # sequence matches in length
        from trimoves.pachner import bfs_equivalence

        k = close_under_faces([(0, 1), (1, 2), (0, 2)])
        seq, trace = alpha_to_beta(k, identity_subdivision(k))
        oracle = bfs_equivalence(k, trace.result, max_depth=3, max_nodes=5000)
        assert oracle is not None
        assert len(oracle) == len(seq) == 3

    def test_alpha_equal_beta(self):
        # alpha = beta K: endpoint is isomorphic to beta K although the
        # sequence is not empty
        k = close_under_faces([(0, 1), (1, 2), (0, 2)])
        alpha = barycentric(k)
        seq, trace = alpha_to_beta(k, alpha)
        assert find_isomorphism(trace.result, alpha.complex) is not None

    def test_torus_identity(self):
        k = grid_torus_complex(3).complex
        seq, trace = alpha_to_beta(k, identity_subdivision(k))
        assert find_isomorphism(trace.result, barycentric(k).complex) is not None
        replay_verified(k, seq, expect=trace.result)

    def test_two_layer_chain_within_barymoves_bound(self):
        # chaining identity reductions climbs the subdivision tower one
        # barycentric layer at a time; the combined length stays below the
        # two-layer bound
        k = close_under_faces([(0, 1), (1, 2), (0, 2)])
        seq1, trace1 = alpha_to_beta(k, identity_subdivision(k))
        c1 = trace1.result
        seq2, trace2 = alpha_to_beta(c1, identity_subdivision(c1))
        total = len(seq1) + len(seq2)
        assert total <= barymoves_bound(1, 1, k.f_vector()[1])
        assert find_isomorphism(
            trace2.result, barycentric(barycentric(k).complex).complex
        ) is not None

    def test_three_sphere_identity(self):
        # n = 3: stars five tetrahedra, twenty triangle neighbourhoods and
        # sixty edge neighbourhoods, with every level verified by isomorphism
        import itertools

        k = close_under_faces(itertools.combinations(range(5), 4))
        seq, trace = alpha_to_beta(k, identity_subdivision(k))
        assert trace.per_level_moves == {3: 5, 2: 20, 1: 60}
        assert all(
            trace.per_level_moves[r] <= trace.per_level_bounds[r] for r in (1, 2, 3)
        )
        assert trace.level_checks == {2: "iso", 1: "iso", 0: "iso"}
        replay_verified(k, seq, expect=trace.result)

    def test_three_sphere_barycentric_alpha(self):
        # non-identity alpha in dimension 3: every restricted subdivision is
        # a 24-tetrahedron ball whose shelling drives the starring
        import itertools

        k = close_under_faces(itertools.combinations(range(5), 4))
        alpha = barycentric(k)
        seq, trace = alpha_to_beta(k, alpha)
        assert trace.per_level_moves == {3: 120, 2: 120, 1: 120}
        assert find_isomorphism(trace.result, barycentric(k).complex) is not None
        replay_verified(alpha.complex, seq, expect=trace.result)

    def test_requires_closed_pseudomanifold(self):
        k = close_under_faces([(0, 1, 2)])
        with pytest.raises(ReductionError):
            alpha_to_beta(k, identity_subdivision(k))

    def test_intermediate_levels_verified(self):
        k = boundary_delta3()
        _, trace = alpha_to_beta(k, identity_subdivision(k), level_check="iso")
        assert trace.level_checks == {1: "iso", 0: "iso"}


class TestBetaSquaredBridge:
    def split_edge_subdivision(self, k, edge):
        """Subdivision of k splitting one edge at a new vertex."""
        from trimoves.subdivision import SubdividedComplex

        w = k.max_label() + 1
        simps = set()
        carrier = {}
        for s in k.simplexes:
            if edge[0] in s and edge[1] in s:
                rest = tuple(v for v in s if v not in edge)
                for half in (edge[0],), (edge[1],):
                    child = tuple(sorted(half + (w,) + rest))
                    simps.add(child)
                    carrier[child] = s
                mid = tuple(sorted((w,) + rest))
                simps.add(mid)
                carrier[mid] = s if not rest else s
            else:
                simps.add(s)
                carrier[s] = s
        from trimoves.complexes import Complex

        out = Complex(simps, _assume_closed=True)
        carrier = {s: carrier[s] for s in out.simplexes}
        return SubdividedComplex(out, k, carrier)

    def test_bridge_on_identity_subdivision(self):
        # kprime = k reduces to the plain two-extra-layer behaviour
        k = close_under_faces([(0, 1), (1, 2), (0, 2)])
        seq, trace = beta2_bridge(k, identity_subdivision(k))
        n, p = 1, k.f_vector()
        s_id = skeleton_counts(identity_subdivision(k))
        assert len(seq) <= bridge_sum_bound(n, p, s_id)
        assert find_isomorphism(trace.result, barycentric(k).complex) is not None

    def test_four_cycle_one_edge_split(self):
        k = close_under_faces([(0, 1), (1, 2), (2, 3), (0, 3)])
        kprime = self.split_edge_subdivision(k, (0, 1))
        kprime.validate()
        seq, trace = beta2_bridge(k, kprime)
        out = apply_sequence(kprime.complex and trace.result, seq.reversed())
        # replay back from the endpoint reproduces the bridged start
        assert out.digest() == seq.start_digest
        assert find_isomorphism(trace.result, barycentric(k).complex) is not None
        assert len(seq) <= bridge_sum_bound(1, k.f_vector(), skeleton_counts(kprime))

    def test_torus_one_edge_split(self):
        k = grid_torus_complex(3).complex
        edge = k.simplexes_of_dim(1)[0]
        kprime = self.split_edge_subdivision(k, edge)
        kprime.validate()
        seq, trace = beta2_bridge(k, kprime, level_check="auto")
        assert trace.level_checks == {1: "iso", 0: "iso"}
        assert len(seq) <= bridge_sum_bound(2, k.f_vector(), skeleton_counts(kprime))
        assert find_isomorphism(trace.result, barycentric(k).complex) is not None
        assert seq.removed_vertices() & set(k.vertices()) == set()


class TestRelate:
    def test_identical_circles(self):
        k = circle_complex(4)
        res = relate(k, k)
        assert res.sequence.start_digest == res.start.digest()
        # start and end complexes are isomorphic (identical inputs)
        assert find_isomorphism(res.start, res.end) is not None

    def test_circles_three_and_five(self):
        k1 = circle_complex(3)
        k2 = circle_complex(5, offset=0.09)
        res = relate(k1, k2)
        assert len(res.sequence) < res.bound_value
        assert res.escalation_layers == 0
        replay_verified(res.start, res.sequence, expect=res.end)

    def test_small_shifted_tori(self):
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3, shift=(1 / 6, 1 / 6))
        res = relate(k1, k2, level_check="off", verify=False)
        assert len(res.sequence) < res.bound_value
        # both endpoints are barycentric subdivisions of 18-triangle tori
        assert res.start.f_vector()[2] == 108
        assert res.end.f_vector()[2] == 108

    def test_rejects_mismatched_periods(self):
        with pytest.raises(ReductionError):
            relate(circle_complex(3), circle_complex(3, period=2.0))

    def test_pipeline_deterministic(self):
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3, shift=(1 / 6, 1 / 6))
        a = relate(k1, k2, verify=False, level_check="off")
        b = relate(
            grid_torus_complex(3),
            grid_torus_complex(3, shift=(1 / 6, 1 / 6)),
            verify=False,
            level_check="off",
        )
        assert a.sequence == b.sequence
        assert a.start.canonical_json() == b.start.canonical_json()

    def test_pre_subdivision_kicks_in_for_fat_simplexes(self):
        # a jittered vertex can push a triangle's metric diameter past
        # half the period while every coordinate difference stays liftable:
        # the pipeline must pre-subdivide once before intersecting
        k1 = grid_torus_complex(3)
        k2 = grid_torus_complex(3)
        k2.coords[4] = (k2.coords[4] + np.array([0.05, 0.045])) % 1.0
        assert k2.max_edge() >= 0.5
        res = relate(k1, k2, level_check="off", verify=False)
        assert res.pre_subdivision_depth == 1
        # shared barycenters of the untouched region survive as common
        # vertices and are preserved by the whole sequence
        assert len(res.common_vertices) > 8
        assert res.sequence.removed_vertices() & res.common_vertices == set()
        replay_verified(res.start, res.sequence, expect=res.end)
