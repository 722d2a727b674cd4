import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import PROPERTY_SETTINGS, dense_norm, directed_networks, random_network, undirected_networks
from exceptions import DomainError
from graph_transforms import (
    SplitMap, audit_reduction, clique_reduce, count_triangles, star_decompose, symmetrize, vertex_split,
)
from network_model import DirectedNetwork, UndirectedNetwork
from network_stats import components, degree_profile


@st.composite
def connected_graphs(draw, max_n: int = 9):
    """A spanning tree on n vertices plus a random set of extra edges."""
    n = draw(st.integers(min_value=2, max_value=max_n))
    edges = {(draw(st.integers(0, v - 1)), v) for v in range(1, n)}
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges |= set(draw(st.lists(st.sampled_from(pairs), max_size=2 * n)))
    return UndirectedNetwork.from_edges(n, [(u, v, 1.0) for u, v in sorted(edges)])


class TestSymmetrize:
    def test_both_directions_take_the_maximum(self):
        u = symmetrize(DirectedNetwork.from_entries(2, [(0, 1, 3.0), (1, 0, 5.0)]))
        assert u.edges == [(0, 1, 5.0)]

    def test_diagonal_is_dropped(self):
        assert symmetrize(DirectedNetwork.from_entries(3, [(2, 2, 7.0)])).edge_count == 0

    def test_empty(self):
        assert symmetrize(DirectedNetwork.empty(4)) == UndirectedNetwork.empty(4)

    def test_one_sided_negative_weight_meets_the_absent_zero(self):
        u = symmetrize(DirectedNetwork.from_entries(3, [(0, 1, -2.0), (1, 2, -1.0), (2, 1, -3.0)]))
        assert u.edges == [(1, 2, -1.0)]

    @PROPERTY_SETTINGS
    @given(u=undirected_networks(max_n=10))
    def test_symmetrizing_a_lift_returns_the_graph(self, u):
        assert symmetrize(u.to_directed()) == u

    @PROPERTY_SETTINGS
    @given(net=directed_networks(max_n=8))
    def test_result_dominates_both_orientations(self, net):
        u = symmetrize(net)
        dense = np.zeros((net.n, net.n))
        dense[u.us, u.vs] = u.weights
        dense = np.maximum(dense, dense.T)
        for i, j, w in net.entries:
            if i != j:
                assert dense[i, j] >= w


class TestVertexSplit:
    def test_both_sided_triangle(self, both_sided_triangle):
        split, split_map = vertex_split(both_sided_triangle)
        assert split.n == 6 and split.entry_count == 6
        plus = set(split_map.plus.tolist())
        minus = set(split_map.minus.tolist())
        assert plus.isdisjoint(minus)
        assert set(split.rows.tolist()) <= plus and set(split.cols.tolist()) <= minus

    def test_single_edge(self):
        split, split_map = vertex_split(DirectedNetwork.from_entries(2, [(0, 1, 2.5)]))
        assert split.entries == [(0, 1, 2.5)]
        assert split_map.rows() == [(0, 0, -1), (1, -1, 1)]

    def test_self_loop_becomes_plus_to_minus(self):
        split, split_map = vertex_split(DirectedNetwork.from_entries(3, [(1, 1, 4.0)]))
        assert split.entries == [(0, 1, 4.0)]
        assert split_map.rows() == [(1, 0, 1)]
        assert split_map.origin.tolist() == [1, 1] and split_map.sign.tolist() == [1, -1]

    def test_empty_network_keeps_one_vertex(self):
        split, split_map = vertex_split(DirectedNetwork.empty(5))
        assert split.n == 1 and split.entry_count == 0
        assert split_map.vertex_count == 0

    def test_split_map_rebuilds_from_rows(self, split_example):
        _, split_map = vertex_split(split_example)
        assert SplitMap.from_rows(split_map.n, split_map.rows()) == split_map

    def test_malformed_split_map_rows_are_rejected(self):
        with pytest.raises(DomainError):
            SplitMap.from_rows(2, [(3, 0, 1)])
        with pytest.raises(DomainError):
            SplitMap.from_rows(2, [(0, 0, 2)])

    @PROPERTY_SETTINGS
    @given(net=directed_networks(max_n=8))
    def test_split_preserves_the_norm(self, net):
        split, _ = vertex_split(net)
        expected = dense_norm(net)
        assert abs(dense_norm(split) - expected) <= 1e-9 * max(1.0, expected)


class TestCliqueReduce:
    def test_both_sided_triangle(self, both_sided_triangle):
        result = clique_reduce(both_sided_triangle)
        h = result.h
        assert h.n == 6 and h.edge_count == 6
        assert count_triangles(h) == 0
        assert degree_profile(h).d.tolist() == [2] * 6
        assert dense_norm(both_sided_triangle) == pytest.approx(2.0)
        assert dense_norm(both_sided_triangle) <= dense_norm(h) + 1e-9
        assert len(result.components) == 1 and result.components[0].excess == 0

    def test_single_edge(self):
        w = DirectedNetwork.from_entries(2, [(0, 1, 3.0)])
        h = clique_reduce(w).h
        assert h.edges == [(0, 1, 3.0)]
        assert dense_norm(h) == pytest.approx(dense_norm(w))

    def test_single_edge_passes_the_excess_audit(self):
        w = DirectedNetwork.from_entries(2, [(0, 1, 1.0)])
        audit = audit_reduction(w, clique_reduce(w))
        assert audit.excess_bound and audit.passed

    def test_tree_components_pass_the_excess_audit(self):
        w = DirectedNetwork.from_entries(6, [(0, 1, 1.0), (1, 2, 2.0), (3, 4, 0.5), (5, 4, 1.5)])
        audit = audit_reduction(w, clique_reduce(w))
        assert audit.excess_violations == 0 and audit.passed

    def test_split_example(self, split_example):
        result = clique_reduce(split_example)
        assert result.h.edge_count == split_example.entry_count == 17
        assert result.split_map.vertex_count == 15
        assert count_triangles(result.h) == 0
        audit = audit_reduction(split_example, result)
        assert audit.passed
        assert audit.vertices_w == 10

    def test_negative_weights_are_rejected(self):
        with pytest.raises(DomainError):
            clique_reduce(DirectedNetwork.from_entries(2, [(0, 1, -1.0)]))

    def test_triangle_count_of_a_triangle(self):
        u = UndirectedNetwork.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (2, 3, 1.0)])
        assert count_triangles(u) == 1

    @pytest.mark.parametrize("seed", range(4))
    def test_random_network_audit(self, seed):
        w = random_network(400, 3.0 / 400, seed=seed).abs()
        result = clique_reduce(w)
        audit = audit_reduction(w, result)
        assert audit.passed, audit.to_dict()

    def test_reduction_suite(self):
        for stream in range(1000):
            n = 1 + stream % 10
            p = (0.2, 0.5, 0.9)[stream % 3]
            alpha = (0.5, 1.0, 3.0)[(stream // 3) % 3]
            w = random_network(n, p, seed=2024, alpha=alpha, stream=stream).abs()
            split, _ = vertex_split(w)
            result = clique_reduce(w)
            norm_w, norm_h = dense_norm(w), dense_norm(result.h)
            assert audit_reduction(w, result).passed, (stream, n, p, alpha)
            assert abs(dense_norm(split) - norm_w) <= 1e-9 * max(1.0, norm_w)
            assert norm_w <= norm_h + 1e-9 * max(1.0, norm_w)

    @PROPERTY_SETTINGS
    @given(w=directed_networks(max_n=8))
    def test_reduction_properties(self, w):
        result = clique_reduce(w)
        audit = audit_reduction(w, result)
        assert audit.passed, audit.to_dict()
        assert dense_norm(w) <= dense_norm(result.h) + 1e-9 * max(1.0, dense_norm(w))


class TestNullity:
    @PROPERTY_SETTINGS
    @given(u=connected_graphs(), data=st.data())
    def test_connected_subgraphs_have_no_larger_excess(self, u, data):
        (whole,) = components(u)
        mask = np.array(data.draw(st.lists(st.booleans(), min_size=u.edge_count, max_size=u.edge_count)),
                        dtype=bool)
        for part in components(u.select(mask)):
            assert part.excess <= whole.excess


class TestStarDecompose:
    def test_single_star(self):
        u = UndirectedNetwork.from_edges(6, [(0, j, 1.0) for j in range(1, 6)])
        result = star_decompose(u, 3)
        assert result.hubs == [0]
        assert len(result.stars) == 1 and result.stars[0] == u
        assert result.remainder.edge_count == 0 and result.success

    def test_path_has_no_stars(self):
        u = UndirectedNetwork.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        result = star_decompose(u, 3)
        assert result.stars == [] and result.remainder == u and result.success

    def test_adjacent_hubs(self):
        # Hub 0 claims vertex 5, so hub 5 is never a centre.
        edges = [(0, j, 1.0) for j in range(1, 6)] + [(5, j, 1.0) for j in range(6, 9)]
        result = star_decompose(UndirectedNetwork.from_edges(9, edges), 3)
        assert result.hubs == [0]
        assert result.remainder.edge_count == 3
        assert not result.success

    def test_threshold_must_be_positive(self):
        with pytest.raises(DomainError):
            star_decompose(UndirectedNetwork.empty(3), 0)

    @pytest.mark.parametrize("seed", range(3))
    def test_random_graph_edges_are_partitioned(self, seed):
        u = symmetrize(random_network(500, 4.0 / 500, seed=seed).abs())
        result = star_decompose(u, 4)
        union = result.star_union()
        assert union.edge_count + result.remainder.edge_count == u.edge_count
        combined = sorted(union.edges + result.remainder.edges)
        assert combined == sorted(u.edges)

    @PROPERTY_SETTINGS
    @given(u=undirected_networks(max_n=10), threshold=st.integers(1, 4))
    def test_stars_are_vertex_disjoint(self, u, threshold):
        result = star_decompose(u, threshold)
        degree = degree_profile(u).d
        seen = set()
        for hub, star in zip(result.hubs, result.stars):
            assert degree[hub] >= threshold
            vertices = set(star.us.tolist()) | set(star.vs.tolist())
            assert hub in vertices
            assert all(hub in (a, b) for a, b, _ in star.edges)
            assert seen.isdisjoint(vertices)
            seen |= vertices
        assert sum(s.edge_count for s in result.stars) + result.remainder.edge_count == u.edge_count
