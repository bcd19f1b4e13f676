import numpy as np
import pytest

from src.errors import DataError
from src.shdi.matrix import Edge, ShdiMatrix, matrix_stats
from src.shdi.synthetic import make_synthetic
from tests.oracles import brute_adjacency


class TestNeighbors:
    def test_isolated_node_is_empty(self, triangle):
        assert triangle.neighbors(3) == []

    def test_star_center(self):
        star = ShdiMatrix.from_triples(4, [(0, 1, 1.0), (0, 2, 2.0), (3, 0, 3.0)])
        assert star.neighbors(0) == [(1, 1.0), (2, 2.0), (3, 3.0)]
        assert star.degrees.tolist() == [3, 1, 1, 1]

    def test_self_loop_appears_once(self, triangle):
        assert triangle.neighbors(2) == [(1, 0.2), (2, 1.0)]
        assert triangle.degrees[2] == 2

    def test_out_of_range(self, triangle):
        with pytest.raises(IndexError):
            triangle.neighbors(4)
        with pytest.raises(IndexError):
            triangle.neighbors(-1)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force_scan(self, seed):
        mat, _ = make_synthetic(20, rank=2, density=0.25, seed=seed)
        assert mat.adjacency == brute_adjacency(mat)
        assert mat.degrees.tolist() == [len(row) for row in brute_adjacency(mat)]

    def test_adjacency_is_symmetric(self):
        mat, _ = make_synthetic(60, rank=2, density=0.1, seed=3)
        for m, row in enumerate(mat.adjacency):
            for n, y in row:
                assert (m, y) in mat.neighbors(n)


class TestConstruction:
    def test_from_triples_canonicalizes(self):
        mat = ShdiMatrix.from_triples(3, [(2, 0, 1.5), (1, 1, 0.5)])
        assert mat.edges == (Edge(0, 2, 1.5), Edge(1, 1, 0.5))

    def test_duplicate_pair_rejected(self):
        with pytest.raises(DataError):
            ShdiMatrix.from_triples(3, [(0, 1, 1.0), (1, 0, 1.0)])

    def test_index_out_of_range(self):
        with pytest.raises(DataError):
            ShdiMatrix.from_triples(2, [(0, 2, 1.0)])

    def test_negative_weight(self):
        with pytest.raises(DataError):
            ShdiMatrix.from_triples(2, [(0, 1, -1.0)])

    def test_arrays_are_read_only(self, triangle):
        with pytest.raises(ValueError):
            triangle.weights[0] = 2.0

    def test_slot_matrix_is_symmetric(self, triangle):
        dense = triangle.slot_matrix(triangle.weights).toarray()
        np.testing.assert_array_equal(dense, dense.T)
        assert dense[2, 2] == 1.0
        assert dense[0, 1] == dense[1, 0] == 0.5

    def test_subset_keeps_universe(self, triangle):
        part = triangle.subset([2, 0])
        assert part.node_count == 4
        assert part.labels == triangle.labels
        assert part.edges == (Edge(0, 1, 0.5), Edge(2, 2, 1.0))

    def test_equality(self, triangle):
        same = ShdiMatrix.from_triples(4, [(2, 2, 1.0), (1, 0, 0.5), (2, 1, 0.2)])
        assert same == triangle
        assert triangle != triangle.subset([0])


class TestStats:
    def test_counts(self, triangle):
        stats = matrix_stats(triangle)
        assert stats["nodes"] == 4
        assert stats["pairs"] == 3
        assert stats["entries"] == 5
        assert stats["self_loops"] == 1
        assert stats["isolated_nodes"] == 1
        assert stats["max_degree"] == 2
        assert stats["density"] == pytest.approx(5 / 16)
        assert stats["density_off_diagonal"] == pytest.approx(4 / 12)
        assert stats["weight_max"] == 1.0
