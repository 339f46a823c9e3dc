import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridreduce import Dataset, GridSpec, knn_brute, knn_indexed
from gridreduce.neighbors import knn_brute_points, knn_indexed_points
from conftest import dataset_from_cells, random_dataset, random_points
from oracles import naive_knn


def assert_neighbor_lists_equal(a, b):
    assert a.k == b.k
    assert np.array_equal(a.point_ids, b.point_ids)
    assert np.array_equal(a.neighbor_ids, b.neighbor_ids)
    assert np.array_equal(a.distances, b.distances)


class TestBruteExamples:
    def test_collinear_tie_breaks_to_lower_id(self):
        # normalized x positions 0, 0.5, 1.0; all other dimensions degenerate
        d = dataset_from_cells((3, 1, 1), [(0, 0, 0), (1, 0, 0), (2, 0, 0)], [[1.0]] * 3)
        nl = knn_brute(d, 1)
        assert nl.neighbor_ids[1].tolist() == [0]
        assert nl.distances[1].tolist() == [0.5]

    def test_unit_square_edges_before_diagonal(self):
        d = dataset_from_cells(
            (2, 2, 1), [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)], [[1.0]] * 4
        )
        nl = knn_brute(d, 2)
        # each corner's two nearest are the edge-adjacent corners at distance 1
        assert np.all(nl.distances == 1.0)
        assert sorted(nl.neighbor_ids[0].tolist()) == [1, 2]
        assert sorted(nl.neighbor_ids[3].tolist()) == [1, 2]

    def test_duplicated_pair_listed_first_at_distance_zero(self):
        X = np.array([[0.2, 0.2, 0.0, 0.0],
                      [0.9, 0.9, 0.0, 0.0],
                      [0.2, 0.2, 0.0, 0.0]])
        nl = knn_brute_points(X, np.arange(3), 2)
        assert nl.neighbor_ids[0][0] == 2 and nl.distances[0][0] == 0.0
        assert nl.neighbor_ids[2][0] == 0 and nl.distances[2][0] == 0.0

    def test_k_at_least_n_minus_one_lists_everything(self):
        X = np.array([[0.0, 0.0], [0.3, 0.0], [0.9, 0.0], [0.1, 0.5]])
        nl = knn_brute_points(X, np.arange(4), 99)
        assert nl.list_length == 3
        for row in nl.distances:
            assert np.all(np.diff(row) >= 0)

    def test_preconditions(self):
        d = dataset_from_cells((2, 1, 1), [(0, 0, 0)], [[1.0]])
        with pytest.raises(ValueError, match="at least 2"):
            knn_brute(d, 1)
        d2 = dataset_from_cells((2, 1, 1), [(0, 0, 0), (1, 0, 0)], [[1.0], [2.0]])
        with pytest.raises(ValueError, match="k must be"):
            knn_brute(d2, 0)

    def test_matches_pure_python_oracle(self, rng):
        for _ in range(5):
            X = random_points(rng, int(rng.integers(3, 40)))
            ids = np.arange(X.shape[0])
            k = int(rng.integers(1, 8))
            nl = knn_brute_points(X, ids, k)
            expected = naive_knn(X, ids, k)
            for row, pairs in enumerate(expected):
                assert nl.neighbor_ids[row].tolist() == [p[1] for p in pairs]
                assert nl.distances[row].tolist() == [p[0] for p in pairs]


class TestIndexedEqualsBrute:
    def test_on_random_datasets(self, rng):
        for _ in range(20):
            d = random_dataset(rng, n_max=300)
            k = int(rng.integers(1, 33))
            assert_neighbor_lists_equal(knn_brute(d, k), knn_indexed(d, k))

    def test_on_duplicated_points(self, rng):
        for _ in range(10):
            X = random_points(rng, int(rng.integers(4, 120)), with_duplicates=True)
            ids = np.arange(X.shape[0])
            k = int(rng.integers(1, 33))
            assert_neighbor_lists_equal(
                knn_brute_points(X, ids, k), knn_indexed_points(X, ids, k)
            )

    def test_workers_do_not_change_results(self, rng):
        d = random_dataset(rng, n_min=50, n_max=400)
        assert_neighbor_lists_equal(knn_indexed(d, 10, workers=1), knn_indexed(d, 10, workers=4))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000), k=st.integers(1, 12))
    def test_property_small_random(self, seed, k):
        d = random_dataset(np.random.default_rng(seed), n_max=60)
        assert_neighbor_lists_equal(knn_brute(d, k), knn_indexed(d, k))


class TestInvariants:
    def test_no_self_and_sorted_distances(self, rng):
        for _ in range(10):
            d = random_dataset(rng, n_max=150)
            nl = knn_indexed(d, 8)
            for row in range(nl.n_points):
                assert nl.point_ids[row] not in nl.neighbor_ids[row]
                assert np.all(np.diff(nl.distances[row]) >= 0)

    def test_insertion_order_irrelevant(self, rng):
        d = random_dataset(rng, n_min=30, n_max=200)
        perm = rng.permutation(d.n_points)
        shuffled = Dataset(d.spec, d.ids[perm], d.attrs[perm])
        assert_neighbor_lists_equal(knn_indexed(d, 6), knn_indexed(shuffled, 6))

    def test_contract_on_synthetic_blob(self):
        from gridreduce import generate_synthetic, SyntheticSpec

        spec = SyntheticSpec(dims=(32, 32, 8), blobs=(((0.5, 0.5, 0.5), 0.25, 0.003),), seed=1)
        d = generate_synthetic(spec)
        nl = knn_indexed(d, 20)
        assert nl.n_points == d.n_points
        assert nl.list_length == 20
        assert np.all(np.diff(nl.distances, axis=1) >= 0)
