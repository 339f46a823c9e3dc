import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridreduce import (
    Dataset,
    GridSpec,
    NULL_SENTINEL,
    filter_null,
    normalize_point,
    normalized_features,
)
from conftest import dataset_from_cells, random_dataset


class TestGridSpec:
    def test_validates_dims(self):
        with pytest.raises(ValueError):
            GridSpec((0, 4, 4))
        with pytest.raises(ValueError):
            GridSpec((4, 4))

    def test_validates_attr_names(self):
        with pytest.raises(ValueError):
            GridSpec((2, 2, 2), attr_names=())
        with pytest.raises(ValueError):
            GridSpec((2, 2, 2), attr_names=("a", "a"))

    def test_validates_timestep(self):
        with pytest.raises(ValueError):
            GridSpec((2, 2, 2), timestep=-1)

    def test_cell_id_row_major_x_fastest(self):
        spec = GridSpec((3, 4, 5))
        assert spec.cell_id(np.array([1, 0, 0])) == 1
        assert spec.cell_id(np.array([0, 1, 0])) == 3
        assert spec.cell_id(np.array([0, 0, 1])) == 12
        assert spec.cell_id(np.array([2, 3, 4])) == spec.n_cells - 1

    def test_cell_id_index_round_trip(self):
        spec = GridSpec((5, 3, 7))
        ids = np.arange(spec.n_cells)
        assert np.array_equal(spec.cell_id(spec.cell_index(ids)), ids)


class TestDataset:
    def test_rejects_duplicate_ids(self):
        spec = GridSpec((4, 1, 1))
        with pytest.raises(ValueError, match="duplicate"):
            Dataset(spec, [0, 1, 1], [[0.1], [0.2], [0.3]])

    def test_rejects_out_of_range_ids(self):
        spec = GridSpec((2, 2, 1))
        with pytest.raises(ValueError):
            Dataset(spec, [0, 7], [[0.1], [0.2]])

    def test_sorts_by_id_regardless_of_input_order(self):
        spec = GridSpec((4, 1, 1))
        a = Dataset(spec, [3, 0, 2], [[0.3], [0.0], [0.2]])
        b = Dataset(spec, [0, 2, 3], [[0.0], [0.2], [0.3]])
        assert np.array_equal(a.ids, b.ids)
        assert np.array_equal(a.attrs, b.attrs)

    def test_null_mask_from_sentinel(self):
        d = dataset_from_cells(
            (4, 1, 1), [(0, 0, 0), (1, 0, 0), (2, 0, 0)], [[1.0], [NULL_SENTINEL], [2.0]]
        )
        assert d.is_null.tolist() == [False, True, False]
        assert d.nonnull_count == 2

    def test_attr_ranges_over_nonnull_only(self):
        d = dataset_from_cells(
            (4, 1, 1), [(0, 0, 0), (1, 0, 0), (2, 0, 0)], [[1.0], [NULL_SENTINEL], [5.0]]
        )
        assert d.attr_ranges.tolist() == [[1.0, 5.0]]

    def test_subset_keep_ranges(self):
        d = dataset_from_cells(
            (4, 1, 1), [(0, 0, 0), (1, 0, 0), (2, 0, 0)], [[1.0], [3.0], [5.0]]
        )
        sub = d.subset([0, 1], keep_ranges=True)
        assert sub.attr_ranges.tolist() == [[1.0, 5.0]]
        sub_own = d.subset([0, 1])
        assert sub_own.attr_ranges.tolist() == [[1.0, 3.0]]


class TestFilterNull:
    def test_drops_exactly_the_sentinel_points(self):
        cells = [(i, 0, 0) for i in range(5)]
        values = [[0.1], [NULL_SENTINEL], [0.3], [NULL_SENTINEL], [0.5]]
        d = dataset_from_cells((5, 1, 1), cells, values)
        f = filter_null(d)
        assert f.n_points == 3
        assert f.ids.tolist() == [0, 2, 4]
        assert not f.is_null.any()

    def test_empty_dataset(self):
        spec = GridSpec((2, 2, 2))
        d = Dataset(spec, np.empty(0, dtype=np.int64), np.empty((0, 1)))
        assert filter_null(d).n_points == 0

    def test_count_matches_direct_scan_on_seeded_grid(self, rng):
        # 8x8x4 grid with ~10% sentinel cells
        n = 8 * 8 * 4
        values = rng.uniform(0.0, 1.0, size=n)
        nulled = rng.choice(n, size=n // 10, replace=False)
        values[nulled] = NULL_SENTINEL
        d = Dataset(GridSpec((8, 8, 4)), np.arange(n), values)
        expected = sum(1 for v in values if v != NULL_SENTINEL)
        assert filter_null(d).n_points == expected

    def test_idempotent(self, rng):
        for _ in range(5):
            d = random_dataset(rng)
            # poke some nulls in
            values = d.attrs.copy()
            values[:: max(1, d.n_points // 3)] = NULL_SENTINEL
            d = Dataset(d.spec, d.ids, values)
            once = filter_null(d)
            twice = filter_null(once)
            assert np.array_equal(once.ids, twice.ids)
            assert np.array_equal(once.attrs, twice.attrs)
            assert np.array_equal(once.attr_ranges, twice.attr_ranges)


class TestNormalizePoint:
    def _qcloud_dataset(self):
        # two corners spanning the attribute range plus a midpoint value;
        # points are stored sorted by id: corner, midpoint, far corner
        cells = [(0, 0, 0), (2, 2, 2), (4, 4, 4)]
        values = [[0.0], [0.00166], [0.00332]]
        return dataset_from_cells((5, 5, 5), cells, values)

    def test_corner_at_minimum_maps_to_zero(self):
        d = self._qcloud_dataset()
        assert normalize_point(d, d.record(0)).tolist() == [0.0, 0.0, 0.0, 0.0]

    def test_opposite_corner_at_maximum_maps_to_one(self):
        d = self._qcloud_dataset()
        assert normalize_point(d, d.record(2)).tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_midpoint_attribute_maps_to_half(self):
        d = self._qcloud_dataset()
        out = normalize_point(d, d.record(1))
        assert abs(out[3] - 0.5) < 1e-9

    def test_rejects_null_point(self):
        d = dataset_from_cells((2, 1, 1), [(0, 0, 0), (1, 0, 0)], [[1.0], [NULL_SENTINEL]])
        with pytest.raises(ValueError, match="null"):
            normalize_point(d, d.record(1))

    def test_degenerate_axis_maps_to_zero(self):
        d = dataset_from_cells((1, 1, 3), [(0, 0, 0), (0, 0, 2)], [[2.0], [2.0]])
        for pos in range(2):
            out = normalize_point(d, d.record(pos))
            assert out[0] == 0.0 and out[1] == 0.0
            assert out[3] == 0.0  # min == max
        assert normalize_point(d, d.record(1))[2] == 1.0

    def test_weights_scale_columns(self):
        d = self._qcloud_dataset()
        out = normalize_point(d, d.record(2), weights=[1.0, 2.0, 1.0, 0.5])
        assert out.tolist() == [1.0, 2.0, 1.0, 0.5]

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_components_always_in_unit_interval(self, seed):
        d = random_dataset(np.random.default_rng(seed))
        feats = normalized_features(d.spec, d.attr_ranges, d.index_array(), d.attrs)
        assert np.all(feats >= 0.0) and np.all(feats <= 1.0)


class TestRecords:
    def test_record_round_trip(self):
        d = dataset_from_cells((3, 2, 2), [(2, 1, 1), (0, 0, 0)], [[0.7], [0.1]])
        recs = list(d.records())
        assert recs[0].idx == (0, 0, 0) and recs[0].attrs == (0.1,)
        assert recs[1].idx == (2, 1, 1) and recs[1].attrs == (0.7,)
        assert [r.id for r in recs] == d.ids.tolist()
