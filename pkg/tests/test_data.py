import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minreveal.data import (
    Dataset,
    FeaturePartition,
    NormalizationSpec,
    apply_normalizer,
    fit_normalizer,
    load_csv,
    sample_partition,
    split,
)
from minreveal.errors import CellParseError, DataError, MissingColumnError


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_numeric_columns(self, tmp_path):
        path = write_csv(tmp_path, "a,b,y\n1,2,0\n3,4,1\n5,6,0\n")
        ds = load_csv(path, "y")
        assert ds.num_features == 2
        assert ds.num_classes == 2
        np.testing.assert_allclose(ds.features, [[1, 2], [3, 4], [5, 6]])
        np.testing.assert_array_equal(ds.labels, [0, 1, 0])

    def test_one_hot_encoding(self, tmp_path):
        path = write_csv(tmp_path, "color,y\nred,0\nblue,1\nred,1\n")
        ds = load_csv(path, "y")
        assert ds.feature_names == ["color=blue", "color=red"]
        np.testing.assert_allclose(ds.features, [[0, 1], [1, 0], [0, 1]])

    def test_missing_label_column(self, tmp_path):
        path = write_csv(tmp_path, "a,b\n1,2\n")
        with pytest.raises(MissingColumnError, match="'y'"):
            load_csv(path, "y")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv", "y")

    def test_empty_cell_names_row_and_column(self, tmp_path):
        path = write_csv(tmp_path, "a,b,y\n1,2,0\n1,,1\n")
        with pytest.raises(CellParseError, match="row 2.*'b'"):
            load_csv(path, "y")

    def test_string_labels_map_to_contiguous_ids(self, tmp_path):
        path = write_csv(tmp_path, "a,y\n1,no\n2,yes\n3,no\n")
        ds = load_csv(path, "y")
        np.testing.assert_array_equal(ds.labels, [0, 1, 0])


class TestNormalizer:
    def test_midpoint_maps_to_zero(self):
        ds = Dataset(np.array([[0.0], [10.0]]), np.array([0, 1]), ["a"], 2)
        spec = fit_normalizer(ds)
        assert spec.mins[0] == 0 and spec.maxs[0] == 10
        probe = Dataset(np.array([[5.0]]), np.array([0]), ["a"], 2)
        assert apply_normalizer(spec, probe).features[0, 0] == 0.0

    def test_constant_column_maps_to_zero(self):
        ds = Dataset(np.array([[3.0], [3.0], [3.0]]), np.array([0, 1, 0]), ["a"], 2)
        out = apply_normalizer(fit_normalizer(ds), ds)
        np.testing.assert_allclose(out.features, 0.0)

    def test_already_normalized_is_identity(self):
        ds = Dataset(np.array([[-1.0], [1.0], [0.25]]), np.array([0, 1, 0]), ["a"], 2)
        out = apply_normalizer(fit_normalizer(ds), ds)
        np.testing.assert_allclose(out.features, ds.features)

    def test_out_of_range_clips(self):
        train = Dataset(np.array([[0.0], [10.0]]), np.array([0, 1]), ["a"], 2)
        spec = fit_normalizer(train)
        probe = Dataset(np.array([[12.0], [0.0], [5.0]]), np.array([0, 1, 0]), ["a"], 2)
        out = apply_normalizer(spec, probe)
        np.testing.assert_allclose(out.features[:, 0], [1.0, -1.0, 0.0])

    def test_column_count_mismatch(self):
        train = Dataset(np.array([[0.0], [1.0]]), np.array([0, 1]), ["a"], 2)
        spec = fit_normalizer(train)
        probe = Dataset(np.zeros((1, 2)), np.array([0]), ["a", "b"], 2)
        with pytest.raises(DataError, match="mismatch"):
            apply_normalizer(spec, probe)

    def test_empty_dataset_rejected(self):
        ds = Dataset(np.zeros((0, 1)), np.zeros(0, dtype=int), ["a"], 2)
        with pytest.raises(DataError):
            fit_normalizer(ds)

    def test_json_round_trip(self):
        spec = NormalizationSpec(("a", "b"), np.array([0.0, -2.0]), np.array([1.0, 5.0]))
        back = NormalizationSpec.from_json(spec.to_json())
        assert back.feature_names == spec.feature_names
        np.testing.assert_allclose(back.mins, spec.mins)
        np.testing.assert_allclose(back.maxs, spec.maxs)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_hits_bounds(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(scale=rng.uniform(0.5, 10), size=(rng.integers(2, 30), rng.integers(1, 6)))
        ds = Dataset(x, rng.integers(0, 2, size=x.shape[0]), [f"c{i}" for i in range(x.shape[1])], 2)
        out = apply_normalizer(fit_normalizer(ds), ds)
        assert np.all(out.features >= -1) and np.all(out.features <= 1)
        for col in range(x.shape[1]):
            if x[:, col].min() < x[:, col].max():
                assert out.features[:, col].min() == -1.0
                assert out.features[:, col].max() == 1.0


class TestSplit:
    def test_split_sizes(self):
        ds = Dataset(np.arange(20.0).reshape(10, 2), np.zeros(10, dtype=int), ["a", "b"], 2)
        train, test = split(ds, 0.7, 0)
        assert train.num_rows == 7 and test.num_rows == 3

    def test_same_seed_same_split(self):
        ds = Dataset(np.arange(40.0).reshape(20, 2), np.zeros(20, dtype=int), ["a", "b"], 2)
        a = split(ds, 0.5, 3)
        b = split(ds, 0.5, 3)
        np.testing.assert_array_equal(a[0].features, b[0].features)
        np.testing.assert_array_equal(a[1].features, b[1].features)

    def test_different_seeds_differ(self):
        ds = Dataset(np.arange(200.0).reshape(100, 2), np.zeros(100, dtype=int), ["a", "b"], 2)
        a = split(ds, 0.7, 0)[0]
        b = split(ds, 0.7, 1)[0]
        assert not np.array_equal(a.features, b.features)

    def test_rows_are_disjoint_and_complete(self):
        ds = Dataset(np.arange(100.0).reshape(50, 2), np.zeros(50, dtype=int), ["a", "b"], 2)
        train, test = split(ds, 0.3, 9)
        seen = np.concatenate([train.features[:, 0], test.features[:, 0]])
        assert sorted(seen) == sorted(ds.features[:, 0])

    def test_fraction_out_of_range(self):
        ds = Dataset(np.zeros((4, 1)), np.zeros(4, dtype=int), ["a"], 2)
        with pytest.raises(ValueError):
            split(ds, 1.0, 0)


class TestPartition:
    def test_no_sensitive(self):
        part = sample_partition(5, 0, 0)
        assert part.sensitive_idx == ()
        assert part.public_idx == (0, 1, 2, 3, 4)

    def test_all_sensitive(self):
        part = sample_partition(5, 5, 0)
        assert part.public_idx == ()
        assert part.sensitive_idx == (0, 1, 2, 3, 4)

    def test_deterministic(self):
        assert sample_partition(10, 3, 7) == sample_partition(10, 3, 7)

    def test_too_many_sensitive(self):
        with pytest.raises(ValueError):
            sample_partition(3, 4, 0)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            FeaturePartition((0, 1), (1, 2))

    @given(st.integers(1, 40), st.data())
    @settings(max_examples=50, deadline=None)
    def test_completeness(self, d, data):
        k = data.draw(st.integers(0, d))
        seed = data.draw(st.integers(0, 2**31 - 1))
        part = sample_partition(d, k, seed)
        assert len(part.public_idx) + len(part.sensitive_idx) == d
        assert set(part.public_idx) | set(part.sensitive_idx) == set(range(d))
        assert not set(part.public_idx) & set(part.sensitive_idx)
