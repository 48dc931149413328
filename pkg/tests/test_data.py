import numpy as np
import pytest

from adafm import (
    DataFormatError,
    SplitSpec,
    filter_min_interactions,
    load_dataset,
    load_split,
    split,
    write_interactions,
)
from datagen import planted_dataset


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadDataset:
    def test_basic_load(self, tmp_path):
        f = tmp_path / "d.tsv"
        write_lines(f, ["alice\tx\t1", "bob\ty\t1", "alice\ty\t0"])
        ds = load_dataset(f)
        assert ds.n_users == 2
        assert ds.n_items == 2
        assert ds.n_interactions == 3
        assert ds.user_tokens == ["alice", "bob"]
        assert ds.item_tokens == ["x", "y"]

    def test_duplicate_keeps_max_grade(self, tmp_path):
        f = tmp_path / "d.tsv"
        write_lines(f, ["u\ti\t0", "u\ti\t1", "u\tj\t2", "u\tj\t1"])
        ds = load_dataset(f)
        assert ds.n_interactions == 2
        assert ds.grade_of(0, 0) == 1
        assert ds.grade_of(0, 1) == 2

    def test_comments_and_blanks_ignored(self, tmp_path):
        f = tmp_path / "d.tsv"
        write_lines(f, ["# header", "", "u\ti\t1"])
        assert load_dataset(f).n_interactions == 1

    def test_empty_file_raises(self, tmp_path):
        f = tmp_path / "d.tsv"
        f.write_text("# nothing\n")
        with pytest.raises(DataFormatError):
            load_dataset(f)

    def test_malformed_line_reports_number(self, tmp_path):
        f = tmp_path / "d.tsv"
        write_lines(f, ["u\ti\t1", "broken line"])
        with pytest.raises(DataFormatError, match="line 2"):
            load_dataset(f)

    def test_bad_grade_reports_number(self, tmp_path):
        f = tmp_path / "d.tsv"
        write_lines(f, ["u\ti\tfive"])
        with pytest.raises(DataFormatError, match="line 1"):
            load_dataset(f)
        write_lines(f, ["u\ti\t-2"])
        with pytest.raises(DataFormatError, match="line 1"):
            load_dataset(f)

    def test_first_seen_id_order(self, tmp_path):
        f = tmp_path / "d.tsv"
        write_lines(f, ["zed\tz\t1", "ann\ta\t1"])
        ds = load_dataset(f)
        assert ds.user_tokens == ["zed", "ann"]


class TestLoadSplit:
    def test_shared_universe(self, tmp_path):
        train = tmp_path / "train.tsv"
        test = tmp_path / "test.tsv"
        write_lines(train, ["u1\ta\t1", "u2\tb\t1"])
        write_lines(test, ["u1\tb\t1", "u2\tc\t1"])
        tr, te = load_split(train, test)
        assert tr.user_tokens == te.user_tokens == ["u1", "u2"]
        assert tr.item_tokens == te.item_tokens == ["a", "b", "c"]
        assert tr.n_interactions == 2 and te.n_interactions == 2


class TestFilter:
    def test_threshold_zero_is_identity(self, tiny_ds):
        out = filter_min_interactions(tiny_ds, 0)
        assert out.n_users == tiny_ds.n_users
        assert out.n_items == tiny_ds.n_items
        assert out.n_interactions == tiny_ds.n_interactions

    def test_drops_light_users(self, tmp_path):
        f = tmp_path / "d.tsv"
        lines = [f"u1\ti{j}\t1" for j in range(25)] + [f"u2\ti{j}\t1" for j in range(5)]
        write_lines(f, lines)
        ds = filter_min_interactions(load_dataset(f), 20)
        assert ds.n_users == 1
        assert ds.user_tokens == ["u1"]

    def test_redensifies_items(self, tmp_path):
        f = tmp_path / "d.tsv"
        # u2's exclusive item disappears with u2
        write_lines(f, ["u1\ta\t1", "u1\tb\t1", "u2\tc\t1"])
        ds = filter_min_interactions(load_dataset(f), 2)
        assert ds.n_items == 2
        assert ds.item_tokens == ["a", "b"]
        assert sorted(ds.items_of(0).tolist()) == [0, 1]

    def test_every_survivor_meets_threshold(self):
        ds = planted_dataset(30, 40, rank=2, seed=3, per_user=8)
        out = filter_min_interactions(ds, 5)
        for a in range(out.n_users):
            assert out.items_of(a).size >= 5

    def test_all_filtered_raises(self, tiny_ds):
        with pytest.raises(DataFormatError):
            filter_min_interactions(tiny_ds, 100)


class TestSplit:
    def test_loo_holds_out_one(self):
        ds = planted_dataset(12, 20, rank=2, seed=4, per_user=5)
        train, test = split(ds, SplitSpec(method="loo", seed=1))
        for a in range(ds.n_users):
            assert test.items_of(a).size == 1
            assert train.items_of(a).size == 4

    def test_loo_single_interaction_stays_in_train(self):
        from adafm import InteractionDataset

        ds = InteractionDataset.from_triples([(0, 0, 1), (1, 0, 1), (1, 1, 1)], 2, 2)
        train, test = split(ds, SplitSpec(method="loo", seed=2))
        assert train.items_of(0).tolist() == [0]
        assert test.items_of(0).size == 0

    def test_holdout_fraction(self):
        ds = planted_dataset(10, 30, rank=2, seed=5, per_user=10)
        train, test = split(ds, SplitSpec(method="holdout", fraction=0.2, seed=3))
        for a in range(ds.n_users):
            assert test.items_of(a).size == 2
            assert train.items_of(a).size == 8

    def test_disjoint_and_covering(self):
        ds = planted_dataset(20, 25, rank=3, seed=6, per_user=7)
        train, test = split(ds, SplitSpec(method="holdout", fraction=0.3, seed=4))
        for a in range(ds.n_users):
            tr = set(train.items_of(a).tolist())
            te = set(test.items_of(a).tolist())
            assert not tr & te
            assert tr | te == set(ds.items_of(a).tolist())

    def test_same_seed_same_split(self):
        ds = planted_dataset(15, 20, rank=2, seed=7, per_user=6)
        a_train, a_test = split(ds, SplitSpec(seed=9))
        b_train, b_test = split(ds, SplitSpec(seed=9))
        for u in range(ds.n_users):
            assert np.array_equal(a_test.items_of(u), b_test.items_of(u))
        c_train, c_test = split(ds, SplitSpec(seed=10))
        assert any(
            not np.array_equal(a_test.items_of(u), c_test.items_of(u))
            for u in range(ds.n_users)
        )

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SplitSpec(method="temporal")
        with pytest.raises(ValueError):
            SplitSpec(fraction=0.0)
        with pytest.raises(ValueError):
            SplitSpec(fraction=1.0)


class TestWriteInteractions:
    def test_roundtrip(self, tmp_path, tiny_ds):
        f = tmp_path / "out.tsv"
        write_interactions(tiny_ds, f)
        ds = load_dataset(f)
        assert ds.n_users == tiny_ds.n_users
        assert ds.n_interactions == tiny_ds.n_interactions
        for a in range(ds.n_users):
            assert np.array_equal(
                np.sort(ds.items_of(a)), np.sort(tiny_ds.items_of(a))
            )

    def test_deterministic_bytes(self, tmp_path, tiny_ds):
        f1, f2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
        write_interactions(tiny_ds, f1)
        write_interactions(tiny_ds, f2)
        assert f1.read_bytes() == f2.read_bytes()
