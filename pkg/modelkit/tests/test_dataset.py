"""Dataset loading, dedup rules, and split behaviour."""

import csv
import gzip
import json

import pytest
from helpers import results_row, write_results_csv

from modelkit.dataset import (
    FEATURES,
    DatasetRow,
    SchemaMismatchError,
    build_dataset,
    matrices,
    split,
    write_dataset_csv,
)


class TestBuildDataset:
    def test_rows_from_csv(self, tmp_path):
        path = tmp_path / "results.csv"
        write_results_csv(path, [results_row(i) for i in range(10)])
        rows = build_dataset(str(path))
        assert len(rows) == 10
        assert all(len(r.features) == 5 and len(r.targets) == 4 for r in rows)
        assert rows[0].capacity == 1_800_000

    def test_sweep_directory_prefers_results_csv(self, tmp_path):
        write_results_csv(tmp_path / "results.csv", [results_row(0)])
        assert len(build_dataset(str(tmp_path))) == 1

    def test_archive_files_parse(self, tmp_path):
        doc = [
            {"section": "config", "schema_version": 1,
             "buffer": {"ecn_threshold": 100_000, "red_min": 0, "red_max": 1_800_000,
                        "capacity": 1_800_000},
             "conditions": {"cubic_rtt": 50_000_000, "line_rate": 5 * 10**9}},
            {"section": "summary", "cubic_share": 0.4, "total_drops": 123,
             "avg_buffer": 400_000.0, "max_buffer": 1_700_000},
        ]
        blob = "\n".join(json.dumps(l) for l in doc) + "\n"
        (tmp_path / "exp-1.jsonl.gz").write_bytes(gzip.compress(blob.encode()))
        rows = build_dataset(str(tmp_path))
        assert len(rows) == 1
        assert rows[0].target_dict()["total_drops"] == 123

    def test_duplicate_features_same_targets_dedup(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv(path, [results_row(1), results_row(1)])
        assert len(build_dataset(str(path))) == 1

    def test_duplicate_features_differing_targets_error(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv(path, [results_row(1), results_row(1, cubic_share=0.9)])
        with pytest.raises(ValueError, match="nondeterminism"):
            build_dataset(str(path))

    def test_schema_mismatch_rejected_with_message(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv(path, [results_row(0, schema_version=2)])
        with pytest.raises(SchemaMismatchError, match="schema_version 2"):
            build_dataset(str(path))

    def test_no_drops_csv_round_trip_has_three_target_columns(self, tmp_path):
        src = tmp_path / "results.csv"
        write_results_csv(src, [results_row(i) for i in range(4)])
        rows = build_dataset(str(src))
        out = tmp_path / "dataset.csv"
        write_dataset_csv(rows, str(out), include_drops=False)
        with open(out) as fh:
            header = next(csv.reader(fh))
        assert "total_drops" not in header
        assert header[:5] == FEATURES
        back = build_dataset(str(out), include_drops=False)
        assert len(back) == 4
        with pytest.raises(ValueError):
            matrices(back, include_drops=True)
        with pytest.raises(ValueError):
            build_dataset(str(out), include_drops=True)


class TestSplit:
    def rows(self, n):
        return [DatasetRow((float(i), 0, 0, 0, 0), (0.5, 1, 2, 3)) for i in range(n)]

    def test_five_percent_of_10k_is_500(self):
        train, test = split(self.rows(10_000), 0.05, seed=0)
        assert len(train) == 500
        assert len(test) == 9_500

    def test_one_percent_of_8k_is_80(self):
        train, _ = split(self.rows(8_000), 0.01, seed=0)
        assert len(train) == 80

    def test_reproducible_under_seed(self):
        rows = self.rows(1000)
        a = split(rows, 0.1, seed=5)
        b = split(rows, 0.1, seed=5)
        assert [r.features for r in a[0]] == [r.features for r in b[0]]
        c = split(rows, 0.1, seed=6)
        assert [r.features for r in a[0]] != [r.features for r in c[0]]

    def test_disjoint_and_complete(self):
        rows = self.rows(100)
        train, test = split(rows, 0.2, seed=1)
        train_keys = {r.features for r in train}
        test_keys = {r.features for r in test}
        assert not train_keys & test_keys
        assert len(train_keys | test_keys) == 100

    def test_zero_train_rows_is_error(self):
        with pytest.raises(ValueError, match="zero training rows"):
            split(self.rows(10), 0.01, seed=0)
