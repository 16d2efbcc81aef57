"""CLI surface: grid / run / report end to end on a miniature sweep."""

import csv
import json

import pytest

from buffershare.cli import main

GRID_YAML = """
cubic_rtts: [5ms]
dctcp_rtts: [200us]
line_rates: [50Mbps]
capacities: [100KB]
ecn_thresholds: [10KB, 30KB]
red_thresholds: [100KB]
n_dctcp_senders: 2
n_cubic_senders: 2
flows_per_sender: 1
sim_durations: [100ms]
snapshot_means: [5ms]
start_windows: [20ms]
master_seed: 3
"""


@pytest.fixture(scope="module")
def grid_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "grid.yaml"
    path.write_text(GRID_YAML)
    return str(path)


def test_grid_expands_and_writes_jsonl(grid_file, tmp_path, capsys):
    out = tmp_path / "configs.jsonl"
    assert main(["grid", "--grid-file", grid_file, "--out", str(out)]) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(lines) == 2
    assert {l["buffer"]["ecn_threshold"] for l in lines} == {10_000, 30_000}


def test_grid_prints_count(grid_file, capsys):
    assert main(["grid", "--grid-file", grid_file]) == 0
    assert "2 configs" in capsys.readouterr().out


def test_run_then_report_with_figure(grid_file, tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    assert main(["run", "--grid-file", grid_file, "--out", str(out_dir),
                 "--workers", "2"]) == 0
    assert (out_dir / "results.csv").exists()

    table = tmp_path / "table.csv"
    assert main(["report", "--archives", str(out_dir),
                 "--x", "ecn_threshold", "--y", "red_max",
                 "--z", "cubic_share", "--out", str(table)]) == 0
    with open(table) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert (tmp_path / "table.png").exists()  # figure rendered alongside CSV


def test_report_no_fig_skips_figure(grid_file, tmp_path):
    out_dir = tmp_path / "sweep"
    main(["run", "--grid-file", grid_file, "--out", str(out_dir)])
    table = tmp_path / "t.csv"
    assert main(["report", "--archives", str(out_dir),
                 "--x", "ecn_threshold", "--y", "red_max", "--z", "total_drops",
                 "--no-fig", "--out", str(table)]) == 0
    assert not (tmp_path / "t.png").exists()


def test_run_duration_override(grid_file, tmp_path):
    out_dir = tmp_path / "short"
    assert main(["run", "--grid-file", grid_file, "--duration", "50ms",
                 "--out", str(out_dir)]) == 0
    with open(out_dir / "results.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(int(r["sim_duration"]) == 50_000_000 for r in rows)


def test_preset_grid_counts(capsys):
    assert main(["grid", "--preset", "desk", "--head", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("16 configs")  # 4 ECN x 4 drop-tail
