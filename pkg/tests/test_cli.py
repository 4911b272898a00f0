"""End-to-end command-line behavior: flags, exit codes, sweeps, determinism."""
import os
from pathlib import Path

import numpy as np
import pytest

from gpasim import cli
from gpasim.accel import ACCELERATORS, AccelConfig, run
from gpasim.metrics import read_csv

DATA = Path(__file__).resolve().parent.parent / "data"
PATH4 = str(DATA / "path4.el")


def test_bundled_path_graph_loads():
    g = cli.load_graph(PATH4)
    assert (g.n, g.m) == (4, 3)
    assert g.name == "path4.el"


@pytest.mark.parametrize("which", ACCELERATORS)
def test_simulate_bundled_path_values_match_oracle(which):
    g = cli.load_graph(PATH4)
    res = run(g, AccelConfig(which=which, problem="bfs", interval_size=2,
                             root=0))
    assert np.array_equal(res.final_values, [0, 1, 2, 3])


@pytest.mark.parametrize("which", ACCELERATORS)
def test_simulate_exit_zero_and_prints_row(which, capsys, tmp_path):
    out = tmp_path / "row.csv"
    code = cli.main(["simulate", "--accel", which, "--problem", "bfs",
                     "--graph", PATH4, "--root", "0", "--interval", "2",
                     "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "elapsed_ns" in text and "mteps" in text
    rows = read_csv(out)
    assert len(rows) == 1
    assert rows[0].accelerator == which
    assert rows[0].graph == "path4.el"


def test_unsupported_problem_is_usage_error(capsys):
    code = cli.main(["simulate", "--accel", "accugraph", "--problem", "sssp",
                     "--graph", PATH4])
    assert code == 2
    assert "does not support" in capsys.readouterr().err


def test_foreign_flag_is_usage_error(capsys):
    code = cli.main(["simulate", "--accel", "thundergp", "--problem", "bfs",
                     "--graph", PATH4, "--opt", "shard_skip"])
    assert code == 2
    assert "shard_skip" in capsys.readouterr().err


def test_missing_graph_file_is_run_error(capsys):
    code = cli.main(["simulate", "--accel", "hitgraph", "--problem", "bfs",
                     "--graph", "/nonexistent/graph.el"])
    assert code == 1


def test_bad_rmat_spec_is_usage_error(capsys):
    code = cli.main(["simulate", "--accel", "hitgraph", "--problem", "bfs",
                     "--graph", "rmat:10:8"])
    assert code == 2


def test_unknown_subcommand_is_usage_error(capsys):
    assert cli.main(["frobnicate"]) == 2


def test_dram_aliases():
    assert cli.resolve_dram("ddr3") == "ddr3_2133"
    assert cli.resolve_dram("ddr4") == "ddr4_2400"
    assert cli.resolve_dram("hbm") == "hbm_1000"
    assert cli.resolve_dram("ddr3_1600") == "ddr3_1600"


def test_opt_all_vs_none_differ_only_in_counters(tmp_path, capsys):
    rows = []
    for opt in ("all", "none"):
        out = tmp_path / f"{opt}.csv"
        assert cli.main(["simulate", "--accel", "accugraph", "--problem",
                         "bfs", "--graph", PATH4, "--root", "0",
                         "--interval", "2", "--opt", opt,
                         "--out", str(out)]) == 0
        rows += read_csv(out)
    full, none = rows
    assert (full.accelerator, full.problem, full.graph, full.dram,
            full.channels) == (none.accelerator, none.problem, none.graph,
                               none.dram, none.channels)
    assert full.optimizations != none.optimizations
    assert full.iterations == none.iterations
    assert full.elapsed_ns <= none.elapsed_ns


def test_simulate_deterministic_bytes(tmp_path, capsys):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert cli.main(["simulate", "--accel", "foregraph", "--problem",
                         "wcc", "--graph", "rmat:7:4:9", "--interval", "32",
                         "--opt", "all", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_trace_dump_and_replay_roundtrip(tmp_path, capsys):
    trace = tmp_path / "req.trace"
    assert cli.main(["simulate", "--accel", "hitgraph", "--problem", "bfs",
                     "--graph", "rmat:6:4:1", "--channels", "2",
                     "--interval", "16", "--trace-out", str(trace)]) == 0
    capsys.readouterr()
    assert cli.main(["replay", str(trace), "--dram", "ddr4"]) == 0
    text = capsys.readouterr().out
    assert "requests" in text and "row_hits" in text
    assert "channel 1:" in text


# ---------------------------------------------------------------- sweep

SWEEP = """
accelerators = accugraph, hitgraph
problems = bfs sssp
graphs = rmat:6:4:3
dram = ddr4
channels = 1 2
optimizations = all none update_filter+update_combine
interval = 16
out = results.csv
summary = summary.txt
"""


def _write_cfg(tmp_path, text=SWEEP):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(text)
    return cfg


def test_sweep_product_with_skips(tmp_path, capsys):
    cfg = _write_cfg(tmp_path)
    assert cli.main(["sweep", str(cfg)]) == 0
    err = capsys.readouterr().err
    assert "skip: accugraph does not support sssp" in err
    assert "single-channel" in err
    rows = read_csv(tmp_path / "results.csv")
    # accugraph: bfs only, 1 channel, no foreign flag set -> 2 rows
    # hitgraph: 2 problems x 2 channels x 3 optsets -> 12 rows
    assert len(rows) == 14
    assert (tmp_path / "summary.txt").exists()
    keys = {(r.accelerator, r.problem, r.channels, r.optimizations)
            for r in rows}
    assert ("accugraph", "bfs", 1,
            "partition_skip+prefetch_skip") in keys
    assert ("hitgraph", "sssp", 2, "update_combine+update_filter") in keys


def test_sweep_rerun_is_byte_identical(tmp_path, capsys):
    cfg = _write_cfg(tmp_path)
    assert cli.main(["sweep", str(cfg)]) == 0
    first = (tmp_path / "results.csv").read_bytes()
    (tmp_path / "results.csv").unlink()
    assert cli.main(["sweep", str(cfg)]) == 0
    assert (tmp_path / "results.csv").read_bytes() == first


def test_sweep_resume_skips_done_rows(tmp_path, capsys):
    cfg = _write_cfg(tmp_path)
    assert cli.main(["sweep", str(cfg)]) == 0
    out = tmp_path / "results.csv"
    full = out.read_bytes()
    lines = full.decode().splitlines(keepends=True)
    out.write_text("".join(lines[:6]))
    assert cli.main(["sweep", str(cfg)]) == 0
    err = capsys.readouterr().err
    assert "5 already done" in err
    assert out.read_bytes() == full


def test_sweep_worker_pool_matches_serial(tmp_path, capsys, monkeypatch):
    cfg = _write_cfg(tmp_path)
    assert cli.main(["sweep", str(cfg)]) == 0
    serial = (tmp_path / "results.csv").read_bytes()
    (tmp_path / "results.csv").unlink()
    monkeypatch.setenv("GPASIM_WORKERS", "3")
    assert cli.main(["sweep", str(cfg)]) == 0
    assert (tmp_path / "results.csv").read_bytes() == serial


def test_sweep_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("accelerators = hitgraph\nwhatever = 3\n")
    assert cli.main(["sweep", str(cfg)]) == 2
    assert "unknown key" in capsys.readouterr().err
    cfg.write_text("accelerators = hitgraph\n")
    assert cli.main(["sweep", str(cfg)]) == 2


def test_sweep_relative_paths_anchor_at_config(tmp_path, capsys, monkeypatch):
    nest = tmp_path / "nest"
    nest.mkdir()
    cfg = nest / "sweep.cfg"
    cfg.write_text("accelerators = thundergp\nproblems = bfs\n"
                   "graphs = rmat:6:4:1\ndram = hbm\nchannels = 1\n"
                   "optimizations = none\ninterval = 16\nout = r.csv\n")
    monkeypatch.chdir(tmp_path)
    assert cli.main(["sweep", str(cfg)]) == 0
    assert (nest / "r.csv").exists()
    assert not (tmp_path / "r.csv").exists()
    rows = read_csv(nest / "r.csv")
    assert rows[0].dram == "hbm_1000"
