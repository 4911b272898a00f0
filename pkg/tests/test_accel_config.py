"""Configuration surface of the accelerator models."""
import pytest

from gpasim.accel import (ACCEL_FLAGS, ACCEL_PROBLEMS, ACCELERATORS,
                          AccelConfig, DEFAULT_CLOCK_MHZ)


def test_every_accelerator_resolves_with_defaults():
    for which in ACCELERATORS:
        rc = AccelConfig(which=which, problem="bfs").resolved()
        assert rc.which == which
        assert rc.clock_mhz == DEFAULT_CLOCK_MHZ[which]
        assert rc.flags == frozenset()


def test_unknown_accelerator_rejected():
    with pytest.raises(ValueError, match="unknown accelerator"):
        AccelConfig(which="nosuch", problem="bfs").resolved()


def test_unsupported_problem_rejected():
    with pytest.raises(ValueError, match="does not support"):
        AccelConfig(which="accugraph", problem="sssp").resolved()
    with pytest.raises(ValueError, match="does not support"):
        AccelConfig(which="foregraph", problem="spmv").resolved()


def test_single_channel_designs_reject_multichannel():
    for which in ("accugraph", "foregraph"):
        with pytest.raises(ValueError, match="single-channel"):
            AccelConfig(which=which, problem="bfs", channels=2).resolved()
    for which in ("hitgraph", "thundergp"):
        rc = AccelConfig(which=which, problem="bfs", channels=4).resolved()
        assert rc.channels == 4


def test_flag_ownership_enforced():
    with pytest.raises(ValueError) as e:
        AccelConfig(which="foregraph", problem="bfs",
                    optimizations={"partition_skip"}).resolved()
    assert "partition_skip" in str(e.value)
    assert "shard_skip" in str(e.value)  # message lists the valid set


def test_all_and_none_flag_shorthands():
    for which in ACCELERATORS:
        rc = AccelConfig(which=which, problem="bfs",
                         optimizations="all").resolved()
        assert rc.flags == ACCEL_FLAGS[which]
        rc = AccelConfig(which=which, problem="bfs",
                         optimizations="none").resolved()
        assert rc.flags == frozenset()


def test_comma_separated_flag_string():
    rc = AccelConfig(which="hitgraph", problem="bfs",
                     optimizations="partition_skip,dst_sort").resolved()
    assert rc.flags == {"partition_skip", "dst_sort"}
    assert rc.has("dst_sort") and not rc.has("update_filter")


def test_foregraph_interval_capped():
    with pytest.raises(ValueError, match="capped"):
        AccelConfig(which="foregraph", problem="bfs",
                    interval_size=1 << 17).resolved()
    rc = AccelConfig(which="foregraph", problem="bfs").resolved()
    assert rc.interval == 65536


def test_default_intervals():
    assert AccelConfig(which="accugraph",
                       problem="bfs").resolved().interval == 1_024_000
    rc = AccelConfig(which="hitgraph", problem="bfs",
                     bram_budget_bytes=1 << 12).resolved()
    assert rc.interval == 1024


def test_default_pipeline_count_per_accelerator():
    assert AccelConfig(which="foregraph", problem="bfs").resolved().pe == 2
    assert AccelConfig(which="accugraph", problem="bfs").resolved().pe == 1
    rc = AccelConfig(which="foregraph", problem="bfs", pe=4).resolved()
    assert rc.pe == 4


def test_problem_table_is_exact():
    assert ACCEL_PROBLEMS["accugraph"] == ("bfs", "pr", "wcc")
    assert ACCEL_PROBLEMS["foregraph"] == ("bfs", "pr", "wcc")
    assert set(ACCEL_PROBLEMS["hitgraph"]) == {"bfs", "pr", "wcc", "sssp",
                                               "spmv"}
    assert set(ACCEL_PROBLEMS["thundergp"]) == {"bfs", "pr", "wcc", "sssp",
                                                "spmv"}


def test_invalid_numbers_rejected():
    with pytest.raises(ValueError):
        AccelConfig(which="hitgraph", problem="bfs", channels=0).resolved()
    with pytest.raises(ValueError):
        AccelConfig(which="hitgraph", problem="bfs",
                    interval_size=0).resolved()
    with pytest.raises(ValueError):
        AccelConfig(which="foregraph", problem="bfs", pe=0).resolved()
