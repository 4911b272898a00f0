"""Shared configuration, result type, and tallies for the accelerator models."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dram import DramConfig, DramModel, load_dram_config
from ..flow import Engine, SimClock
from ..graphs import Graph, attach_random_weights, default_root
from ..problems import ProblemSpec, make_problem

ACCELERATORS = ("accugraph", "foregraph", "hitgraph", "thundergp")

ACCEL_PROBLEMS = {
    "accugraph": ("bfs", "pr", "wcc"),
    "foregraph": ("bfs", "pr", "wcc"),
    "hitgraph": ("bfs", "pr", "wcc", "sssp", "spmv"),
    "thundergp": ("bfs", "pr", "wcc", "sssp", "spmv"),
}

ACCEL_FLAGS = {
    "accugraph": frozenset({"prefetch_skip", "partition_skip"}),
    "foregraph": frozenset({"shard_skip", "edge_shuffle", "stride_map"}),
    "hitgraph": frozenset({"partition_skip", "dst_sort", "update_combine",
                           "update_filter"}),
    "thundergp": frozenset({"chunk_schedule"}),
}

# reported by the respective publications; external inputs, configurable
DEFAULT_CLOCK_MHZ = {
    "accugraph": 200,
    "foregraph": 200,
    "hitgraph": 200,
    "thundergp": 250,
}

SINGLE_CHANNEL = ("accugraph", "foregraph")

FOREGRAPH_INTERVAL = 65536
ACCUGRAPH_INTERVAL = 1_024_000


@dataclass
class AccelConfig:
    which: str
    problem: str
    channels: int = 1
    dram: str | DramConfig = "ddr4_2400"
    optimizations: str | frozenset = frozenset()
    clock_mhz: int | None = None
    bram_budget_bytes: int = 1 << 20      # 32-bit values per partition
    interval_size: int | None = None
    pe: int | None = None                 # ForeGraph pipelines (default 2)
    pipeline_width: int = 8               # AccuGraph edges per cycle
    src_buffer_entries: int = 65536       # ThunderGP dedup buffer
    damping: float = 0.85
    root: int | None = None
    trace: bool = False

    def resolved(self) -> "ResolvedConfig":
        which = self.which.lower()
        if which not in ACCELERATORS:
            raise ValueError(f"unknown accelerator {self.which!r}")
        problem = self.problem.lower()
        if problem not in ACCEL_PROBLEMS[which]:
            raise ValueError(f"{which} does not support {problem}")
        if self.channels < 1:
            raise ValueError("channels must be positive")
        if which in SINGLE_CHANNEL and self.channels != 1:
            raise ValueError(f"{which} runs single-channel only")
        opts = self.optimizations
        if isinstance(opts, str):
            opts = [f for f in opts.replace(",", " ").split() if f]
            if opts == ["all"]:
                opts = "all"
            elif opts == ["none"]:
                opts = "none"
        if opts == "all":
            flags = set(ACCEL_FLAGS[which])
        elif opts == "none" or not opts:
            flags = set()
        else:
            flags = {f.lower() for f in opts}
            bad = flags - ACCEL_FLAGS[which]
            if bad:
                raise ValueError(
                    f"flags not valid for {which}: {', '.join(sorted(bad))} "
                    f"(valid: {', '.join(sorted(ACCEL_FLAGS[which]))})")
        dram = (self.dram if isinstance(self.dram, DramConfig)
                else load_dram_config(self.dram))
        clock = self.clock_mhz or DEFAULT_CLOCK_MHZ[which]
        if clock <= 0:
            raise ValueError("clock_mhz must be positive")
        if self.interval_size is not None:
            interval = self.interval_size
        elif which == "accugraph":
            interval = ACCUGRAPH_INTERVAL
        elif which == "foregraph":
            interval = FOREGRAPH_INTERVAL
        else:
            interval = self.bram_budget_bytes // 4
        if interval < 1:
            raise ValueError("interval_size must be positive")
        if which == "foregraph" and interval > FOREGRAPH_INTERVAL:
            raise ValueError("foregraph intervals are capped at 65536")
        if self.pe is None:
            pe = 2 if which == "foregraph" else 1
        else:
            pe = self.pe
        if pe < 1:
            raise ValueError("pe must be positive")
        return ResolvedConfig(
            which=which, problem=problem, channels=self.channels, dram=dram,
            flags=frozenset(flags), clock_mhz=clock, interval=interval,
            pe=pe, pipeline_width=self.pipeline_width,
            src_buffer_entries=self.src_buffer_entries, damping=self.damping,
            root=self.root, trace=self.trace)


@dataclass(frozen=True)
class ResolvedConfig:
    which: str
    problem: str
    channels: int
    dram: DramConfig
    flags: frozenset
    clock_mhz: int
    interval: int
    pe: int
    pipeline_width: int
    src_buffer_entries: int
    damping: float
    root: int | None
    trace: bool

    def has(self, flag: str) -> bool:
        return flag in self.flags


@dataclass
class RunResult:
    accelerator: str
    problem: str
    graph: str
    channels: int
    dram_name: str
    flags: tuple
    elapsed_ns: float
    elapsed_dram_cycles: int
    iterations: int
    mteps: float
    mreps: float
    bytes_per_edge: float
    edges_read_total: int
    values_read_per_iteration: list
    updates_written: int
    total_request_bytes: int
    region_bytes: dict
    footprint_bytes: list
    dram_stats: dict
    final_values: np.ndarray
    root: int
    trace: list | None = None


class Tally:
    """Per-iteration logical record counters, bucketed by region."""

    REGIONS = ("values", "pointers", "edges", "updates", "writes")

    def __init__(self):
        self.iterations: list[dict] = []

    def start_iteration(self):
        self.iterations.append({r: 0 for r in self.REGIONS})
        self.iterations[-1]["bytes"] = 0

    def add(self, region: str, records: int, nbytes: int):
        it = self.iterations[-1]
        it[region] += records
        it["bytes"] += nbytes

    def total(self, key: str) -> int:
        return sum(it[key] for it in self.iterations)

    def region_bytes_by(self, weights: dict) -> dict:
        """Total logical bytes per region given record widths."""
        return {r: sum(it[r] for it in self.iterations) * w
                for r, w in weights.items()}


def prepare(g: Graph, rc: ResolvedConfig) -> tuple[Graph, ProblemSpec, int]:
    """Attach weights when the problem needs them and pick the root."""
    if g.m == 0:
        raise ValueError(f"graph {g.name!r} has no edges to process")
    spec = make_problem(rc.problem, damping=rc.damping)
    if spec.weighted and not g.weighted:
        g = attach_random_weights(g)
    root = rc.root if rc.root is not None else default_root(g)
    if spec.needs_root and not (0 <= root < g.n):
        raise ValueError(f"root {root} out of range for n={g.n}")
    return g, spec, root


def make_engine(rc: ResolvedConfig, roots) -> tuple[Engine, DramModel, SimClock]:
    model = DramModel(rc.dram, rc.channels)
    clock = SimClock(rc.clock_mhz * 1000, rc.dram.dram_khz)
    engine = Engine(clock, model, roots, trace=rc.trace)
    return engine, model, clock


def finish(rc: ResolvedConfig, g: Graph, engine, model, tally: Tally,
           iterations: int, final_values, root: int,
           edges_read: int, updates_written: int,
           region_bytes: dict, footprint: list) -> RunResult:
    elapsed_cycles = engine.elapsed_dram
    elapsed_ns = elapsed_cycles * rc.dram.tck_ns
    if elapsed_ns <= 0:
        raise RuntimeError("degenerate run: no memory traffic")
    seconds = elapsed_ns * 1e-9
    total_bytes = sum(region_bytes.values())
    return RunResult(
        accelerator=rc.which, problem=rc.problem, graph=g.name,
        channels=rc.channels, dram_name=rc.dram.name,
        flags=tuple(sorted(rc.flags)),
        elapsed_ns=elapsed_ns, elapsed_dram_cycles=elapsed_cycles,
        iterations=iterations,
        mteps=g.original_edge_count / seconds / 1e6,
        mreps=edges_read / seconds / 1e6,
        bytes_per_edge=total_bytes / g.original_edge_count,
        edges_read_total=edges_read,
        values_read_per_iteration=[it["values"] for it in tally.iterations],
        updates_written=updates_written,
        total_request_bytes=total_bytes,
        region_bytes=region_bytes,
        footprint_bytes=footprint,
        dram_stats=model.stats(),
        final_values=final_values,
        root=root,
        trace=engine.trace)
