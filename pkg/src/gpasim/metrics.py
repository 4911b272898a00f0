"""Derived performance metrics, CSV/summary serialization, and trace tools.

A simulation run is reduced to one MetricRow: the identity columns that name
the configuration plus the derived indicators (elapsed time, MTEPS, MREPS,
bytes per edge, per-iteration read volumes, row-buffer behavior). Rows are
serialized to CSV with a stable column order so repeated runs diff cleanly,
and grouped summaries compare runs along one axis at a time (graph, DRAM
standard, channel count, optimization set, MREPS by average degree).

Request traces dumped by the engine can be re-aggregated here; the byte and
row-class counters recomputed from a trace must reproduce the original
MetricRow exactly, and replaying a trace through a fresh DRAM model must
reproduce the original DRAM counters.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, fields, replace

from .accel.common import ACCEL_FLAGS
from .dram import CONFLICT, HIT, MISS, DramConfig, DramModel, load_dram_config

MTEPS_SCALE = 1e6


@dataclass(frozen=True)
class MetricRow:
    """One simulation run reduced to its comparable indicators."""

    accelerator: str
    problem: str
    graph: str
    dram: str
    channels: int
    optimizations: str
    elapsed_ns: float
    iterations: int
    mteps: float
    mreps: float
    bytes_per_edge: float
    edges_read_per_iteration: float
    values_read_per_iteration: float
    row_hits: int
    row_misses: int
    row_conflicts: int
    utilization: float


COLUMNS = tuple(f.name for f in fields(MetricRow))
IDENTITY = COLUMNS[:6]

_INT_COLUMNS = {"channels", "iterations", "row_hits", "row_misses",
                "row_conflicts"}


def flags_label(flags) -> str:
    return "+".join(sorted(flags)) if flags else "none"


def row_key(row: MetricRow) -> tuple:
    """Configuration identity; two runs with equal keys must agree."""
    return tuple(getattr(row, c) for c in IDENTITY)


def _opts_group(row: MetricRow) -> str:
    """Cross-accelerator grouping label: rows running their design's full
    flag set group as 'all' so different designs line up in one table."""
    if row.optimizations == flags_label(ACCEL_FLAGS.get(row.accelerator, ())):
        return "all"
    return row.optimizations


def compute_metrics(run, g, cfg=None) -> MetricRow:
    """Derive the full metric row for one finished run.

    `cfg` optionally names the configuration (an AccelConfig or resolved
    form); without it the identity columns come from the run record itself.
    """
    if run.elapsed_ns <= 0:
        raise ValueError("degenerate run: elapsed time is zero")
    if cfg is not None and hasattr(cfg, "resolved"):
        cfg = cfg.resolved()
    seconds = run.elapsed_ns * 1e-9
    edges = g.original_edge_count
    stats = run.dram_stats
    values = run.values_read_per_iteration
    return MetricRow(
        accelerator=cfg.which if cfg else run.accelerator,
        problem=cfg.problem if cfg else run.problem,
        graph=run.graph,
        dram=cfg.dram.name if cfg else run.dram_name,
        channels=cfg.channels if cfg else run.channels,
        optimizations=flags_label(cfg.flags if cfg else run.flags),
        elapsed_ns=run.elapsed_ns,
        iterations=run.iterations,
        mteps=edges / seconds / MTEPS_SCALE,
        mreps=run.edges_read_total / seconds / MTEPS_SCALE,
        bytes_per_edge=run.total_request_bytes / edges,
        edges_read_per_iteration=run.edges_read_total / run.iterations,
        values_read_per_iteration=sum(values) / len(values) if values else 0.0,
        row_hits=stats["row_hits"],
        row_misses=stats["row_misses"],
        row_conflicts=stats["row_conflicts"],
        utilization=stats["utilization"])


def speedup(baseline: MetricRow, row: MetricRow) -> float:
    """Factor by which `row` beats `baseline`: >1 means row is faster."""
    return baseline.elapsed_ns / row.elapsed_ns


# ---------------------------------------------------------------- CSV

def _fmt(value) -> str:
    # repr() keeps the shortest round-trip form, '.' decimal separator
    return repr(value) if isinstance(value, float) else str(value)


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow([_fmt(getattr(row, c)) for c in COLUMNS])


def append_csv(rows, path, header: bool) -> None:
    """Append rows, emitting the header only for a fresh file."""
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(COLUMNS)
        for row in rows:
            w.writerow([_fmt(getattr(row, c)) for c in COLUMNS])


def read_csv(path) -> list[MetricRow]:
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != list(COLUMNS):
            raise ValueError(f"{path}: unexpected CSV header")
        for line in r:
            if len(line) != len(COLUMNS):
                raise ValueError(f"{path}: short row {line!r}")
            kw = {}
            for name, text in zip(COLUMNS, line):
                if name in _INT_COLUMNS:
                    kw[name] = int(text)
                elif name in IDENTITY:
                    kw[name] = text
                else:
                    kw[name] = float(text)
            out.append(MetricRow(**kw))
    return out


# ---------------------------------------------------------------- summary

def _aligned(table: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
            for r in table]


def _num(x: float) -> str:
    return f"{x:.6g}"


def _groups(rows, key):
    out: dict[tuple, list[MetricRow]] = {}
    for row in rows:
        out.setdefault(key(row), []).append(row)
    return sorted(out.items())


def _speedup_section(rows, title, group_key, axis, is_baseline) -> list[str]:
    lines = [f"== {title} =="]
    table = [["accelerator", "problem", "graph", "dram", "channels",
              "optimizations", "speedup"]]
    for _, group in _groups(rows, group_key):
        base = next((r for r in group if is_baseline(r)), None)
        if base is None:
            continue
        for row in sorted(group, key=lambda r: _fmt(getattr(r, axis))):
            if row is base:
                continue
            table.append([row.accelerator, row.problem, row.graph, row.dram,
                          str(row.channels), row.optimizations,
                          _num(speedup(base, row))])
    if len(table) == 1:
        return lines + ["(no rows)", ""]
    return lines + _aligned(table) + [""]


def write_summary(rows, path, degrees: dict | None = None):
    """Aligned plain-text comparison tables, one section per axis.

    `degrees` optionally maps graph name to average degree for the
    MREPS-by-degree section; graphs without an entry sort last.
    """
    # canonical order first: output must not depend on input permutation
    rows = sorted(rows, key=row_key)
    lines: list[str] = []

    # runtime per graph, one table per fixed (problem, dram, channels, opts)
    for key, group in _groups(rows, lambda r: (r.problem, r.dram,
                                               r.channels, _opts_group(r))):
        problem, dram, channels, opts = key
        lines.append(f"== runtime by graph [problem={problem} dram={dram} "
                     f"channels={channels} opts={opts}] ==")
        accels = sorted({r.accelerator for r in group})
        table = [["graph"] + [f"{a} (s)" for a in accels]]
        for graph in sorted({r.graph for r in group}):
            cells = [graph]
            for a in accels:
                hit = next((r for r in group
                            if r.graph == graph and r.accelerator == a), None)
                cells.append(_num(hit.elapsed_ns * 1e-9) if hit else "-")
            table.append(cells)
        lines += _aligned(table) + [""]

    lines += _speedup_section(
        rows, "speedup over ddr4_2400",
        lambda r: (r.accelerator, r.problem, r.graph, r.channels,
                   r.optimizations),
        "dram", lambda r: r.dram == "ddr4_2400")
    lines += _speedup_section(
        rows, "speedup over 1 channel",
        lambda r: (r.accelerator, r.problem, r.graph, r.dram,
                   r.optimizations),
        "channels", lambda r: r.channels == 1)
    lines += _speedup_section(
        rows, "speedup over unoptimized",
        lambda r: (r.accelerator, r.problem, r.graph, r.dram, r.channels),
        "optimizations", lambda r: r.optimizations == "none")

    lines.append("== mreps by average degree ==")
    table = [["graph", "avg_degree", "accelerator", "problem", "mreps"]]
    deg = degrees or {}

    def deg_key(row):
        d = deg.get(row.graph)
        return (d is None, d if d is not None else 0.0,
                row.graph, row.accelerator, row.problem)

    for row in sorted(rows, key=deg_key):
        d = deg.get(row.graph)
        table.append([row.graph, _num(d) if d is not None else "-",
                      row.accelerator, row.problem, _num(row.mreps)])
    if len(table) == 1:
        lines += ["(no rows)", ""]
    else:
        lines += _aligned(table) + [""]

    with open(path, "w") as fh:
        fh.write("\n".join(lines))
    return path


# ---------------------------------------------------------------- traces

TRACE_COLUMNS = ("channel", "kind", "addr", "nbytes", "region", "class",
                 "arrival", "data", "completion")


def dump_trace(entries, path) -> None:
    """Write engine trace tuples as CSV (cycles are DRAM-clock integers)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        w.writerows(entries)


def load_trace(path) -> list[tuple]:
    out = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != list(TRACE_COLUMNS):
            raise ValueError(f"{path}: not a request trace")
        for line in r:
            if len(line) != len(TRACE_COLUMNS):
                raise ValueError(f"{path}: short row {line!r}")
            out.append((int(line[0]), line[1], int(line[2]), int(line[3]),
                        line[4], int(line[5]), int(line[6]), int(line[7]),
                        int(line[8])))
    return out


def trace_counters(entries) -> dict:
    """Re-aggregate request bytes and row classes from a trace."""
    region_bytes: dict[str, int] = {}
    classes = [0, 0, 0]
    reads = writes = total = elapsed = 0
    for entry in entries:
        _, kind, _, nbytes, region, cls, _, _, comp = entry
        if kind == "w":
            writes += 1
        else:
            reads += 1
        total += nbytes
        region_bytes[region] = region_bytes.get(region, 0) + nbytes
        classes[cls] += 1
        if comp > elapsed:
            elapsed = comp
    return {"requests": reads + writes, "reads": reads, "writes": writes,
            "row_hits": classes[HIT], "row_misses": classes[MISS],
            "row_conflicts": classes[CONFLICT], "total_bytes": total,
            "region_bytes": region_bytes, "elapsed_cycles": elapsed}


def metrics_from_trace(entries, row: MetricRow, edge_count: int) -> MetricRow:
    """Rebuild the trace-derivable columns of `row` from a request trace.

    The result must equal `row` exactly; a mismatch means the tallied byte
    or row-class counters diverged from what actually reached the DRAM.
    """
    c = trace_counters(entries)
    return replace(row,
                   bytes_per_edge=c["total_bytes"] / edge_count,
                   row_hits=c["row_hits"], row_misses=c["row_misses"],
                   row_conflicts=c["row_conflicts"])


def replay_trace(entries, dram, channels: int | None = None) -> dict:
    """Feed a dumped trace through a fresh DRAM model and return its stats.

    Requests are re-enqueued per channel in arrival order, which matches
    the original issue order whenever the DRAM clock is at least as fast
    as the accelerator clock (true for all shipped configurations).
    """
    cfg = dram if isinstance(dram, DramConfig) else load_dram_config(dram)
    nchan = channels
    if nchan is None:
        nchan = max((e[0] for e in entries), default=0) + 1
    model = DramModel(cfg, nchan)
    for entry in sorted(entries, key=lambda e: (e[0], e[6])):
        chan, kind, addr, _, _, _, arrival = entry[:7]
        if chan >= nchan:
            raise ValueError(f"trace channel {chan} outside model "
                             f"({nchan} channels)")
        model[chan].enqueue(addr, kind == "w", arrival)
    model.drain()
    return model.stats()
