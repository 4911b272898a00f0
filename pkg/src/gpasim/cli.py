"""Experiment runner: single simulations, sweeps, and DRAM trace replay.

Exit codes: 0 on success, 1 when a run fails (simulation or I/O error),
2 on usage errors (bad flags, unsupported combinations, malformed config).

The sweep config is a plain text file of `key = values` lines, values
separated by spaces or commas, '#' starting a comment. List-valued keys
(accelerators, problems, graphs, dram, channels, optimizations) span the
swept dimensions; the Cartesian product is run in declaration order, so a
given config always produces the same CSV byte for byte. Optimization sets
within a list are written as plus-joined flags (shard_skip+stride_map), or
`all` / `none`. Combinations an accelerator does not support (problems,
multi-channel on single-channel designs, foreign flags) are skipped with a
note on stderr. Sweeps resume: rows already present in the output CSV are
not recomputed. GPASIM_WORKERS sets the worker pool size (default 1);
results are written in product order regardless of worker count.
"""
from __future__ import annotations

import argparse
import functools
import multiprocessing
import os
import sys

from .accel import (ACCEL_FLAGS, ACCEL_PROBLEMS, ACCELERATORS, AccelConfig)
from .accel import run as run_accel
from .accel.common import SINGLE_CHANNEL
from .dram import BUILTIN_CONFIGS, load_dram_config
from .graphs import degree_stats, generate_rmat, load_binary, load_edge_list
from .metrics import (COLUMNS, MetricRow, append_csv, compute_metrics,
                      dump_trace, flags_label, load_trace, read_csv,
                      replay_trace, row_key, write_summary)

DRAM_ALIASES = {"ddr3": "ddr3_2133", "ddr4": "ddr4_2400", "hbm": "hbm_1000"}

LIST_KEYS = ("accelerators", "problems", "graphs", "dram", "channels",
             "optimizations")
SCALAR_KEYS = ("out", "summary", "interval", "pe", "damping", "root")


def resolve_dram(spec: str) -> str:
    return DRAM_ALIASES.get(spec, spec)


def graph_spec_name(spec: str) -> str:
    """Graph name a spec will load as, without loading it."""
    if spec.startswith("rmat:"):
        scale, deg, seed = _parse_rmat(spec)
        return f"rmat{scale}x{deg}s{seed}"
    return os.path.basename(spec)


def _parse_rmat(spec: str) -> tuple[int, int, int]:
    parts = spec.split(":")
    if len(parts) != 4:
        raise ValueError(f"rmat spec {spec!r} must be rmat:scale:degree:seed")
    try:
        scale, deg, seed = (int(p) for p in parts[1:])
    except ValueError:
        raise ValueError(f"rmat spec {spec!r} needs integer fields") from None
    return scale, deg, seed


@functools.lru_cache(maxsize=8)
def load_graph(spec: str, weighted: bool = False):
    """Load a graph from `rmat:scale:deg:seed`, a .bin cache, or an edge list."""
    if spec.startswith("rmat:"):
        scale, deg, seed = _parse_rmat(spec)
        return generate_rmat(scale, deg, seed)
    if spec.endswith(".bin"):
        return load_binary(spec)
    return load_edge_list(spec, weighted=weighted)


def _parse_optset(text: str):
    """One sweep optimization set: 'all', 'none', or plus-joined flags."""
    if text in ("all", "none"):
        return text
    return frozenset(text.split("+"))


def _print_row(row: MetricRow) -> None:
    width = max(len(c) for c in COLUMNS)
    for col in COLUMNS:
        value = getattr(row, col)
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        print(f"{col.ljust(width)}  {text}")


def _build_config(args, trace: bool) -> AccelConfig:
    return AccelConfig(
        which=args.accel, problem=args.problem, channels=args.channels,
        dram=resolve_dram(args.dram),
        optimizations=args.opt.replace("+", ","),
        interval_size=args.interval, pe=args.pe, damping=args.damping,
        root=args.root, trace=trace)


def cmd_simulate(args) -> int:
    cfg = _build_config(args, trace=bool(args.trace_out))
    cfg.resolved()                      # usage errors before any loading
    g = load_graph(args.graph, args.weighted)
    result = run_accel(g, cfg)
    row = compute_metrics(result, g, cfg)
    _print_row(row)
    if args.out:
        fresh = not (os.path.exists(args.out) and os.path.getsize(args.out))
        append_csv([row], args.out, header=fresh)
    if args.trace_out:
        dump_trace(result.trace, args.trace_out)
    return 0


# ---------------------------------------------------------------- sweep

def parse_sweep_config(text: str) -> dict:
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip()
        items = value.replace(",", " ").split()
        if not eq:
            raise ValueError(f"line {lineno}: expected 'key = values'")
        if key in LIST_KEYS:
            if not items:
                raise ValueError(f"line {lineno}: {key} needs a value")
            cfg[key] = items
        elif key in SCALAR_KEYS:
            if len(items) != 1:
                raise ValueError(f"line {lineno}: {key} takes one value")
            cfg[key] = items[0]
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    missing = [k for k in LIST_KEYS if k not in cfg]
    if missing:
        raise ValueError(f"sweep config missing keys: {', '.join(missing)}")
    for accel in cfg["accelerators"]:
        if accel not in ACCELERATORS:
            raise ValueError(f"unknown accelerator {accel!r}")
    try:
        cfg["channels"] = [int(c) for c in cfg["channels"]]
    except ValueError:
        raise ValueError("channels must be integers") from None
    return cfg


def _sweep_tasks(cfg: dict) -> tuple[list[dict], list[str]]:
    """Expand the product, dropping unsupported combinations."""
    tasks, skips = [], []
    drams = [resolve_dram(d) for d in cfg["dram"]]
    dram_names = {d: load_dram_config(d).name for d in drams}
    optsets = [_parse_optset(o) for o in cfg["optimizations"]]
    scalars = dict(
        interval_size=int(cfg["interval"]) if "interval" in cfg else None,
        pe=int(cfg["pe"]) if "pe" in cfg else None,
        damping=float(cfg["damping"]) if "damping" in cfg else 0.85,
        root=int(cfg["root"]) if "root" in cfg else None)
    for accel in cfg["accelerators"]:
        for problem in cfg["problems"]:
            if problem not in ACCEL_PROBLEMS[accel]:
                skips.append(f"{accel} does not support {problem}")
                continue
            for graph in cfg["graphs"]:
                for dram in drams:
                    for channels in cfg["channels"]:
                        if channels != 1 and accel in SINGLE_CHANNEL:
                            skips.append(f"{accel} is single-channel, "
                                         f"skipping channels={channels}")
                            continue
                        for opts in optsets:
                            if isinstance(opts, frozenset):
                                foreign = opts - ACCEL_FLAGS[accel]
                                if foreign:
                                    skips.append(
                                        f"{accel} has no flag "
                                        f"{'+'.join(sorted(foreign))}")
                                    continue
                                label = flags_label(opts)
                            elif opts == "all":
                                label = flags_label(ACCEL_FLAGS[accel])
                            else:
                                label = "none"
                            tasks.append(dict(
                                accel=accel, problem=problem, graph=graph,
                                dram=dram, channels=channels, opts=opts,
                                key=(accel, problem, graph_spec_name(graph),
                                     dram_names[dram], channels, label),
                                **scalars))
    return tasks, skips


def _sweep_task(task: dict) -> MetricRow:
    g = load_graph(task["graph"])
    cfg = AccelConfig(
        which=task["accel"], problem=task["problem"],
        channels=task["channels"], dram=task["dram"],
        optimizations=task["opts"], interval_size=task["interval_size"],
        pe=task["pe"], damping=task["damping"], root=task["root"])
    return compute_metrics(run_accel(g, cfg), g, cfg)


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        cfg = parse_sweep_config(fh.read())
    # paths named inside the config are relative to the config file
    base = os.path.dirname(os.path.abspath(args.config))
    for key in ("out", "summary"):
        if key in cfg:
            cfg[key] = os.path.join(base, cfg[key])
    cfg["graphs"] = [g if g.startswith("rmat:") or os.path.isabs(g)
                     else os.path.join(base, g) for g in cfg["graphs"]]
    out = args.out or cfg.get("out")
    if not out:
        raise ValueError("no output file: give --out or an 'out =' key")
    tasks, skips = _sweep_tasks(cfg)
    for note in skips:
        print(f"skip: {note}", file=sys.stderr)

    done: set[tuple] = set()
    fresh = True
    if os.path.exists(out) and os.path.getsize(out):
        done = {row_key(r) for r in read_csv(out)}
        fresh = False
    todo = [t for t in tasks if t["key"] not in done]
    print(f"sweep: {len(tasks)} combinations, {len(tasks) - len(todo)} "
          f"already done, {len(todo)} to run", file=sys.stderr)

    workers = int(os.environ.get("GPASIM_WORKERS", "1"))
    if workers > 1 and len(todo) > 1:
        with multiprocessing.Pool(workers) as pool:
            for i, row in enumerate(pool.imap(_sweep_task, todo)):
                append_csv([row], out, header=fresh)
                fresh = False
                print(f"[{i + 1}/{len(todo)}] {' '.join(map(str, row_key(row)))}",
                      file=sys.stderr)
    else:
        for i, task in enumerate(todo):
            row = _sweep_task(task)
            append_csv([row], out, header=fresh)
            fresh = False
            print(f"[{i + 1}/{len(todo)}] {' '.join(map(str, row_key(row)))}",
                  file=sys.stderr)

    if cfg.get("summary"):
        rows = read_csv(out)
        degrees = {}
        for spec in cfg["graphs"]:
            g = load_graph(spec)
            degrees[g.name] = degree_stats(g).avg_degree
        write_summary(rows, cfg["summary"], degrees)
    return 0


def cmd_replay(args) -> int:
    entries = load_trace(args.trace)
    stats = replay_trace(entries, resolve_dram(args.dram), args.channels)
    keys = ("requests", "reads", "writes", "row_hits", "row_misses",
            "row_conflicts", "busy_cycles", "elapsed_cycles", "elapsed_ns",
            "utilization")
    width = max(len(k) for k in keys)
    for key in keys:
        value = stats[key]
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        print(f"{key.ljust(width)}  {text}")
    for i, ch in enumerate(stats["per_channel"]):
        print(f"channel {i}: requests={ch['requests']} "
              f"hits={ch['row_hits']} misses={ch['row_misses']} "
              f"conflicts={ch['row_conflicts']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpasim",
        description="Memory-request simulator for FPGA graph accelerators")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation")
    sim.add_argument("--accel", required=True, choices=ACCELERATORS)
    sim.add_argument("--problem", required=True)
    sim.add_argument("--graph", required=True,
                     help="edge-list path, .bin cache, or rmat:scale:deg:seed")
    sim.add_argument("--root", type=int, default=None)
    sim.add_argument("--dram", default="ddr4",
                     help=f"{'|'.join(DRAM_ALIASES)} alias, "
                          f"{'|'.join(BUILTIN_CONFIGS)}, or a config file")
    sim.add_argument("--channels", type=int, default=1)
    sim.add_argument("--opt", default="none",
                     help="optimization flags (comma or plus separated), "
                          "'all', or 'none'")
    sim.add_argument("--interval", type=int, default=None,
                     help="vertices per partition interval")
    sim.add_argument("--pe", type=int, default=None,
                     help="pipeline count (default: per accelerator)")
    sim.add_argument("--damping", type=float, default=0.85)
    sim.add_argument("--weighted", action="store_true",
                     help="edge-list file carries a third weight column")
    sim.add_argument("--out", default=None, help="append the row to this CSV")
    sim.add_argument("--trace-out", default=None,
                     help="dump the request trace to this file")
    sim.set_defaults(func=cmd_simulate)

    swp = sub.add_parser("sweep", help="run a config-driven parameter sweep")
    swp.add_argument("config", help="sweep config file")
    swp.add_argument("--out", default=None,
                     help="output CSV (overrides the config's 'out' key)")
    swp.set_defaults(func=cmd_sweep)

    rep = sub.add_parser("replay", help="replay a request trace through DRAM")
    rep.add_argument("trace", help="trace file from simulate --trace-out")
    rep.add_argument("--dram", default="ddr4")
    rep.add_argument("--channels", type=int, default=None)
    rep.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:           # argparse already printed the message
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
