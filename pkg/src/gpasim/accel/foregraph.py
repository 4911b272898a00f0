"""Interval-shard accelerator: single channel, compressed 4-byte edges.

The graph is cut into a k x k grid of shards over 64K-vertex intervals.
Each processing element owns the source rows congruent to its index and
keeps a private working copy of the values; copies merge at iteration end.
Per row a PE loads the source interval once, then walks the row's shards:
destination interval in, edge records in, whole destination interval back
out (write-back is unconditional). The diagonal shard shares its on-chip
buffer between source and destination roles, so updates inside it are
visible immediately and min problems converge in few passes.

Edge shuffling zips runs of p destination shards into one record stream
consumed in lockstep; shorter members are padded with null records that
are fetched (and counted as edges read) but carry no work. Row skipping
drops a row when no source in its interval changed, from the owning PE's
view, since that PE last processed the row. The stride vertex map spreads
consecutive ids over intervals before the grid is built.
"""
from __future__ import annotations

import numpy as np

from ..flow import Join, QueueLines, round_robin_merge, sequential_producer
from ..layout import interval_shard, shuffle_edges, stride_map
from ..problems import UNREACHED, init_values, _sum_pass
from .common import ResolvedConfig, RunResult, Tally, finish, make_engine, \
    prepare

_REC = 4


def _group_order(layout, i, grp):
    """Global edge indices of a group's records in stream order, pads
    dropped (record t belongs to member t mod width at offset t div width)."""
    width = len(grp.dst_intervals)
    lens = np.asarray(grp.shard_lens, dtype=np.int64)
    if width == 1:
        s = int(layout.shard_edge_start[i, grp.dst_intervals[0]])
        return np.arange(s, s + int(lens[0]), dtype=np.int64)
    starts = np.asarray([layout.shard_edge_start[i, j]
                         for j in grp.dst_intervals], dtype=np.int64)
    t = np.arange(width * int(lens.max(initial=0)), dtype=np.int64)
    m = t % width
    idx = t // width
    keep = idx < lens[m]
    return (starts[m] + idx)[keep]


def _row_units(layout):
    """Per source row: the non-empty groups with their zipped edge order."""
    rows = []
    for i in range(layout.k):
        units = [(grp, _group_order(layout, i, grp))
                 for grp in layout.groups[i] if grp.stored > 0]
        rows.append(units)
    return rows


def _min_passes(layout, spec, root, rows, row_pe, pe, skip_rows):
    """Live relaxation per PE over its rows; private copies merge at
    iteration end. Row skipping uses per-PE dirty flags and never alters
    the value trajectory. Returns (final, per-iteration processed rows)."""
    n, k, ivs = layout.n, layout.k, layout.interval_size
    init = init_values(spec, n, root)
    # no change history before the first pass: every interval starts dirty
    dirty = [[True] * k for _ in range(pe)]
    views = [init.tolist() for _ in range(pe)]
    src_l = layout.src.tolist()
    dst_l = layout.dst.tolist()
    orders = [[o.tolist() for _, o in rows[i]] for i in range(k)]
    is_bfs = spec.problem == "bfs"
    merged = init.astype(np.int64)
    plans = []
    while True:
        start = merged.copy()
        processed = []
        for i in range(k):
            t = row_pe[i]
            if not rows[i] or (skip_rows and not dirty[t][i]):
                continue
            dirty[t][i] = False
            vals = views[t]
            dd = dirty[t]
            for order in orders[i]:
                for e in order:
                    sv = vals[src_l[e]]
                    if is_bfs:
                        if sv != UNREACHED:
                            sv += 1
                    v = dst_l[e]
                    if sv < vals[v]:
                        vals[v] = sv
                        dd[v // ivs] = True
            processed.append(i)
        arrs = [np.asarray(v, dtype=np.int64) for v in views]
        merged = arrs[0]
        for a in arrs[1:]:
            merged = np.minimum(merged, a)
        for t in range(pe):
            gain = merged < arrs[t]
            if gain.any():
                for j in np.unique(np.flatnonzero(gain) // ivs):
                    dirty[t][j] = True
            views[t] = merged.tolist()
        plans.append(processed)
        if not (merged < start).any():
            break
        if len(plans) > n + 2:
            raise RuntimeError("value passes failed to converge")
    return merged.astype(np.uint32), plans


def run(g, rc: ResolvedConfig) -> RunResult:
    g, spec, root = prepare(g, rc)
    g0, root0 = g, root
    perm = None
    k_map = -(-g.n // rc.interval)
    if rc.has("stride_map") and k_map > 1:
        g, perm = stride_map(g, k_map)
        root = int(perm[root0]) if spec.needs_root else root
        ivs = -(-g0.n // k_map)
    else:
        ivs = rc.interval
    layout = interval_shard(g, ivs, rc.pe)
    if rc.has("edge_shuffle"):
        layout = shuffle_edges(layout, rc.pe)
    n, k, pe = layout.n, layout.k, layout.p if layout.shuffled else rc.pe
    rows = _row_units(layout)
    # lockstep mode streams every row through the one shared pipeline
    row_pe = [0 if layout.shuffled else i % pe for i in range(k)]
    views = 1 if layout.shuffled else pe

    if spec.reduction == "min":
        final, plans = _min_passes(layout, spec, root, rows, row_pe, views,
                                   rc.has("shard_skip"))
    else:
        final = _sum_pass(spec, g0, init_values(spec, g0.n, root0))
        plans = [[i for i in range(k) if rows[i]]]

    lanes = [QueueLines(f"pe{t}") for t in range(views)]
    root_node = lanes[0] if views == 1 else round_robin_merge(*lanes)
    engine, model, clock = make_engine(rc, [root_node])
    tally = Tally()
    vbase = layout.regions[0]["values"].base

    def start_iteration(it, t):
        if it >= len(plans):
            return
        tally.start_iteration()
        todo = [[] for _ in range(views)]
        for i in plans[it]:
            todo[row_pe[i]].append(i)
        batches = 0
        for i in plans[it]:
            batches += 1
            for grp, _ in rows[i]:
                batches += 2 * len(grp.dst_intervals) + 1
        it_join = Join(lambda tt: start_iteration(it + 1, tt))
        it_join.expect(batches)

        def start_row(lane, pos, t0):
            i = todo[lane][pos]
            lo, hi = layout.interval(i)
            tally.add("values", hi - lo, (hi - lo) * _REC)
            engine.watch(sequential_producer(
                lanes[lane], vbase + lo * _REC, hi - lo, _REC, int(t0),
                region="values", label=f"src{it}.{i}",
                on_complete=[it_join.done,
                             lambda tt: start_group(lane, pos, 0, tt)]))

        def start_group(lane, pos, gidx, ts):
            i = todo[lane][pos]
            grp, _ = rows[i][gidx]
            width = len(grp.dst_intervals)

            def group_done(tj):
                for j in grp.dst_intervals:
                    lo, hi = layout.interval(j)
                    tally.add("writes", hi - lo, (hi - lo) * _REC)
                    engine.watch(sequential_producer(
                        lanes[lane], vbase + lo * _REC, hi - lo, _REC,
                        int(tj), kind="w", region="writes",
                        label=f"wb{it}.{i}.{gidx}",
                        on_complete=[it_join.done]))
                if gidx + 1 < len(rows[i]):
                    start_group(lane, pos, gidx + 1, tj)
                elif pos + 1 < len(todo[lane]):
                    start_row(lane, pos + 1, tj)

            gj = Join(group_done)
            gj.expect(width + 1)
            ts = int(ts)
            for j in grp.dst_intervals:
                lo, hi = layout.interval(j)
                tally.add("values", hi - lo, (hi - lo) * _REC)
                engine.watch(sequential_producer(
                    lanes[lane], vbase + lo * _REC, hi - lo, _REC, ts,
                    region="values", label=f"dst{it}.{i}.{gidx}",
                    on_complete=[it_join.done, gj.done]))
            tally.add("edges", grp.stored, grp.stored * _REC)
            engine.watch(sequential_producer(
                lanes[lane], grp.edge_base, grp.stored, _REC, ts,
                region="edges", label=f"sh{it}.{i}.{gidx}",
                on_complete=[it_join.done, gj.done]))

        started = False
        for lane in range(views):
            if todo[lane]:
                start_row(lane, 0, t)
                started = True
        if not started:
            start_iteration(it + 1, t)

    start_iteration(0, 0)
    engine.run()

    if perm is not None and spec.reduction == "min":
        final = final[perm]
        if spec.problem == "wcc":
            # labels are relabeled ids; translate back to an original id
            inv = np.zeros(n, dtype=np.uint32)
            inv[perm] = np.arange(g0.n, dtype=np.uint32)
            final = inv[final]

    return finish(rc, g0, engine, model, tally, len(plans), final, root0,
                  edges_read=tally.total("edges"),
                  updates_written=tally.total("writes"),
                  region_bytes=tally.region_bytes_by(
                      {"values": _REC, "pointers": 4, "edges": _REC,
                       "updates": 8, "writes": _REC}),
                  footprint=list(layout.total_bytes))
