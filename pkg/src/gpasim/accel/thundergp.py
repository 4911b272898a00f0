"""Replicated scatter-gather-apply pipelines, one per memory channel.

Edges live in destination-interval partitions sorted by source; each
partition is split positionally into one chunk per channel. Every channel
keeps a private full copy of the values plus an equally sized partial
block. For each partition a channel seeds its accumulator with the old
interval values, streams its chunk while loading each distinct source
value once (sources arrive sorted, so consecutive deduplication is exact),
then dumps a partial result for the whole interval. Apply walks the
partitions in lockstep: it reads every channel's partial slice, merges,
and writes the final interval back to every channel's copy.

The one optimization, chunk scheduling, reassigns chunks to channels by
longest-processing-time on estimated cost to even out skewed partitions.
The on-chip source buffer size is configurable but does not change
traffic: with sorted sources a single entry already deduplicates runs.
"""
from __future__ import annotations

import numpy as np

from ..flow import Batch, Join, LineMerger, QueueLines, round_robin_merge, \
    sequential_producer
from ..layout import schedule_chunks, vertical_edge_list
from ..problems import apply_update, edge_update, init_values
from .common import ResolvedConfig, RunResult, Tally, finish, make_engine, \
    prepare

_VAL = 4


def _value_passes(layout, spec, g, root):
    """Full two-phase value evolution; returns (final values, iterations)."""
    n = layout.n
    values = init_values(spec, n, root)
    deg = g.out_degrees() if spec.uses_out_degree else None
    s = layout.src.astype(np.int64)
    d = layout.dst.astype(np.int64)
    w = layout.weights
    iters = 0
    while True:
        cand = edge_update(spec, values[s], w,
                           deg[s] if deg is not None else None)
        if spec.reduction == "min":
            acc = values.copy()
            np.minimum.at(acc, d, cand)
        else:
            acc = np.zeros(n, dtype=np.float64)
            np.add.at(acc, d, cand)
        new, changed = apply_update(spec, acc, values, n)
        values = new
        iters += 1
        if spec.fixed_iterations is not None and iters >= spec.fixed_iterations:
            break
        if spec.fixed_iterations is None and not changed.any():
            break
        if iters > n + 2:
            raise RuntimeError("value passes failed to converge")
    return values, iters


def _chunk_prep(layout):
    """Per (partition, chunk): distinct-source first occurrences grouped by
    the edge line that makes them visible."""
    rb = layout.edge_record_bytes
    prep = {}
    for q in range(layout.k):
        e0 = int(layout.part_edges[q])
        for c in range(layout.p):
            a = e0 + int(layout.chunk_bounds[q, c])
            b = e0 + int(layout.chunk_bounds[q, c + 1])
            srcs = layout.src[a:b].astype(np.int64)
            cnt = b - a
            if cnt:
                first = np.concatenate(
                    [[0], np.flatnonzero(srcs[1:] != srcs[:-1]) + 1])
                fsrc = srcs[first]
                eline = ((first + 1) * rb - 1) // 64
                nlines = (cnt * rb + 63) // 64
                ptr = np.zeros(nlines + 1, dtype=np.int64)
                np.add.at(ptr, eline + 1, 1)
                ptr = np.cumsum(ptr)
            else:
                fsrc = np.zeros(0, dtype=np.int64)
                ptr = np.zeros(1, dtype=np.int64)
            prep[(q, c)] = {"count": cnt, "fsrc": fsrc, "ptr": ptr}
    return prep


def run(g, rc: ResolvedConfig) -> RunResult:
    g, spec, root = prepare(g, rc)
    layout = vertical_edge_list(g, rc.interval, rc.channels)
    if rc.has("chunk_schedule"):
        layout = schedule_chunks(layout)
    k, p, rb = layout.k, layout.p, layout.edge_record_bytes
    n = layout.n

    final, n_iters = _value_passes(layout, spec, g, root)
    prep = _chunk_prep(layout)

    reads = [QueueLines(f"rd{c}") for c in range(p)]
    srcq = [QueueLines(f"sv{c}") for c in range(p)]
    writes = [QueueLines(f"wr{c}") for c in range(p)]
    roots = [round_robin_merge(reads[c], srcq[c], writes[c])
             for c in range(p)]
    engine, model, clock = make_engine(rc, roots)
    tally = Tally()

    vbase = [layout.regions[ch]["values"].base for ch in range(p)]
    ubase = [layout.regions[ch]["updates"].base for ch in range(p)]
    # chunks each channel works through; partitions run in lockstep, so a
    # channel still seeds and dumps a partial when it owns no chunk of one
    sched = {ch: [] for ch in range(p)}
    for q in range(k):
        for c in range(p):
            sched[int(layout.chunk_channel[q, c])].append((q, c))

    def start_iteration(it, t):
        if it >= n_iters:
            return
        tally.start_iteration()
        sg_join = Join(lambda tt: start_apply(0, tt))
        sg_join.expect(2 * k * p + 2 * len(prep))
        it_join = Join(lambda tt: start_iteration(it + 1, tt))
        it_join.expect(2 * k * p + 2 * len(prep) + 2 * k * p)

        def seed_partition(ch, q, t0):
            lo, hi = layout.interval(q)
            chunks = [(qq, cc) for qq, cc in sched[ch] if qq == q]

            def run_chunk(ci, t1):
                if ci == len(chunks):
                    tally.add("updates", hi - lo, (hi - lo) * _VAL)
                    engine.watch(sequential_producer(
                        writes[ch], ubase[ch] + _VAL * lo, hi - lo, _VAL,
                        int(t1), kind="w", region="updates",
                        label=f"par{it}.{q}.{ch}",
                        on_complete=[sg_join.done, it_join.done]))
                    if q + 1 < k:
                        seed_partition(ch, q + 1, t1)
                    return
                qq, cc = chunks[ci]
                pc = prep[(qq, cc)]
                cj = Join(lambda tj: run_chunk(ci + 1, tj))
                cj.expect(2)
                sv = Batch(label=f"svl{it}.{qq}.{cc}", kind="r",
                           region="values", base=vbase[ch], record_bytes=_VAL,
                           count=len(pc["fsrc"]), open_ended=True,
                           on_complete=[sg_join.done, it_join.done, cj.done])
                engine.watch(sv)
                merger = LineMerger(srcq[ch], sv)
                ptr, fsrc = pc["ptr"], pc["fsrc"]

                def on_edge_line(li, tl):
                    for x in range(int(ptr[li]), int(ptr[li + 1])):
                        merger.add(vbase[ch] + _VAL * int(fsrc[x]), _VAL, tl)

                tally.add("values", len(fsrc), len(fsrc) * _VAL)
                tally.add("edges", pc["count"], pc["count"] * rb)
                engine.watch(sequential_producer(
                    reads[ch], int(layout.chunk_base[qq, cc]), pc["count"],
                    rb, int(t1), region="edges", label=f"edg{it}.{qq}.{cc}",
                    on_line=on_edge_line,
                    on_complete=[sg_join.done, it_join.done, merger.close,
                                 cj.done]))

            tally.add("values", hi - lo, (hi - lo) * _VAL)
            engine.watch(sequential_producer(
                reads[ch], vbase[ch] + _VAL * lo, hi - lo, _VAL, int(t0),
                region="values", label=f"seed{it}.{q}.{ch}",
                on_complete=[sg_join.done, it_join.done,
                             lambda t1: run_chunk(0, t1)]))

        def start_apply(q, t0):
            if q == k:
                return
            lo, hi = layout.interval(q)
            aj = Join(lambda tj: finish_apply(q, tj))
            aj.expect(p)
            for ch in range(p):
                tally.add("updates", hi - lo, (hi - lo) * _VAL)
                engine.watch(sequential_producer(
                    reads[ch], ubase[ch] + _VAL * lo, hi - lo, _VAL, int(t0),
                    region="updates", label=f"apr{it}.{q}.{ch}",
                    on_complete=[it_join.done, aj.done]))

        def finish_apply(q, tj):
            lo, hi = layout.interval(q)
            for ch in range(p):
                tally.add("writes", hi - lo, (hi - lo) * _VAL)
                engine.watch(sequential_producer(
                    writes[ch], vbase[ch] + _VAL * lo, hi - lo, _VAL,
                    int(tj), kind="w", region="writes",
                    label=f"apw{it}.{q}.{ch}",
                    on_complete=[it_join.done]))
            start_apply(q + 1, tj)

        for ch in range(p):
            seed_partition(ch, 0, t)

    start_iteration(0, 0)
    engine.run()

    updates_written = n_iters * n * p
    per_chan = n * _VAL + (-(-g.m // p)) * rb + n * _VAL
    return finish(rc, g, engine, model, tally, n_iters, final, root,
                  edges_read=tally.total("edges"),
                  updates_written=updates_written,
                  region_bytes=tally.region_bytes_by(
                      {"values": _VAL, "pointers": 4, "edges": rb,
                       "updates": _VAL, "writes": _VAL}),
                  footprint=[per_chan] * p)
