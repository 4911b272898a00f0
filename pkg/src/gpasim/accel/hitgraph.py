"""Two-phase scatter-gather accelerator over per-channel edge partitions.

Partitions are source intervals dealt round-robin onto channels. Scatter
streams a partition's interval values and edge list and emits an 8-byte
update record per edge, computed from the iteration-start snapshot and
routed through a crossbar into one update queue per destination interval.
After a global barrier, gather replays each queue against its interval and
writes back only the values that changed. Both phases walk a channel's
partitions in order while the channels run concurrently.

Partition skipping drops the scatter of intervals whose values did not
change in the previous iteration and, for min problems, the gather of
queues that received nothing. Destination sorting is a layout change that
makes same-destination updates adjacent; update combining folds adjacent
same-destination updates into one record; update filtering drops updates
from sources that did not change. None of these affect final values.
"""
from __future__ import annotations

import numpy as np

from ..flow import Batch, Join, LineMerger, QueueLines, round_robin_merge, \
    sequential_producer
from ..layout import horizontal_edge_list, sort_by_destination
from ..problems import apply_update, edge_update, init_values, \
    initially_active
from .common import ResolvedConfig, RunResult, Tally, finish, make_engine, \
    prepare

_VAL = 4
_UPD = 8


def _plan_passes(layout, spec, g, root, rc):
    """Precompute per-iteration scatter/gather work and the final values."""
    n, k, ivs = layout.n, layout.k, layout.interval_size
    skip = rc.has("partition_skip")
    filt = rc.has("update_filter")
    comb = rc.has("update_combine")
    values = init_values(spec, n, root)
    active = initially_active(spec, n, root)
    deg = g.out_degrees() if spec.uses_out_degree else None
    rb = layout.edge_record_bytes
    iters = []
    while True:
        scatter = []
        route = {}          # q -> list of (dst, cand) chunks
        for j in range(k):
            lo_e, hi_e = int(layout.part_edges[j]), int(layout.part_edges[j + 1])
            lo, hi = layout.interval(j)
            if lo >= hi and lo_e >= hi_e:
                continue
            if skip and not active[lo:hi].any():
                continue
            s = layout.src[lo_e:hi_e].astype(np.int64)
            d = layout.dst[lo_e:hi_e].astype(np.int64)
            w = (layout.weights[lo_e:hi_e] if layout.weights is not None
                 else None)
            pos = np.arange(hi_e - lo_e, dtype=np.int64)
            if filt:
                keep = active[s]
                s, d, pos = s[keep], d[keep], pos[keep]
                if w is not None:
                    w = w[keep]
            if len(s):
                cand = edge_update(spec, values[s], w,
                                   deg[s] if deg is not None else None)
            else:
                cand = np.zeros(0, dtype=values.dtype)
            if comb and len(d) > 1:
                cuts = np.concatenate([[0], np.flatnonzero(d[1:] != d[:-1]) + 1])
                if spec.reduction == "min":
                    cand = np.minimum.reduceat(cand, cuts)
                else:
                    cand = np.add.reduceat(cand, cuts)
                # a folded run is final only once its last edge streams by
                ends = np.concatenate([cuts[1:] - 1, [len(d) - 1]])
                pos = pos[ends]
                d = d[cuts]
            # emission line of an update = line holding its edge's last byte
            eline = ((pos + 1) * rb - 1) // 64
            nlines = (((hi_e - lo_e) * rb) + 63) // 64
            ptr = np.zeros(nlines + 1, dtype=np.int64)
            if len(eline):
                np.add.at(ptr, eline + 1, 1)
            ptr = np.cumsum(ptr)
            q_of = d // ivs
            scatter.append({"j": j, "m": hi_e - lo_e, "ptr": ptr,
                            "dst": d, "q": q_of, "count": len(d)})
            for q in np.unique(q_of):
                route.setdefault(int(q), []).append(
                    (d[q_of == q], cand[q_of == q]))

        gather = []
        new_values = values.copy()
        changed_any = False
        next_active = np.zeros(n, dtype=bool)
        for q in range(k):
            lo, hi = layout.interval(q)
            if lo >= hi:
                continue
            chunks = route.get(q, [])
            u_q = sum(len(c[0]) for c in chunks)
            if u_q == 0 and skip and spec.reduction == "min":
                continue
            old = values[lo:hi]
            if spec.reduction == "min":
                acc = old.copy()
                for dst_c, cand_c in chunks:
                    np.minimum.at(acc, dst_c - lo, cand_c)
            else:
                acc = np.zeros(hi - lo, dtype=np.float64)
                for dst_c, cand_c in chunks:
                    np.add.at(acc, dst_c - lo, cand_c)
            new, changed = apply_update(spec, acc, old, n)
            new_values[lo:hi] = new
            next_active[lo:hi] = changed
            if changed.any():
                changed_any = True
            rel = np.flatnonzero(changed)
            lines, counts = np.unique(rel // 16, return_counts=True)
            gather.append({"q": q, "u": u_q, "wlines": lines,
                           "wcounts": counts})
        iters.append({"scatter": scatter, "gather": gather})
        values = new_values
        active = next_active
        if spec.fixed_iterations is not None or not changed_any:
            break
        if len(iters) > n + 2:
            raise RuntimeError("value passes failed to converge")
    return values, iters


def run(g, rc: ResolvedConfig) -> RunResult:
    g, spec, root = prepare(g, rc)
    layout = horizontal_edge_list(g, rc.interval, rc.channels)
    if rc.has("dst_sort"):
        layout = sort_by_destination(layout)
    k, p, rb = layout.k, layout.channels, layout.edge_record_bytes

    final, iters = _plan_passes(layout, spec, g, root, rc)

    reads = [QueueLines(f"rd{c}") for c in range(p)]
    writes = [QueueLines(f"wr{c}") for c in range(p)]
    roots = [round_robin_merge(reads[c], writes[c]) for c in range(p)]
    engine, model, clock = make_engine(rc, roots)
    tally = Tally()
    updates_written = 0

    chan_of = layout.part_channel

    def start_iteration(it, t):
        nonlocal updates_written
        if it >= len(iters):
            return
        tally.start_iteration()
        plan = iters[it]
        scatter, gather = plan["scatter"], plan["gather"]
        u_total = sum(gp["u"] for gp in gather)
        batches = 2 * len(scatter) + k + 3 * len(gather)
        it_join = Join(lambda tt: start_iteration(it + 1, tt))
        it_join.expect(batches)

        # one update-queue writer per destination interval, open all phase
        upd_total = {q: 0 for q in range(k)}
        for sp in scatter:
            qs, cnts = np.unique(sp["q"], return_counts=True)
            for q, c in zip(qs.tolist(), cnts.tolist()):
                upd_total[q] += c
        mergers = {}
        upd_join = Join(lambda tt: start_gather(tt))
        upd_join.expect(k)
        pos = [0] * k
        for q in range(k):
            b = Batch(label=f"upd{it}.{q}", kind="w", region="updates",
                      base=int(layout.queue_base[q]), record_bytes=_UPD,
                      count=upd_total[q], open_ended=True,
                      on_complete=[it_join.done, upd_join.done])
            engine.watch(b)
            mergers[q] = LineMerger(writes[int(chan_of[q])], b)
        tally.add("updates", u_total, u_total * _UPD)
        updates_written += u_total

        sc_join = Join(lambda tt: close_queues(tt))
        sc_join.expect(2 * len(scatter) if scatter else 1)

        def close_queues(tt):
            for q in range(k):
                mergers[q].close(tt)

        by_chan = {}
        for idx, sp in enumerate(scatter):
            by_chan.setdefault(int(chan_of[sp["j"]]), []).append(idx)

        def start_scatter(c, i, t0):
            sp = scatter[by_chan[c][i]]
            j = sp["j"]
            lo, hi = layout.interval(j)
            ptr, dq, qq = sp["ptr"], sp["dst"], sp["q"]

            def on_edge_line(li, tl):
                a, b = int(ptr[li]), int(ptr[li + 1])
                for x in range(a, b):
                    q = int(qq[x])
                    mergers[q].add(int(layout.queue_base[q]) + _UPD * pos[q],
                                   _UPD, tl)
                    pos[q] += 1

            def after_pf(t1):
                tally.add("edges", sp["m"], sp["m"] * rb)
                engine.watch(sequential_producer(
                    reads[c], int(layout.edge_base[j]), sp["m"], rb, int(t1),
                    region="edges", label=f"edg{it}.{j}",
                    on_line=on_edge_line,
                    on_complete=[it_join.done, sc_join.done, after_edges]))

            def after_edges(t2):
                nxt = i + 1
                if nxt < len(by_chan[c]):
                    start_scatter(c, nxt, t2)

            tally.add("values", hi - lo, (hi - lo) * _VAL)
            engine.watch(sequential_producer(
                reads[c], int(layout.value_base[j]), hi - lo, _VAL, int(t0),
                region="values", label=f"spf{it}.{j}",
                on_complete=[it_join.done, sc_join.done, after_pf]))

        g_by_chan = {}
        for idx, gp in enumerate(gather):
            g_by_chan.setdefault(int(chan_of[gp["q"]]), []).append(idx)

        def start_gather(tg):
            if not gather:
                return
            for c in g_by_chan:
                gather_one(c, 0, tg)

        def gather_one(c, i, t0):
            gp = gather[g_by_chan[c][i]]
            q = gp["q"]
            lo, hi = layout.interval(q)

            def after_pf(t1):
                tally.add("updates", gp["u"], gp["u"] * _UPD)
                engine.watch(sequential_producer(
                    reads[c], int(layout.queue_base[q]), gp["u"], _UPD,
                    int(t1), region="updates", label=f"urd{it}.{q}",
                    on_complete=[it_join.done, after_upd]))

            def after_upd(t2):
                nw = int(gp["wcounts"].sum())
                wb = Batch(label=f"vwr{it}.{q}", kind="w", region="writes",
                           base=int(layout.value_base[q]), record_bytes=_VAL,
                           count=nw, total=len(gp["wlines"]),
                           open_ended=True, on_complete=[it_join.done])
                engine.watch(wb)
                tally.add("writes", nw, nw * _VAL)
                for x, (wl, wc) in enumerate(zip(gp["wlines"], gp["wcounts"])):
                    writes[c].append(int(layout.value_base[q]) + int(wl) * 64,
                                     int(t2), int(wc) * _VAL, wb, x)
                wb.close(int(t2))
                if i + 1 < len(g_by_chan[c]):
                    gather_one(c, i + 1, t2)

            tally.add("values", hi - lo, (hi - lo) * _VAL)
            engine.watch(sequential_producer(
                reads[c], int(layout.value_base[q]), hi - lo, _VAL, int(t0),
                region="values", label=f"gpf{it}.{q}",
                on_complete=[it_join.done, after_pf]))

        if scatter:
            for c in by_chan:
                start_scatter(c, 0, t)
        else:
            sc_join.done(t)

    start_iteration(0, 0)
    engine.run()

    return finish(rc, g, engine, model, tally, len(iters), final, root,
                  edges_read=tally.total("edges"),
                  updates_written=updates_written,
                  region_bytes=tally.region_bytes_by(
                      {"values": _VAL, "pointers": 4, "edges": rb,
                       "updates": _UPD, "writes": _VAL}),
                  footprint=list(layout.total_bytes))
