"""Pull-style single-channel accelerator over partitioned inverted CSR.

Each partition holds one source interval on chip. A pass streams the full
destination value and pointer rows together with the partition's neighbor
(source id) list; a fixed-width pipeline consumes w edges per cycle, so a
vertex with any in-interval edges holds it for ceil(degree/w) cycles and
fills slots only up to its degree, which is what makes low-degree graphs
pipeline-bound. Edgeless vertices are skipped by the pointer scan at 16
per cycle instead of entering the pipeline. Updates are applied
with same-pass visibility in ascending destination order, so min problems
can converge in far fewer passes than a two-phase design. Changed values
are written back as they are determined and take priority over reads.
"""
from __future__ import annotations

import numpy as np

from ..flow import Batch, Join, QueueLines, priority_merge, \
    round_robin_merge, sequential_producer
from ..layout import horizontal_csr
from ..problems import UNREACHED, init_values, initially_active, _sum_pass
from .common import ResolvedConfig, RunResult, Tally, finish, make_engine, \
    prepare

_REC = 4  # values, pointers, and neighbor ids are all 4-byte records


def _min_passes(layout, spec, n, root, skip_parts):
    """Ascending-destination passes with live updates; partitions in order,
    sources read live (an interval's own updates are visible immediately).

    A partition is skipped when no source in its interval has changed since
    the partition last ran, a test that can never drop a productive pass,
    so enabling it leaves the value trajectory and the iteration count
    untouched. Returns (final values, per-iteration lists of changed-dst
    arrays, with None marking a skipped partition).
    """
    k = layout.k
    ivs = layout.interval_size
    vals = init_values(spec, n, root).tolist()
    active = initially_active(spec, n, root)
    dirty = [bool(active[lo:hi].any())
             for lo, hi in (layout.interval(j) for j in range(k))]
    ptr_rows = [layout.ptrs[j].tolist() for j in range(k)]
    nbrs = layout.neighbors.tolist()
    starts = layout.part_edge_start.tolist()
    is_bfs = spec.problem == "bfs"
    plans = []
    while True:
        changed_any = False
        parts = []
        for j in range(k):
            if skip_parts and not dirty[j]:
                parts.append(None)
                continue
            dirty[j] = False
            ptr = ptr_rows[j]
            base_e = starts[j]
            changed = []
            for v in range(n):
                a = ptr[v]
                b = ptr[v + 1]
                if a == b:
                    continue
                best = vals[v]
                for e in range(base_e + a, base_e + b):
                    sv = vals[nbrs[e]]
                    if is_bfs:
                        if sv != UNREACHED:
                            sv += 1
                    if sv < best:
                        best = sv
                if best < vals[v]:
                    vals[v] = best
                    changed.append(v)
                    dirty[v // ivs] = True
                    changed_any = True
            parts.append(np.asarray(changed, dtype=np.int64))
        plans.append(parts)
        if not changed_any:
            break
        if len(plans) > n + 2:
            raise RuntimeError("value passes failed to converge")
    return np.asarray(vals, dtype=np.uint32), plans


def _part_prep(layout, j, pipeline_width):
    """Static per-partition schedule data: edge count, per-neighbor-line
    pipeline availability offsets, and CSR row for write dependencies.

    A vertex with edges holds the pipeline for ceil(degree/w) cycles and
    wastes slots below w. Edgeless vertices never enter the pipeline; the
    pointer scan walks past them at line rate, 16 pointers per cycle, so a
    run of z of them costs z/16 cycles."""
    n = layout.n
    ptr = layout.ptrs[j].astype(np.int64)
    m_j = int(ptr[n])
    deg = np.diff(ptr)
    cyc16 = np.where(deg > 0,
                     ((deg + pipeline_width - 1) // pipeline_width) * 16, 1)
    cum16 = np.concatenate([[0], np.cumsum(cyc16)])
    if m_j:
        first_rec = np.arange((m_j * _REC + 63) // 64, dtype=np.int64) * 16
        vtx = np.searchsorted(ptr, first_rec, side="right") - 1
        nbr_off = cum16[vtx] // 16
    else:
        nbr_off = np.zeros(0, dtype=np.int64)
    return ptr, m_j, nbr_off


def _write_deps(ptr, changed, n):
    """Per write line: the value line, last pointer line, and last neighbor
    line whose completion the write waits on (-1 when no edges precede)."""
    lines, counts = np.unique(changed // 16, return_counts=True)
    v_end = np.minimum((lines + 1) * 16, n)
    ptr_dep = (v_end * _REC) // 64
    re = ptr[v_end]
    nbr_dep = np.where(re > 0, (re * _REC - 1) // 64, -1)
    return lines, counts, ptr_dep, nbr_dep


class _WriteFrontier:
    """Emits one changed-value write line as soon as the value, pointer,
    and neighbor lines it depends on have all completed."""

    __slots__ = ("queue", "batch", "vbase", "lines", "counts", "ptr_dep",
                 "nbr_dep", "idx", "val_c", "ptr_c", "nbr_c",
                 "val_t", "ptr_t", "nbr_t")

    def __init__(self, queue, batch, vbase, deps, vlines, plines, nlines):
        self.queue = queue
        self.batch = batch
        self.vbase = vbase
        self.lines, self.counts, self.ptr_dep, self.nbr_dep = deps
        self.idx = 0
        self.val_c = self.ptr_c = self.nbr_c = 0
        self.val_t = np.zeros(vlines, dtype=np.int64)
        self.ptr_t = np.zeros(plines, dtype=np.int64)
        self.nbr_t = np.zeros(max(nlines, 1), dtype=np.int64)

    def on_val(self, i, t):
        self.val_t[i] = t
        self.val_c += 1
        self._advance()

    def on_ptr(self, i, t):
        self.ptr_t[i] = t
        self.ptr_c += 1
        self._advance()

    def on_nbr(self, i, t):
        self.nbr_t[i] = t
        self.nbr_c += 1
        self._advance()

    def _advance(self):
        while self.idx < len(self.lines):
            i = self.idx
            w = int(self.lines[i])
            if self.val_c <= w:
                return
            pd = int(self.ptr_dep[i])
            if self.ptr_c <= pd:
                return
            nd = int(self.nbr_dep[i])
            if nd >= 0 and self.nbr_c <= nd:
                return
            avail = int(self.val_t[w])
            if self.ptr_t[pd] > avail:
                avail = int(self.ptr_t[pd])
            if nd >= 0 and self.nbr_t[nd] > avail:
                avail = int(self.nbr_t[nd])
            b = self.batch
            self.queue.append(self.vbase + w * 64, avail,
                              int(self.counts[i]) * _REC, b, b.total)
            b.total += 1
            self.idx += 1


def run(g, rc: ResolvedConfig) -> RunResult:
    g, spec, root = prepare(g, rc)
    layout = horizontal_csr(g, rc.interval)
    n, k = layout.n, layout.k

    if spec.reduction == "min":
        final, plans = _min_passes(layout, spec, n, root,
                                   rc.has("partition_skip"))
    else:
        final = _sum_pass(spec, g, init_values(spec, n, root))
        # a sum pass rewrites every destination each partition
        plans = [[np.arange(n, dtype=np.int64) for _ in range(k)]]

    # resident-interval tracking decides each prefetch ahead of time
    want_pf = rc.has("prefetch_skip")
    prefetches = []
    last = -1
    for parts in plans:
        row = []
        for j, plan in enumerate(parts):
            if plan is None:
                row.append(False)
                continue
            row.append(not (want_pf and last == j))
            last = j
        prefetches.append(row)

    q_write = QueueLines("writes")
    q_nbr = QueueLines("neighbors")
    q_val = QueueLines("values")
    q_ptr = QueueLines("pointers")
    q_pf = QueueLines("prefetch")
    root_node = priority_merge(q_write, q_nbr,
                               round_robin_merge(q_val, q_ptr, q_pf))
    engine, model, clock = make_engine(rc, [root_node])
    tally = Tally()

    regs = layout.regions[0]
    vbase = regs["values"].base
    vlines = (n * _REC + 63) // 64
    plines = ((n + 1) * _REC + 63) // 64
    prep = [_part_prep(layout, j, rc.pipeline_width) for j in range(k)]

    def start_iteration(it, t):
        if it >= len(plans):
            return
        tally.start_iteration()
        parts = plans[it]
        todo = [j for j in range(k) if parts[j] is not None]
        batches = sum(4 + (1 if prefetches[it][j] else 0) for j in todo)
        it_join = Join(lambda tt: start_iteration(it + 1, tt))
        it_join.expect(batches)

        def stage_a(pos, t0):
            j = todo[pos]
            nxt = ((lambda tt: stage_b(pos, tt)) if prefetches[it][j]
                   else None)
            if nxt is not None:
                lo, hi = layout.interval(j)
                tally.add("values", hi - lo, (hi - lo) * _REC)
                engine.watch(sequential_producer(
                    q_pf, vbase + lo * _REC, hi - lo, _REC, int(t0),
                    region="values", label=f"pf{it}.{j}",
                    on_complete=[it_join.done, nxt]))
            else:
                stage_b(pos, t0)

        def stage_b(pos, t1):
            j = todo[pos]
            ptr, m_j, nbr_off = prep[j]
            changed = parts[j]
            nlines = (m_j * _REC + 63) // 64
            wb = Batch(label=f"wr{it}.{j}", kind="w", region="writes",
                       base=vbase, record_bytes=_REC, count=len(changed),
                       total=0, open_ended=True, on_complete=[it_join.done])
            engine.watch(wb)
            tally.add("writes", len(changed), len(changed) * _REC)
            fr = _WriteFrontier(q_write, wb, vbase,
                                _write_deps(ptr, changed, n),
                                vlines, plines, nlines)

            def part_done(tj):
                wb.close(tj)
                if pos + 1 < len(todo):
                    stage_a(pos + 1, tj)

            pj = Join(part_done)
            pj.expect(3)
            t1 = int(t1)
            tally.add("values", n, n * _REC)
            engine.watch(sequential_producer(
                q_val, vbase, n, _REC, t1, region="values",
                label=f"val{it}.{j}", on_line=fr.on_val,
                on_complete=[it_join.done, pj.done]))
            tally.add("pointers", n + 1, (n + 1) * _REC)
            engine.watch(sequential_producer(
                q_ptr, int(layout.ptr_base[j]), n + 1, _REC, t1,
                region="pointers", label=f"ptr{it}.{j}", on_line=fr.on_ptr,
                on_complete=[it_join.done, pj.done]))
            tally.add("edges", m_j, m_j * _REC)
            avail = t1 + nbr_off if m_j else t1
            engine.watch(sequential_producer(
                q_nbr, int(layout.nbr_base[j]), m_j, _REC, avail,
                region="edges", label=f"nbr{it}.{j}", on_line=fr.on_nbr,
                on_complete=[it_join.done, pj.done]))

        if todo:
            stage_a(0, t)
        else:
            start_iteration(it + 1, t)

    start_iteration(0, 0)
    engine.run()

    return finish(rc, g, engine, model, tally, len(plans), final, root,
                  edges_read=tally.total("edges"),
                  updates_written=tally.total("writes"),
                  region_bytes=tally.region_bytes_by(
                      {"values": _REC, "pointers": _REC, "edges": _REC,
                       "updates": 8, "writes": _REC}),
                  footprint=list(layout.total_bytes))
