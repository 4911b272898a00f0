"""Byte-addressed memory layouts used by the accelerator models.

Each builder places named regions (values, pointers, edges, update queues)
at 64-byte aligned bases per channel and records where every partition's
data lives. Addresses are byte offsets within a channel. The layouts carry
the reordered edge arrays so the simulation can recover which edges a given
request range covers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ALIGN = 64
VALUE_BYTES = 4
POINTER_BYTES = 4
UPDATE_BYTES = 8


def _align(x: int) -> int:
    return (x + ALIGN - 1) & ~(ALIGN - 1)


@dataclass(frozen=True)
class Region:
    name: str
    base: int
    nbytes: int

    @property
    def end(self) -> int:
        return self.base + self.nbytes


@dataclass
class PartitionedLayout:
    """Common shape shared by the concrete layouts."""

    scheme: str
    n: int
    m: int
    k: int                      # partition count
    p: int                      # processing elements / chunks per partition
    channels: int
    interval_size: int
    edge_record_bytes: int
    regions: list[dict[str, Region]] = field(default_factory=list)
    total_bytes: list[int] = field(default_factory=list)

    def interval(self, idx: int) -> tuple[int, int]:
        lo = min(idx * self.interval_size, self.n)
        return lo, min(lo + self.interval_size, self.n)

    def interval_of(self, v: int) -> int:
        return v // self.interval_size

    def describe(self) -> str:
        lines = [f"scheme={self.scheme} n={self.n} m={self.m} "
                 f"k={self.k} p={self.p} channels={self.channels} "
                 f"interval={self.interval_size} edge_bytes={self.edge_record_bytes}"]
        for ch, regs in enumerate(self.regions):
            lines.append(f"channel {ch}: {self.total_bytes[ch]} bytes")
            for r in regs.values():
                lines.append(f"  {r.name:<10} base=0x{r.base:010x} size={r.nbytes}")
        return "\n".join(lines)


def _place(parts: list[tuple[str, int]]) -> tuple[dict[str, Region], int]:
    """Lay out named blocks back to back, each 64-byte aligned."""
    regs: dict[str, Region] = {}
    base = 0
    for name, nbytes in parts:
        size = _align(nbytes)
        regs[name] = Region(name, base, size)
        base += size
    return regs, base


# --------------------------------------------------------------------------
# Inverted CSR partitioned by source interval (pull-style accelerator).

@dataclass
class CsrLayout(PartitionedLayout):
    # per partition: pointer row over all destinations, neighbor segment
    ptrs: np.ndarray = None            # (k, n+1) uint32, per-partition offsets
    neighbors: np.ndarray = None       # uint32 source ids, grouped (part, dst)
    part_edge_start: np.ndarray = None  # (k,) int64 into neighbors
    ptr_base: np.ndarray = None        # (k,) int64 byte base of pointer rows
    nbr_base: np.ndarray = None        # (k,) int64 byte base of neighbor rows


def horizontal_csr(g, interval_size: int, inverted: bool = True) -> CsrLayout:
    """Partition by source interval; store each partition as a CSR indexed
    by destination whose neighbor lists hold the in-interval sources.

    Every partition carries n+1 pointers because its CSR spans all
    destinations; only the neighbor lists are limited to the interval.
    """
    if not inverted:
        raise ValueError("only the inverted orientation is supported")
    if interval_size < 1:
        raise ValueError("interval_size must be positive")
    n, m = g.n, g.m
    k = max(1, -(-n // interval_size))
    part = (g.src // interval_size).astype(np.int64)
    order = np.lexsort((np.arange(m), g.dst, part)) if m else np.arange(0)
    neighbors = g.src[order].astype(np.uint32)
    dst_sorted = g.dst[order].astype(np.int64)
    part_sorted = part[order]
    part_counts = np.bincount(part_sorted, minlength=k).astype(np.int64)
    part_edge_start = np.concatenate([[0], np.cumsum(part_counts)])[:k]

    ptrs = np.zeros((k, n + 1), dtype=np.uint32)
    for j in range(k):
        lo = part_edge_start[j]
        hi = lo + part_counts[j]
        counts = np.bincount(dst_sorted[lo:hi], minlength=n)
        ptrs[j, 1:] = np.cumsum(counts)

    ptr_row_bytes = _align((n + 1) * POINTER_BYTES)
    nbr_bytes = [_align(int(c) * VALUE_BYTES) for c in part_counts]
    regs, total = _place([
        ("values", n * VALUE_BYTES),
        ("pointers", k * ptr_row_bytes),
        ("edges", sum(nbr_bytes)),
    ])
    ptr_base = regs["pointers"].base + np.arange(k, dtype=np.int64) * ptr_row_bytes
    nbr_base = regs["edges"].base + np.concatenate(
        [[0], np.cumsum(nbr_bytes)])[:k].astype(np.int64)
    return CsrLayout(
        scheme="horizontal_csr", n=n, m=m, k=k, p=1, channels=1,
        interval_size=interval_size, edge_record_bytes=VALUE_BYTES,
        regions=[regs], total_bytes=[total],
        ptrs=ptrs, neighbors=neighbors, part_edge_start=part_edge_start,
        ptr_base=ptr_base, nbr_base=nbr_base)


# --------------------------------------------------------------------------
# Plain edge lists partitioned by source interval, round-robin per channel.

@dataclass
class EdgeListLayout(PartitionedLayout):
    src: np.ndarray = None             # edges grouped by partition
    dst: np.ndarray = None
    weights: np.ndarray = None
    part_edges: np.ndarray = None      # (k+1,) int64 edge slice bounds
    part_channel: np.ndarray = None    # (k,) int64
    value_base: np.ndarray = None      # (k,) int64 byte base of interval values
    edge_base: np.ndarray = None       # (k,) int64
    queue_base: np.ndarray = None      # (k,) int64 update queue base
    queue_capacity: np.ndarray = None  # (k,) int64 records
    dst_sorted: bool = False


def horizontal_edge_list(g, interval_size: int, p: int) -> EdgeListLayout:
    """Edge lists grouped by source interval; partition j lives on channel
    j mod p. Update queues are sized for their worst case: the number of
    edges whose destination falls in the queue's interval.
    """
    if p < 1 or interval_size < 1:
        raise ValueError("p and interval_size must be positive")
    n, m = g.n, g.m
    # round up so every channel owns the same number of partitions;
    # trailing partitions may be empty
    k = max(1, -(-n // interval_size))
    k = -(-k // p) * p

    part = (g.src // interval_size).astype(np.int64)
    order = np.lexsort((np.arange(m), part)) if m else np.arange(0)
    src = g.src[order].astype(np.uint32)
    dst = g.dst[order].astype(np.uint32)
    weights = g.weights[order].astype(np.uint32) if g.weighted else None
    counts = np.bincount(part[order], minlength=k).astype(np.int64)
    part_edges = np.concatenate([[0], np.cumsum(counts)])
    record = 12 if g.weighted else 8

    in_counts = np.bincount((g.dst // interval_size).astype(np.int64),
                            minlength=k).astype(np.int64)
    part_channel = np.arange(k, dtype=np.int64) % p

    regions, totals = [], []
    value_base = np.zeros(k, dtype=np.int64)
    edge_base = np.zeros(k, dtype=np.int64)
    queue_base = np.zeros(k, dtype=np.int64)
    for ch in range(p):
        mine = np.flatnonzero(part_channel == ch)
        val_sizes = []
        for j in mine:
            lo, hi = j * interval_size, min((j + 1) * interval_size, n)
            val_sizes.append(_align(max(0, hi - lo) * VALUE_BYTES))
        edge_sizes = [_align(int(counts[j]) * record) for j in mine]
        queue_sizes = [_align(int(in_counts[j]) * UPDATE_BYTES) for j in mine]
        regs, total = _place([
            ("values", sum(val_sizes)),
            ("edges", sum(edge_sizes)),
            ("updates", sum(queue_sizes)),
        ])
        off = regs["values"].base
        for j, sz in zip(mine, val_sizes):
            value_base[j] = off
            off += sz
        off = regs["edges"].base
        for j, sz in zip(mine, edge_sizes):
            edge_base[j] = off
            off += sz
        off = regs["updates"].base
        for j, sz in zip(mine, queue_sizes):
            queue_base[j] = off
            off += sz
        regions.append(regs)
        totals.append(total)

    return EdgeListLayout(
        scheme="horizontal_edge_list", n=n, m=m, k=k, p=p, channels=p,
        interval_size=interval_size, edge_record_bytes=record,
        regions=regions, total_bytes=totals,
        src=src, dst=dst, weights=weights, part_edges=part_edges,
        part_channel=part_channel, value_base=value_base,
        edge_base=edge_base, queue_base=queue_base,
        queue_capacity=in_counts)


def sort_by_destination(layout: EdgeListLayout) -> EdgeListLayout:
    """Stable-sort each partition's edges by destination vertex."""
    src = layout.src.copy()
    dst = layout.dst.copy()
    weights = layout.weights.copy() if layout.weights is not None else None
    for j in range(layout.k):
        lo, hi = layout.part_edges[j], layout.part_edges[j + 1]
        order = np.argsort(dst[lo:hi], kind="stable")
        src[lo:hi] = src[lo:hi][order]
        dst[lo:hi] = dst[lo:hi][order]
        if weights is not None:
            weights[lo:hi] = weights[lo:hi][order]
    out = EdgeListLayout(**{**layout.__dict__})
    out.src, out.dst, out.weights = src, dst, weights
    out.dst_sorted = True
    return out


# --------------------------------------------------------------------------
# Vertical edge lists: partitions by destination interval, p chunks each.

@dataclass
class VerticalLayout(PartitionedLayout):
    src: np.ndarray = None             # grouped by partition, sorted by src
    dst: np.ndarray = None
    weights: np.ndarray = None
    part_edges: np.ndarray = None      # (k+1,) int64
    chunk_bounds: np.ndarray = None    # (k, p+1) int64, within-partition
    chunk_channel: np.ndarray = None   # (k, p) int64
    chunk_base: np.ndarray = None      # (k, p) int64 byte base of each chunk
    scheduled: bool = False


def vertical_edge_list(g, interval_size: int, p: int) -> VerticalLayout:
    """Incoming edges per destination interval, sorted by source vertex and
    split into p equal chunks by position. Every channel stores the full
    value array plus an update block of the same size.
    """
    if p < 1 or interval_size < 1:
        raise ValueError("p and interval_size must be positive")
    n, m = g.n, g.m
    k = max(1, -(-n // interval_size))
    part = (g.dst // interval_size).astype(np.int64)
    order = np.lexsort((np.arange(m), g.src, part)) if m else np.arange(0)
    src = g.src[order].astype(np.uint32)
    dst = g.dst[order].astype(np.uint32)
    weights = g.weights[order].astype(np.uint32) if g.weighted else None
    counts = np.bincount(part[order], minlength=k).astype(np.int64)
    part_edges = np.concatenate([[0], np.cumsum(counts)])
    record = 12 if g.weighted else 8

    chunk_bounds = np.zeros((k, p + 1), dtype=np.int64)
    for q in range(k):
        total = int(counts[q])
        base_sz, extra = divmod(total, p)
        sizes = [base_sz + (1 if c < extra else 0) for c in range(p)]
        chunk_bounds[q, 1:] = np.cumsum(sizes)
    chunk_channel = np.tile(np.arange(p, dtype=np.int64), (k, 1))

    layout = VerticalLayout(
        scheme="vertical_edge_list", n=n, m=m, k=k, p=p, channels=p,
        interval_size=interval_size, edge_record_bytes=record,
        src=src, dst=dst, weights=weights, part_edges=part_edges,
        chunk_bounds=chunk_bounds, chunk_channel=chunk_channel)
    _place_vertical(layout)
    return layout


def _place_vertical(layout: VerticalLayout) -> None:
    n, k, p, record = layout.n, layout.k, layout.p, layout.edge_record_bytes
    layout.chunk_base = np.zeros((k, p), dtype=np.int64)
    regions, totals = [], []
    for ch in range(layout.channels):
        sizes = []
        members = []
        for q in range(k):
            for c in range(p):
                if layout.chunk_channel[q, c] == ch:
                    cnt = int(layout.chunk_bounds[q, c + 1] - layout.chunk_bounds[q, c])
                    sizes.append(_align(cnt * record))
                    members.append((q, c))
        regs, total = _place([
            ("values", n * VALUE_BYTES),
            ("edges", sum(sizes)),
            ("updates", n * VALUE_BYTES),
        ])
        off = regs["edges"].base
        for (q, c), sz in zip(members, sizes):
            layout.chunk_base[q, c] = off
            off += sz
        regions.append(regs)
        totals.append(total)
    layout.regions = regions
    layout.total_bytes = totals


def lpt_assign(costs: list[int], bins: int) -> list[int]:
    """Longest-processing-time greedy: place costs in descending order on
    the least loaded bin. Ties break toward the earlier item / lower bin."""
    order = sorted(range(len(costs)), key=lambda i: (-costs[i], i))
    loads = [0] * bins
    out = [0] * len(costs)
    for i in order:
        b = min(range(bins), key=lambda j: (loads[j], j))
        loads[b] += costs[i]
        out[i] = b
    return out


def schedule_chunks(layout: VerticalLayout) -> VerticalLayout:
    """Reassign chunks to channels by LPT on the predicted chunk cost:
    its edge count plus the interval vertex count (value traffic share).
    """
    k, p = layout.k, layout.p
    costs = []
    for q in range(k):
        lo, hi = layout.interval(q)
        for c in range(p):
            cnt = int(layout.chunk_bounds[q, c + 1] - layout.chunk_bounds[q, c])
            costs.append(cnt + (hi - lo))
    assignment = np.asarray(lpt_assign(costs, layout.channels),
                            dtype=np.int64).reshape(k, p)
    out = VerticalLayout(**{**layout.__dict__})
    out.chunk_channel = assignment
    out.scheduled = True
    _place_vertical(out)
    return out


# --------------------------------------------------------------------------
# Interval-shard grid with 4-byte compressed edges (two 16-bit local ids).

LOCAL_ID_BITS = 16
SHARD_RECORD_BYTES = 4


@dataclass
class ShardGroup:
    src_interval: int
    dst_intervals: list[int]
    shard_lens: list[int]        # real edges per member shard
    stored: int                  # records including null pads
    pads: int
    edge_base: int = 0
    # zipped record order: position t -> (member t % width, index t // width)


@dataclass
class ShardLayout(PartitionedLayout):
    src: np.ndarray = None             # grouped by (src interval, dst interval)
    dst: np.ndarray = None
    weights: np.ndarray = None
    shard_counts: np.ndarray = None    # (k, k) int64
    shard_edge_start: np.ndarray = None  # (k, k) int64 into src/dst
    groups: list[list[ShardGroup]] = None  # per source interval
    shuffled: bool = False
    stored_edges: int = 0              # records including pads


def interval_shard(g, interval_size: int = 65536, p: int = 1) -> ShardLayout:
    """k x k shard grid; shard (i, j) holds the edges from interval i to
    interval j as 4-byte records of two local ids. Unshuffled layouts have
    one group per shard with no padding.
    """
    if interval_size < 1 or interval_size > (1 << LOCAL_ID_BITS):
        raise ValueError(f"interval_size must be in [1, {1 << LOCAL_ID_BITS}]")
    if p < 1:
        raise ValueError("p must be positive")
    n, m = g.n, g.m
    k = max(1, -(-n // interval_size))
    si = (g.src // interval_size).astype(np.int64)
    dj = (g.dst // interval_size).astype(np.int64)
    key = si * k + dj
    order = np.lexsort((np.arange(m), key)) if m else np.arange(0)
    src = g.src[order].astype(np.uint32)
    dst = g.dst[order].astype(np.uint32)
    weights = g.weights[order].astype(np.uint32) if g.weighted else None
    counts = np.bincount(key[order], minlength=k * k).astype(np.int64).reshape(k, k)
    starts = np.concatenate([[0], np.cumsum(counts.ravel())])[:-1].reshape(k, k)

    layout = ShardLayout(
        scheme="interval_shard", n=n, m=m, k=k, p=p, channels=1,
        interval_size=interval_size, edge_record_bytes=SHARD_RECORD_BYTES,
        src=src, dst=dst, weights=weights,
        shard_counts=counts, shard_edge_start=starts)
    groups = []
    for i in range(k):
        row = [ShardGroup(src_interval=i, dst_intervals=[j],
                          shard_lens=[int(counts[i, j])],
                          stored=int(counts[i, j]), pads=0)
               for j in range(k)]
        groups.append(row)
    layout.groups = groups
    _place_shards(layout)
    return layout


def shuffle_edges(layout: ShardLayout, p: int | None = None) -> ShardLayout:
    """Zip runs of p destination shards sharing a source interval into one
    edge list, interleaved record by record; shorter members are padded
    with null records that are fetched but carry no edge.
    """
    if layout.shuffled:
        raise ValueError("layout is already shuffled")
    p = layout.p if p is None else p
    if p < 1:
        raise ValueError("p must be positive")
    k = layout.k
    groups = []
    for i in range(k):
        row = []
        for j0 in range(0, k, p):
            members = list(range(j0, min(j0 + p, k)))
            lens = [int(layout.shard_counts[i, j]) for j in members]
            width = len(members)
            stored = width * max(lens) if lens else 0
            row.append(ShardGroup(src_interval=i, dst_intervals=members,
                                  shard_lens=lens, stored=stored,
                                  pads=stored - sum(lens)))
        groups.append(row)
    out = ShardLayout(**{**layout.__dict__})
    out.groups = groups
    out.shuffled = True
    out.p = p
    _place_shards(out)
    return out


def _place_shards(layout: ShardLayout) -> None:
    sizes = []
    members = []
    for row in layout.groups:
        for grp in row:
            sizes.append(_align(grp.stored * SHARD_RECORD_BYTES))
            members.append(grp)
    regs, total = _place([
        ("values", layout.n * VALUE_BYTES),
        ("edges", sum(sizes)),
    ])
    off = regs["edges"].base
    for grp, sz in zip(members, sizes):
        grp.edge_base = off
        off += sz
    layout.regions = [regs]
    layout.total_bytes = [total]
    layout.stored_edges = sum(g.stored for g in members)


def pack_shard(layout: ShardLayout, i: int, j: int) -> np.ndarray:
    """Materialize shard (i, j) as little-endian pairs of 16-bit local ids
    (for dumps and tests; the simulator itself works from the id arrays)."""
    lo_i = i * layout.interval_size
    lo_j = j * layout.interval_size
    s = layout.shard_edge_start[i, j]
    c = layout.shard_counts[i, j]
    out = np.zeros((int(c), 2), dtype="<u2")
    out[:, 0] = layout.src[s:s + c] - lo_i
    out[:, 1] = layout.dst[s:s + c] - lo_j
    return out


# --------------------------------------------------------------------------
# Vertex-id transforms.

def stride_map(g, k: int):
    """Relabel vertex v to (v mod k) * ceil(n / k) + (v div k).

    Returns (relabeled graph, perm) with perm[old] = new. When k does not
    divide n the id space is padded with isolated vertices so every new id
    stays inside one block.
    """
    from .graphs import Graph

    if k < 1:
        raise ValueError("k must be positive")
    block = -(-g.n // k)
    n_new = k * block
    v = np.arange(g.n, dtype=np.uint64)
    perm = ((v % k) * block + v // k).astype(np.uint32)
    return Graph(name=f"{g.name}+stride{k}", n=n_new, m=g.m,
                 src=perm[g.src], dst=perm[g.dst], weights=g.weights,
                 directed=g.directed,
                 original_edge_count=g.original_edge_count), perm
