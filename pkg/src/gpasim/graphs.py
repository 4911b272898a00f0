"""Graph loading, generation, and degree statistics.

Graphs are directed edge arrays with dense 32-bit vertex ids. Undirected
inputs are stored with both directions materialized; `original_edge_count`
always refers to the input edge count, which is what throughput metrics
are normalized by.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

# Sentinel ids never appear in a valid graph (ids are dense in [0, n)).
BINARY_MAGIC = b"GEDG"
BINARY_VERSION = 1

# Per-graph traversal roots used by the comparison experiments. Keyed by the
# short graph code; loaders derive the code from common file-name stems.
DEFAULT_ROOTS = {
    "tw": 2748769,
    "lj": 772860,
    "or": 1386825,
    "wt": 17540,
    "pk": 315318,
    "yt": 140289,
    "db": 9799,
    "sd": 30279,
    "rd": 1166467,
    "bk": 546279,
    "r24": 535262,
    "r21": 74764,
}

# File-name stems (lowercased, extension stripped) mapped to short codes.
STEM_ALIASES = {
    "twitter-2010": "tw",
    "soc-livejournal1": "lj",
    "com-orkut": "or",
    "wiki-talk": "wt",
    "soc-pokec-relationships": "pk",
    "com-youtube": "yt",
    "com-dblp": "db",
    "soc-slashdot0902": "sd",
    "roadnet-ca": "rd",
    "com-lj": "bk",
}


class GraphFormatError(ValueError):
    """Raised for malformed edge-list or binary graph files."""


@dataclass(eq=False)
class Graph:
    """Directed multigraph as parallel src/dst arrays (uint32)."""

    name: str
    n: int
    m: int
    src: np.ndarray
    dst: np.ndarray
    weights: np.ndarray | None
    directed: bool
    original_edge_count: int

    def __post_init__(self):
        if self.m != len(self.src) or self.m != len(self.dst):
            raise ValueError("edge array lengths disagree with m")
        if self.weights is not None and len(self.weights) != self.m:
            raise ValueError("weight array length disagrees with m")
        if self.m and (int(self.src.max()) >= self.n or int(self.dst.max()) >= self.n):
            raise ValueError("vertex id out of range")

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n).astype(np.int64)

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n).astype(np.int64)


@dataclass
class GraphStats:
    n: int
    m: int
    avg_degree: float
    skewness: float
    skew_degenerate: bool
    degree_histogram: dict[int, int] = field(default_factory=dict)
    diameter_estimate: int | None = None


def short_code(name: str) -> str:
    stem = name.lower()
    for ext in (".gz", ".txt", ".tsv", ".el", ".bin"):
        if stem.endswith(ext):
            stem = stem[: -len(ext)]
    return STEM_ALIASES.get(stem, stem)


def default_root(g: Graph) -> int:
    root = DEFAULT_ROOTS.get(short_code(g.name), 0)
    if root >= g.n:
        return 0
    return root


def load_edge_list(path, weighted: bool = False, directed: bool = True,
                   name: str | None = None) -> Graph:
    """Parse a whitespace-separated edge list ('#' starts a comment line).

    Vertex ids are re-labeled densely in order of first appearance. With
    directed=False every input edge is stored in both directions.
    """
    srcs: list[int] = []
    dsts: list[int] = []
    wts: list[int] = []
    ids: dict[int, int] = {}
    next_id = 0
    want = 3 if weighted else 2
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < want:
                raise GraphFormatError(
                    f"{path}:{lineno}: expected {want} fields, got {len(parts)}")
            try:
                u = int(parts[0])
                v = int(parts[1])
                w = int(parts[2]) if weighted else 0
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            su = ids.get(u)
            if su is None:
                su = ids[u] = next_id
                next_id += 1
            sv = ids.get(v)
            if sv is None:
                sv = ids[v] = next_id
                next_id += 1
            srcs.append(su)
            dsts.append(sv)
            if weighted:
                wts.append(w)
    if not srcs:
        raise GraphFormatError(f"{path}: no edges")
    src = np.asarray(srcs, dtype=np.uint32)
    dst = np.asarray(dsts, dtype=np.uint32)
    w_arr = np.asarray(wts, dtype=np.uint32) if weighted else None
    original = len(src)
    if not directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        if w_arr is not None:
            w_arr = np.concatenate([w_arr, w_arr])
    if name is None:
        name = str(path).rsplit("/", 1)[-1]
    return Graph(name=name, n=next_id, m=len(src), src=src, dst=dst,
                 weights=w_arr, directed=directed, original_edge_count=original)


def save_binary(g: Graph, path) -> None:
    """Write the compact binary cache: fixed-width little-endian records."""
    flags = (1 if g.directed else 0) | (2 if g.weighted else 0)
    name_bytes = g.name.encode("utf-8")
    header = struct.pack("<4sHHQQQQ", BINARY_MAGIC, BINARY_VERSION, flags,
                         g.n, g.m, g.original_edge_count, len(name_bytes))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(name_bytes)
        fh.write(np.ascontiguousarray(g.src, dtype="<u4").tobytes())
        fh.write(np.ascontiguousarray(g.dst, dtype="<u4").tobytes())
        if g.weighted:
            fh.write(np.ascontiguousarray(g.weights, dtype="<u4").tobytes())


def load_binary(path) -> Graph:
    with open(path, "rb") as fh:
        header = fh.read(struct.calcsize("<4sHHQQQQ"))
        if len(header) < struct.calcsize("<4sHHQQQQ"):
            raise GraphFormatError(f"{path}: truncated header")
        magic, version, flags, n, m, original, name_len = struct.unpack(
            "<4sHHQQQQ", header)
        if magic != BINARY_MAGIC:
            raise GraphFormatError(f"{path}: bad magic {magic!r}")
        if version != BINARY_VERSION:
            raise GraphFormatError(f"{path}: unsupported version {version}")
        name = fh.read(name_len).decode("utf-8")
        directed = bool(flags & 1)
        weighted = bool(flags & 2)
        src = np.frombuffer(fh.read(4 * m), dtype="<u4").astype(np.uint32)
        dst = np.frombuffer(fh.read(4 * m), dtype="<u4").astype(np.uint32)
        if len(src) != m or len(dst) != m:
            raise GraphFormatError(f"{path}: truncated edge arrays")
        weights = None
        if weighted:
            weights = np.frombuffer(fh.read(4 * m), dtype="<u4").astype(np.uint32)
            if len(weights) != m:
                raise GraphFormatError(f"{path}: truncated weight array")
    return Graph(name=name, n=n, m=m, src=src, dst=dst, weights=weights,
                 directed=directed, original_edge_count=original)


def generate_rmat(scale: int, avg_degree: int, seed: int,
                  weighted: bool = False, name: str | None = None) -> Graph:
    """Recursive-matrix generator with the Graph500 quadrant probabilities.

    n = 2**scale vertices, m = n * avg_degree directed edges. Self loops and
    duplicate edges are kept, as the reference generator does.
    """
    if scale < 1 or avg_degree < 1:
        raise ValueError("scale and avg_degree must be positive")
    a, b, c = 0.57, 0.19, 0.19  # d = 0.05
    n = 1 << scale
    m = n * avg_degree
    rng = np.random.default_rng(seed)
    src = np.zeros(m, dtype=np.uint64)
    dst = np.zeros(m, dtype=np.uint64)
    p_src = c + (1.0 - a - b - c)        # P(src bit = 1)
    p_dst_given0 = b / (a + b)           # P(dst bit = 1 | src bit = 0)
    p_dst_given1 = (1.0 - a - b - c) / p_src
    for _ in range(scale):
        u = rng.random(m)
        v = rng.random(m)
        sbit = u < p_src
        dbit = np.where(sbit, v < p_dst_given1, v < p_dst_given0)
        src = (src << 1) | sbit
        dst = (dst << 1) | dbit
    weights = None
    if weighted:
        weights = rng.integers(1, 256, size=m, dtype=np.uint32)
    if name is None:
        name = f"rmat{scale}x{avg_degree}s{seed}"
    return Graph(name=name, n=n, m=m, src=src.astype(np.uint32),
                 dst=dst.astype(np.uint32), weights=weights, directed=True,
                 original_edge_count=m)


def attach_random_weights(g: Graph, seed: int = 1) -> Graph:
    """Deterministic uniform integer weights in [1, 255] for weighted runs."""
    if g.weighted:
        return g
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, 256, size=g.m, dtype=np.uint32)
    return Graph(name=g.name, n=g.n, m=g.m, src=g.src, dst=g.dst,
                 weights=weights, directed=g.directed,
                 original_edge_count=g.original_edge_count)


def degree_stats(g: Graph, estimate_diameter: bool = False) -> GraphStats:
    """Average degree and the moment coefficient of skewness of out-degrees.

    Skewness is E[((D - mean) / std)^3] over all n vertices. A graph with
    zero degree variance has no defined skewness; it is reported as 0.0 with
    skew_degenerate set.
    """
    deg = g.out_degrees()
    mean = float(deg.mean()) if g.n else 0.0
    std = float(deg.std()) if g.n else 0.0
    if std == 0.0:
        skew, degenerate = 0.0, True
    else:
        z = (deg - mean) / std
        skew, degenerate = float(np.mean(z ** 3)), False
    values, counts = np.unique(deg, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(values, counts)}
    diam = _estimate_diameter(g) if estimate_diameter else None
    return GraphStats(n=g.n, m=g.m, avg_degree=mean, skewness=skew,
                      skew_degenerate=degenerate, degree_histogram=hist,
                      diameter_estimate=diam)


def _estimate_diameter(g: Graph) -> int:
    """Double-sweep lower bound on the directed diameter (0 if edgeless)."""
    if g.m == 0:
        return 0

    def csr(src, dst):
        order = np.argsort(src, kind="stable")
        ptr = np.zeros(g.n + 1, dtype=np.int64)
        np.add.at(ptr, src.astype(np.int64) + 1, 1)
        return np.cumsum(ptr), dst[order]

    fwd = csr(g.src, g.dst)
    bwd = csr(g.dst, g.src)

    def bfs_far(start: int, adj) -> tuple[int, int]:
        ptr, nbrs = adj
        dist = np.full(g.n, -1, dtype=np.int64)
        dist[start] = 0
        frontier = [start]
        depth = 0
        far = start
        while frontier:
            nxt = []
            depth += 1
            for u in frontier:
                for v in nbrs[ptr[u]:ptr[u + 1]]:
                    if dist[v] < 0:
                        dist[v] = depth
                        far = int(v)
                        nxt.append(int(v))
            frontier = nxt
        return far, int(dist.max())

    start = int(g.src[0])
    far, d1 = bfs_far(start, fwd)
    _, d2 = bfs_far(far, bwd)
    return max(d1, d2)
