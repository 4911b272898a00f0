"""Hand-built graphs and independent brute-force oracles shared by tests."""
from __future__ import annotations

import numpy as np

from gpasim.graphs import Graph
from gpasim.problems import UNREACHED


def make_graph(edges, n=None, weights=None, directed=True, name="hand"):
    src = np.asarray([e[0] for e in edges], dtype=np.uint32)
    dst = np.asarray([e[1] for e in edges], dtype=np.uint32)
    if n is None:
        n = int(max(src.max(initial=0), dst.max(initial=0))) + 1 if len(edges) else 1
    w = np.asarray(weights, dtype=np.uint32) if weights is not None else None
    original = len(edges)
    if not directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
        if w is not None:
            w = np.concatenate([w, w])
    return Graph(name=name, n=n, m=len(src), src=src, dst=dst, weights=w,
                 directed=directed, original_edge_count=original)


def path_graph(n, name=None):
    return make_graph([(i, i + 1) for i in range(n - 1)], n=n,
                      name=name or f"path{n}")


def star_out(leaves, name=None):
    """Center 0 with edges 0 -> 1..leaves."""
    return make_graph([(0, i) for i in range(1, leaves + 1)], n=leaves + 1,
                      name=name or f"starout{leaves}")


def star_in(leaves, name=None):
    """Leaves 1..leaves each with an edge into center 0."""
    return make_graph([(i, 0) for i in range(1, leaves + 1)], n=leaves + 1,
                      name=name or f"starin{leaves}")


def clique(n, name=None):
    edges = [(i, j) for i in range(n) for j in range(n) if i != j]
    return make_graph(edges, n=n, name=name or f"clique{n}")


def cycle_graph(n, name=None):
    return make_graph([(i, (i + 1) % n) for i in range(n)], n=n,
                      name=name or f"cycle{n}")


def binary_tree(n, name=None):
    edges = [(i, c) for i in range(n) for c in (2 * i + 1, 2 * i + 2)
             if c < n]
    return make_graph(edges, n=n, name=name or f"tree{n}")


def hand_corpus():
    """Small graphs with varied shape; (graph, root) pairs."""
    out = [
        (path_graph(4), 0),
        (path_graph(64), 0),
        (make_graph([(i + 1, i) for i in range(15)], n=16, name="revpath16"),
         15),
        (cycle_graph(12), 0),
        (star_out(8), 0),
        (star_in(63), 1),
        (clique(8), 0),
        (binary_tree(31), 0),
        (make_graph([(i, i + 1) for i in range(4)]
                    + [(i, i + 1) for i in range(6, 10)], n=11,
                    name="twocomp"), 0),
        # long-range cycle: every hop crosses a 16-vertex interval boundary
        (make_graph([(i, (i + 17) % 48) for i in range(48)], n=48,
                    name="skipcycle"), 0),
        (make_graph([(u, 4 + v) for u in range(4) for v in range(4)]
                    + [(4 + v, u) for u in range(2) for v in range(4)],
                    n=8, name="bipartite"), 0),
        (make_graph([(0, 1), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2),
                     (2, 3), (3, 3)], n=4, name="multi"), 0),
        (make_graph([(i, j) for i in range(5) for j in range(5) if i != j]
                    + [(4, 5), (5, 6), (6, 7), (7, 8)], n=9,
                    name="lollipop"), 0),
        (make_graph([(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 1)],
                    n=5, name="diamond"), 0),
    ]
    return out


def bfs_depths(g, root):
    """Plain queue BFS over the stored directed edges."""
    adj = [[] for _ in range(g.n)]
    for u, v in zip(g.src.tolist(), g.dst.tolist()):
        adj[u].append(v)
    dist = [UNREACHED] * g.n
    dist[root] = 0
    frontier = [root]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if dist[v] == UNREACHED:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return np.asarray(dist, dtype=np.uint32)


def dijkstra(g, root):
    import heapq
    adj = [[] for _ in range(g.n)]
    for u, v, w in zip(g.src.tolist(), g.dst.tolist(), g.weights.tolist()):
        adj[u].append((v, w))
    dist = [UNREACHED] * g.n
    dist[root] = 0
    heap = [(0, root)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = min(d + w, UNREACHED)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return np.asarray(dist, dtype=np.uint32)


def wcc_labels_directed_fixpoint(g):
    """Min-label fixed point propagated along stored edge direction."""
    labels = list(range(g.n))
    changed = True
    while changed:
        changed = False
        for u, v in zip(g.src.tolist(), g.dst.tolist()):
            if labels[u] < labels[v]:
                labels[v] = labels[u]
                changed = True
    return np.asarray(labels, dtype=np.uint32)


def dense_pr_once(g, damping=0.85):
    """One PR iteration as a dense matrix-vector product, float64."""
    n = g.n
    x = np.full(n, 1.0 / n)
    a = np.zeros((n, n))
    deg = np.bincount(g.src, minlength=n)
    for u, v in zip(g.src.tolist(), g.dst.tolist()):
        a[v, u] += 1.0 / deg[u]
    return (1.0 - damping) / n + damping * (a @ x)


def dense_spmv_once(g):
    """result[v] = sum over edges (u, v) of w * x[u], x = ones."""
    n = g.n
    x = np.ones(n)
    a = np.zeros((n, n))
    for u, v, w in zip(g.src.tolist(), g.dst.tolist(), g.weights.tolist()):
        a[v, u] += float(w)
    return a @ x
