"""Vertex-value semantics for the supported graph problems.

Five problems share one update/apply shape: an edge turns a source value
into a candidate update, a reduction combines candidates per destination,
and apply folds the reduced candidate into the destination value. BFS, WCC,
and SSSP are min-reductions iterated to a fixed point; PR and SpMV are
sum-reductions that run exactly one iteration.

Min-problem values are 32-bit unsigned with UNREACHED as the sentinel and
saturating addition. Sum-problem arithmetic is done in float64; the memory
image of a value is 4 bytes either way.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNREACHED = 0xFFFFFFFF

MIN_PROBLEMS = ("bfs", "wcc", "sssp")
SUM_PROBLEMS = ("pr", "spmv")
PROBLEMS = MIN_PROBLEMS + SUM_PROBLEMS

SCHEMES = ("immediate_asc", "two_phase", "level_sync")


@dataclass(frozen=True)
class ProblemSpec:
    problem: str
    reduction: str              # "min" or "sum"
    weighted: bool
    fixed_iterations: int | None
    needs_root: bool
    uses_out_degree: bool
    damping: float = 0.85
    value_bytes: int = 4


def make_problem(problem: str, damping: float = 0.85) -> ProblemSpec:
    problem = problem.lower()
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if not (0.0 < damping < 1.0):
        raise ValueError("damping must be in (0, 1)")
    return ProblemSpec(
        problem=problem,
        reduction="min" if problem in MIN_PROBLEMS else "sum",
        weighted=problem in ("sssp", "spmv"),
        fixed_iterations=1 if problem in SUM_PROBLEMS else None,
        needs_root=problem in ("bfs", "sssp"),
        uses_out_degree=problem == "pr",
        damping=damping,
    )


def init_values(spec: ProblemSpec, n: int, root: int = 0) -> np.ndarray:
    """Initial vertex values; uint32 for min problems, float64 for sums."""
    if spec.needs_root and not (0 <= root < n):
        raise ValueError(f"root {root} out of range for n={n}")
    p = spec.problem
    if p in ("bfs", "sssp"):
        vals = np.full(n, UNREACHED, dtype=np.uint32)
        vals[root] = 0
        return vals
    if p == "wcc":
        return np.arange(n, dtype=np.uint32)
    if p == "pr":
        return np.full(n, 1.0 / n if n else 0.0, dtype=np.float64)
    return np.ones(n, dtype=np.float64)  # spmv


def initially_active(spec: ProblemSpec, n: int, root: int = 0) -> np.ndarray:
    """Vertices whose initial value has not yet been propagated anywhere."""
    if spec.problem in ("bfs", "sssp"):
        active = np.zeros(n, dtype=bool)
        active[root] = True
        return active
    return np.ones(n, dtype=bool)


def edge_update(spec: ProblemSpec, src_value, weight=None, src_out_degree=None):
    """Candidate update carried by one edge. Accepts scalars or arrays."""
    p = spec.problem
    if p == "bfs":
        v = np.asarray(src_value, dtype=np.uint64)
        return np.where(v == UNREACHED, UNREACHED, np.minimum(v + 1, UNREACHED)).astype(np.uint32)
    if p == "sssp":
        v = np.asarray(src_value, dtype=np.uint64)
        w = np.asarray(weight, dtype=np.uint64)
        return np.where(v == UNREACHED, UNREACHED, np.minimum(v + w, UNREACHED)).astype(np.uint32)
    if p == "wcc":
        return np.asarray(src_value, dtype=np.uint32)
    if p == "pr":
        deg = np.asarray(src_out_degree, dtype=np.float64)
        return np.asarray(src_value, dtype=np.float64) / deg
    # spmv
    return np.asarray(src_value, dtype=np.float64) * np.asarray(weight, dtype=np.float64)


def apply_update(spec: ProblemSpec, accumulated, old, n: int):
    """Fold the reduced candidate into the old value; returns (new, changed)."""
    if spec.reduction == "min":
        acc = np.asarray(accumulated, dtype=np.uint32)
        old_a = np.asarray(old, dtype=np.uint32)
        new = np.minimum(acc, old_a)
        return new, new < old_a
    if spec.problem == "pr":
        d = spec.damping
        new = (1.0 - d) / n + d * np.asarray(accumulated, dtype=np.float64)
        return new, np.ones_like(new, dtype=bool)
    new = np.asarray(accumulated, dtype=np.float64)
    return new, np.ones_like(new, dtype=bool)


def _in_csr(g):
    """Edges grouped by destination, stable in input order within a group."""
    order = np.argsort(g.dst, kind="stable")
    ptr = np.zeros(g.n + 1, dtype=np.int64)
    np.add.at(ptr, g.dst.astype(np.int64) + 1, 1)
    ptr = np.cumsum(ptr)
    srcs = g.src[order].astype(np.int64)
    wts = g.weights[order].astype(np.int64) if g.weighted else None
    return ptr, srcs, wts


def _sum_pass(spec: ProblemSpec, g, values: np.ndarray) -> np.ndarray:
    """One full sum-reduction pass from a value snapshot (order-free)."""
    acc = np.zeros(g.n, dtype=np.float64)
    if g.m:
        if spec.problem == "pr":
            deg = g.out_degrees().astype(np.float64)
            contrib = values[g.src] / deg[g.src]
        else:
            contrib = values[g.src] * g.weights.astype(np.float64)
        np.add.at(acc, g.dst.astype(np.int64), contrib)
    new, _ = apply_update(spec, acc, values, g.n)
    return new


def _min_update_scalar(spec: ProblemSpec, value: int, weight: int) -> int:
    if spec.problem == "wcc":
        return value
    if value == UNREACHED:
        return UNREACHED
    step = 1 if spec.problem == "bfs" else weight
    return min(value + step, UNREACHED)


def reference_run(spec: ProblemSpec, g, root: int = 0,
                  scheme: str = "two_phase") -> tuple[np.ndarray, int]:
    """Memory-free oracle. Returns (final values, iteration count).

    Min problems run until an iteration makes no change; that detecting
    iteration is included in the count. immediate_asc applies updates in
    ascending destination order with same-pass visibility, two_phase applies
    a whole pass from the pass-start snapshot, and level_sync restricts
    two_phase to edges out of last pass's changed vertices.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if spec.weighted and not g.weighted:
        raise ValueError(f"{spec.problem} requires edge weights")
    values = init_values(spec, g.n, root)
    if spec.fixed_iterations is not None:
        return _sum_pass(spec, g, values), spec.fixed_iterations

    if scheme == "immediate_asc":
        ptr, srcs, wts = _in_csr(g)
        vals = values.tolist()
        iterations = 0
        while True:
            iterations += 1
            changed = False
            for v in range(g.n):
                lo, hi = ptr[v], ptr[v + 1]
                if lo == hi:
                    continue
                best = vals[v]
                for e in range(lo, hi):
                    cand = _min_update_scalar(spec, vals[srcs[e]],
                                              wts[e] if wts is not None else 0)
                    if cand < best:
                        best = cand
                if best < vals[v]:
                    vals[v] = best
                    changed = True
            if not changed:
                break
        return np.asarray(vals, dtype=np.uint32), iterations

    src = g.src.astype(np.int64)
    dst = g.dst.astype(np.int64)
    active = initially_active(spec, g.n, root)
    iterations = 0
    while True:
        iterations += 1
        if scheme == "level_sync":
            mask = active[src]
            e_src, e_dst = src[mask], dst[mask]
            e_w = g.weights[mask] if g.weighted else None
        else:
            e_src, e_dst = src, dst
            e_w = g.weights
        acc = values.copy()
        if len(e_src):
            upd = edge_update(spec, values[e_src],
                              e_w if e_w is not None else None)
            np.minimum.at(acc, e_dst, upd)
        changed = acc < values
        values = acc
        active = changed
        if not changed.any():
            break
    return values, iterations
