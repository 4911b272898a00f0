"""Memory-request simulator for FPGA graph-processing accelerators.

Four accelerator models (accugraph, foregraph, hitgraph, thundergp) turn a
graph workload into the off-chip request stream the real design would emit,
and a cycle-accurate DRAM timing model (DDR3/DDR4/HBM, multi-channel)
schedules that stream to produce runtimes, row-buffer behavior, and traffic
metrics that are comparable across designs.

Typical use:

    from gpasim import AccelConfig, run, compute_metrics, generate_rmat
    g = generate_rmat(14, 8, seed=1)
    res = run(g, AccelConfig(which="hitgraph", problem="bfs", channels=4))
    print(compute_metrics(res, g))
"""
from .accel import (ACCEL_FLAGS, ACCEL_PROBLEMS, ACCELERATORS, AccelConfig,
                    ResolvedConfig, RunResult, run)
from .dram import (BUILTIN_CONFIGS, DramConfig, DramModel, load_dram_config)
from .graphs import (Graph, attach_random_weights, default_root,
                     degree_stats, generate_rmat, load_binary,
                     load_edge_list, save_binary)
from .metrics import (MetricRow, compute_metrics, dump_trace, load_trace,
                      metrics_from_trace, read_csv, replay_trace,
                      trace_counters, write_csv, write_summary)
from .problems import PROBLEMS, UNREACHED, make_problem, reference_run

__all__ = [
    "ACCELERATORS", "ACCEL_PROBLEMS", "ACCEL_FLAGS", "AccelConfig",
    "ResolvedConfig", "RunResult", "run",
    "BUILTIN_CONFIGS", "DramConfig", "DramModel", "load_dram_config",
    "Graph", "attach_random_weights", "default_root", "degree_stats",
    "generate_rmat", "load_binary", "load_edge_list", "save_binary",
    "MetricRow", "compute_metrics", "dump_trace", "load_trace",
    "metrics_from_trace", "read_csv", "replay_trace", "trace_counters",
    "write_csv", "write_summary",
    "PROBLEMS", "UNREACHED", "make_problem", "reference_run",
]
