#!/usr/bin/env python3
"""Run the four-accelerator comparison matrix and summarize it.

Covers all four accelerators on BFS, PR, and WCC over the downloaded
benchmark graphs (plus any extra graph specs given on the command line) at
single-channel DDR4 with all optimizations enabled, each accelerator using
its own default partitioning. Produces a CSV of metric rows and an aligned
plain-text summary. The sweep is resumable; rerun after an interruption and
finished rows are kept.

Fetch the benchmark graphs first:  python3 scripts/fetch_graphs.py
"""
import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gpasim.cli import main as cli_main  # noqa: E402

CODES = ("sd", "db", "yt", "wt")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", default=os.path.join(
        os.path.dirname(__file__), "..", "data"))
    parser.add_argument("--out-dir", default=os.path.join(
        os.path.dirname(__file__), "..", "results"))
    parser.add_argument("--graphs", nargs="*", default=[],
                        help="extra graph specs (paths or rmat:scale:deg:seed)")
    parser.add_argument("--problems", nargs="*", default=["bfs", "pr", "wcc"])
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    graphs = []
    for code in CODES:
        path = os.path.join(args.data_dir, f"{code}.bin")
        if os.path.exists(path):
            graphs.append(os.path.abspath(path))
        else:
            print(f"note: {path} missing, run scripts/fetch_graphs.py "
                  f"to include {code}", file=sys.stderr)
    graphs += args.graphs
    if not graphs:
        print("error: no graphs available", file=sys.stderr)
        return 2

    os.makedirs(args.out_dir, exist_ok=True)
    cfg_path = os.path.join(args.out_dir, "comparison.cfg")
    with open(cfg_path, "w") as fh:
        fh.write("# generated by run_comparison.py\n")
        fh.write("accelerators = accugraph foregraph hitgraph thundergp\n")
        fh.write(f"problems = {' '.join(args.problems)}\n")
        fh.write(f"graphs = {' '.join(graphs)}\n")
        fh.write("dram = ddr4\nchannels = 1\noptimizations = all\n")
        fh.write("out = comparison.csv\nsummary = comparison_summary.txt\n")

    if args.workers:
        os.environ["GPASIM_WORKERS"] = str(args.workers)
    code = cli_main(["sweep", cfg_path])
    if code == 0:
        print(f"results: {os.path.join(args.out_dir, 'comparison.csv')}")
        print(f"summary: {os.path.join(args.out_dir, 'comparison_summary.txt')}")
    return code


if __name__ == "__main__":
    sys.exit(main())
