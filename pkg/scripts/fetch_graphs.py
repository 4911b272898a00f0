#!/usr/bin/env python3
"""Download the four smallest benchmark graphs and build binary caches.

Each graph is fetched from SNAP, decompressed, parsed with the right
directedness, and saved as data/<code>.bin. The caches carry the short code
as the graph name, so the per-graph default roots apply automatically.
Already-present caches are skipped; pass --force to rebuild.

Undirected graphs are stored with both edge directions but keep their
published (undirected) edge count as the original count, which is what
traversal rates are normalized by.
"""
import argparse
import gzip
import os
import shutil
import sys
import urllib.request

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gpasim.graphs import load_edge_list, save_binary  # noqa: E402

GRAPHS = {
    # code: (url, directed)
    "sd": ("https://snap.stanford.edu/data/soc-Slashdot0902.txt.gz", True),
    "db": ("https://snap.stanford.edu/data/bigdata/communities/"
           "com-dblp.ungraph.txt.gz", False),
    "yt": ("https://snap.stanford.edu/data/bigdata/communities/"
           "com-youtube.ungraph.txt.gz", False),
    "wt": ("https://snap.stanford.edu/data/wiki-Talk.txt.gz", True),
}


def fetch(code: str, url: str, directed: bool, data_dir: str,
          force: bool) -> str:
    cache = os.path.join(data_dir, f"{code}.bin")
    if os.path.exists(cache) and not force:
        print(f"{code}: {cache} already present")
        return cache
    gz_path = os.path.join(data_dir, os.path.basename(url))
    txt_path = gz_path[:-3]
    if not os.path.exists(txt_path):
        if not os.path.exists(gz_path):
            print(f"{code}: downloading {url}")
            urllib.request.urlretrieve(url, gz_path)
        print(f"{code}: decompressing {os.path.basename(gz_path)}")
        with gzip.open(gz_path, "rb") as src, open(txt_path, "wb") as dst:
            shutil.copyfileobj(src, dst)
        os.remove(gz_path)
    print(f"{code}: parsing ({'directed' if directed else 'undirected'})")
    g = load_edge_list(txt_path, directed=directed, name=code)
    save_binary(g, cache)
    os.remove(txt_path)
    print(f"{code}: n={g.n} m={g.m} original_edges={g.original_edge_count} "
          f"-> {cache}")
    return cache


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", default=os.path.join(
        os.path.dirname(__file__), "..", "data"))
    parser.add_argument("--force", action="store_true")
    parser.add_argument("codes", nargs="*", default=list(GRAPHS),
                        help=f"graphs to fetch (default: {' '.join(GRAPHS)})")
    args = parser.parse_args()
    os.makedirs(args.data_dir, exist_ok=True)
    for code in args.codes or list(GRAPHS):
        if code not in GRAPHS:
            parser.error(f"unknown graph {code!r} "
                         f"(known: {', '.join(GRAPHS)})")
        url, directed = GRAPHS[code]
        fetch(code, url, directed, args.data_dir, args.force)
    return 0


if __name__ == "__main__":
    sys.exit(main())
