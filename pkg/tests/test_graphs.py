import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpasim import graphs
from gpasim.graphs import (GraphFormatError, attach_random_weights,
                           default_root, degree_stats, generate_rmat,
                           load_binary, load_edge_list, save_binary)
from helpers import make_graph, star_out


def write(tmp_path, text, name="g.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_single_edge(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n"))
    assert (g.n, g.m) == (2, 1)
    assert g.src.tolist() == [0] and g.dst.tolist() == [1]
    assert g.original_edge_count == 1


def test_comments_and_blank_lines_skipped(tmp_path):
    g = load_edge_list(write(tmp_path, "# header\n\n0 1\n# trailing\n1 2\n"))
    assert g.m == 2


def test_dense_relabel_first_appearance(tmp_path):
    g = load_edge_list(write(tmp_path, "5 9\n9 5\n"))
    assert g.n == 2
    assert g.src.tolist() == [0, 1]
    assert g.dst.tolist() == [1, 0]


def test_undirected_stores_both_directions(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1\n"), directed=False)
    assert g.m == 2
    assert g.original_edge_count == 1
    pairs = set(zip(g.src.tolist(), g.dst.tolist()))
    assert pairs == {(0, 1), (1, 0)}


def test_weighted_parse(tmp_path):
    g = load_edge_list(write(tmp_path, "0 1 7\n1 2 3\n"), weighted=True)
    assert g.weights.tolist() == [7, 3]


def test_malformed_line_reports_lineno(tmp_path):
    p = write(tmp_path, "0 1\nbroken\n")
    with pytest.raises(GraphFormatError, match=":2"):
        load_edge_list(p)


def test_missing_weight_column_reports_lineno(tmp_path):
    p = write(tmp_path, "0 1 4\n1 2\n")
    with pytest.raises(GraphFormatError, match=":2"):
        load_edge_list(p, weighted=True)


def test_empty_file_rejected(tmp_path):
    with pytest.raises(GraphFormatError, match="no edges"):
        load_edge_list(write(tmp_path, "# nothing\n"))


def test_rmat_shape_and_determinism():
    g1 = generate_rmat(scale=8, avg_degree=4, seed=11)
    g2 = generate_rmat(scale=8, avg_degree=4, seed=11)
    g3 = generate_rmat(scale=8, avg_degree=4, seed=12)
    assert g1.n == 256 and g1.m == 1024
    assert np.array_equal(g1.src, g2.src) and np.array_equal(g1.dst, g2.dst)
    assert not (np.array_equal(g1.src, g3.src) and np.array_equal(g1.dst, g3.dst))
    assert int(g1.src.max()) < g1.n and int(g1.dst.max()) < g1.n


def test_rmat_is_skewed():
    g = generate_rmat(scale=10, avg_degree=16, seed=3)
    s = degree_stats(g)
    assert s.skewness > 1.0
    assert not s.skew_degenerate


def test_star_skewness_matches_moment_formula():
    # Independent oracle: direct evaluation of E[((D-mu)/sigma)^3] by hand.
    g = star_out(8)
    deg = np.array([8] + [0] * 8, dtype=float)
    mu = deg.mean()
    sigma = deg.std()
    expected = float(np.mean(((deg - mu) / sigma) ** 3))
    s = degree_stats(g)
    assert s.avg_degree == pytest.approx(8 / 9)
    assert s.skewness == pytest.approx(expected)
    assert expected > 2.0  # heavily skewed by construction


def test_uniform_degrees_flagged_degenerate():
    g = make_graph([(i, (i + 1) % 4) for i in range(4)], n=4)
    s = degree_stats(g)
    assert s.skew_degenerate
    assert s.skewness == 0.0


def test_degree_histogram():
    s = degree_stats(star_out(3))
    assert s.degree_histogram == {0: 3, 3: 1}


def test_diameter_estimate_path():
    from helpers import path_graph
    s = degree_stats(path_graph(6), estimate_diameter=True)
    assert s.diameter_estimate == 5


def test_binary_round_trip(tmp_path):
    g = generate_rmat(scale=6, avg_degree=4, seed=2, weighted=True)
    path = tmp_path / "g.bin"
    save_binary(g, path)
    h = load_binary(path)
    assert (h.n, h.m, h.directed, h.original_edge_count) == (g.n, g.m, g.directed, g.original_edge_count)
    assert h.name == g.name
    assert np.array_equal(h.src, g.src)
    assert np.array_equal(h.dst, g.dst)
    assert np.array_equal(h.weights, g.weights)


def test_binary_rejects_bad_magic(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(GraphFormatError, match="magic"):
        load_binary(p)


def test_default_root_table():
    g = make_graph([(0, 1)], n=40000, name="sd")
    assert default_root(g) == 30279
    g2 = make_graph([(0, 1)], n=8, name="sd")
    assert default_root(g2) == 0  # table root out of range for this size
    g3 = make_graph([(0, 1)], n=8, name="unknown")
    assert default_root(g3) == 0


def test_default_root_stem_alias():
    g = make_graph([(0, 1)], n=200000, name="soc-Slashdot0902.txt")
    assert default_root(g) == 30279


def test_attach_random_weights_deterministic():
    g = generate_rmat(scale=5, avg_degree=2, seed=4)
    w1 = attach_random_weights(g, seed=9)
    w2 = attach_random_weights(g, seed=9)
    assert np.array_equal(w1.weights, w2.weights)
    assert w1.weights.min() >= 1 and w1.weights.max() <= 255


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)),
                min_size=1, max_size=60))
def test_edge_list_round_trip_property(tmp_path_factory, edges):
    tmp = tmp_path_factory.mktemp("rt")
    text = "".join(f"{u} {v}\n" for u, v in edges)
    g = load_edge_list(write(tmp, text))
    assert g.m == len(edges)
    assert g.n == len({x for e in edges for x in e})
    # round-trip through the binary cache preserves everything
    save_binary(g, tmp / "g.bin")
    h = load_binary(tmp / "g.bin")
    assert np.array_equal(h.src, g.src) and np.array_equal(h.dst, g.dst)
