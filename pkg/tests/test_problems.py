import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpasim.problems import (SCHEMES, UNREACHED, apply_update, edge_update,
                             init_values, make_problem, reference_run)
from helpers import (bfs_depths, clique, dense_pr_once, dense_spmv_once,
                     dijkstra, make_graph, path_graph, star_in, star_out,
                     wcc_labels_directed_fixpoint)


def test_bfs_init():
    spec = make_problem("bfs")
    v = init_values(spec, 4, root=2)
    assert v.tolist() == [UNREACHED, UNREACHED, 0, UNREACHED]


def test_wcc_init_is_identity():
    v = init_values(make_problem("wcc"), 5)
    assert v.tolist() == [0, 1, 2, 3, 4]


def test_pr_init_uniform():
    v = init_values(make_problem("pr"), 4)
    assert np.allclose(v, 0.25)


def test_root_out_of_range():
    with pytest.raises(ValueError, match="root"):
        init_values(make_problem("bfs"), 4, root=4)


def test_bfs_update_saturates_at_sentinel():
    spec = make_problem("bfs")
    assert int(edge_update(spec, UNREACHED)) == UNREACHED
    assert int(edge_update(spec, 3)) == 4
    assert int(edge_update(spec, UNREACHED - 1)) == UNREACHED


def test_sssp_update_saturating_add():
    spec = make_problem("sssp")
    assert int(edge_update(spec, 10, weight=5)) == 15
    assert int(edge_update(spec, UNREACHED, weight=5)) == UNREACHED
    assert int(edge_update(spec, UNREACHED - 2, weight=100)) == UNREACHED


def test_pr_apply_hand_value():
    # (1 - 0.85) / 4 + 0.85 * 0.25 = 0.0375 + 0.2125 = 0.25
    spec = make_problem("pr")
    new, changed = apply_update(spec, 0.25, 0.25, n=4)
    assert float(new) == pytest.approx(0.25)
    assert bool(changed)


def test_min_apply_reports_change():
    spec = make_problem("bfs")
    new, changed = apply_update(spec, 3, 7, n=8)
    assert int(new) == 3 and bool(changed)
    new, changed = apply_update(spec, 9, 7, n=8)
    assert int(new) == 7 and not bool(changed)


def test_bfs_path_immediate_vs_two_phase():
    g = path_graph(4)
    spec = make_problem("bfs")
    vals, iters = reference_run(spec, g, root=0, scheme="immediate_asc")
    assert vals.tolist() == [0, 1, 2, 3]
    assert iters == 2
    vals2, iters2 = reference_run(spec, g, root=0, scheme="two_phase")
    assert vals2.tolist() == [0, 1, 2, 3]
    assert iters2 == 4


def test_bfs_64_path_pass_counts():
    g = path_graph(64)
    spec = make_problem("bfs")
    _, immediate = reference_run(spec, g, root=0, scheme="immediate_asc")
    _, two_phase = reference_run(spec, g, root=0, scheme="two_phase")
    _, level = reference_run(spec, g, root=0, scheme="level_sync")
    assert immediate == 2
    assert two_phase == 64
    assert level == 64


def test_wcc_two_disjoint_cliques():
    g = make_graph([(0, 1), (1, 0), (2, 3), (3, 2)], n=4)
    spec = make_problem("wcc")
    for scheme in SCHEMES:
        vals, _ = reference_run(spec, g, scheme=scheme)
        assert vals.tolist() == [0, 0, 2, 2]


def test_pr_single_iteration_and_star_value():
    g = star_out(4)
    spec = make_problem("pr")
    vals, iters = reference_run(spec, g, scheme="two_phase")
    assert iters == 1
    assert np.allclose(vals, dense_pr_once(g), rtol=1e-12)


def test_spmv_matches_dense_product():
    g = make_graph([(0, 1), (1, 2), (0, 2)], n=3, weights=[2, 3, 5])
    spec = make_problem("spmv")
    vals, iters = reference_run(spec, g)
    assert iters == 1
    assert np.allclose(vals, dense_spmv_once(g), rtol=1e-12)


def test_spmv_requires_weights():
    with pytest.raises(ValueError, match="weights"):
        reference_run(make_problem("spmv"), path_graph(3))


def test_bfs_matches_plain_bfs_on_star_and_clique():
    spec = make_problem("bfs")
    for g in (star_out(8), star_in(8), clique(5)):
        for scheme in SCHEMES:
            vals, _ = reference_run(spec, g, root=0, scheme=scheme)
            assert np.array_equal(vals, bfs_depths(g, 0)), (g.name, scheme)


def test_sssp_matches_dijkstra():
    g = make_graph([(0, 1), (1, 2), (0, 2), (2, 3)], n=4, weights=[2, 2, 10, 1])
    spec = make_problem("sssp")
    expected = dijkstra(g, 0)
    for scheme in SCHEMES:
        vals, _ = reference_run(spec, g, root=0, scheme=scheme)
        assert np.array_equal(vals, expected), scheme
    assert vals.tolist() == [0, 2, 4, 5]


def test_unknown_problem_and_scheme():
    with pytest.raises(ValueError):
        make_problem("pagerank2")
    with pytest.raises(ValueError):
        reference_run(make_problem("bfs"), path_graph(2), scheme="chaotic")


def digraphs(max_n=10, max_m=24):
    return st.integers(2, max_n).flatmap(
        lambda n: st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
            min_size=1, max_size=max_m,
        ).map(lambda edges: make_graph(edges, n=n)))


@settings(max_examples=60, deadline=None)
@given(digraphs(), st.sampled_from(["bfs", "wcc"]))
def test_schemes_agree_property(g, problem):
    spec = make_problem(problem)
    results = [reference_run(spec, g, root=0, scheme=s)[0] for s in SCHEMES]
    assert np.array_equal(results[0], results[1])
    assert np.array_equal(results[1], results[2])


@settings(max_examples=40, deadline=None)
@given(digraphs())
def test_immediate_converges_no_slower_property(g):
    spec = make_problem("wcc")
    _, it_imm = reference_run(spec, g, scheme="immediate_asc")
    _, it_two = reference_run(spec, g, scheme="two_phase")
    assert it_imm <= it_two


@settings(max_examples=30, deadline=None)
@given(digraphs(max_n=8, max_m=16))
def test_wcc_matches_directed_fixpoint_property(g):
    vals, _ = reference_run(make_problem("wcc"), g, scheme="two_phase")
    assert np.array_equal(vals, wcc_labels_directed_fixpoint(g))
