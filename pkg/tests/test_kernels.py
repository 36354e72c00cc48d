import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphbench.graph import CsrGraph, EdgeList, GraphInputError, build_csr
from graphbench.kernels import (
    KERNEL_NAMES,
    KernelParams,
    KernelResult,
    bc,
    core_decomposition,
    kclique_count,
    lpa,
    pagerank,
    run_kernel,
    sssp,
    triangle_count,
    wcc,
)

from . import oracles


def graph(n, pairs, weights=None):
    return build_csr(EdgeList.from_pairs(n, pairs, weights))


def complete(n):
    return graph(n, itertools.combinations(range(n), 2))


def path(n):
    return graph(n, [(i, i + 1) for i in range(n - 1)])


def star(n):
    return graph(n, [(0, i) for i in range(1, n)])


# ---------------------------------------------------------------------------
# PageRank
# ---------------------------------------------------------------------------


def test_pagerank_cycle_is_uniform():
    n = 7
    g = graph(n, [(i, (i + 1) % n) for i in range(n)])
    for it in (1, 5, 10):
        assert np.allclose(pagerank(g, KernelParams(max_iters=it)), 1 / n, atol=1e-15)


def test_pagerank_single_vertex():
    assert pagerank(graph(1, [])).tolist() == [1.0]


@pytest.mark.parametrize("seed", range(5))
def test_pagerank_matches_dense_oracle(seed):
    g, adj, _ = oracles.gnp(30, 0.2, seed)
    assert np.allclose(pagerank(g), oracles.pagerank_dense(adj, 10), rtol=0, atol=1e-10)


def test_pagerank_sums_to_one_with_dangling():
    g = graph(6, [(0, 1), (1, 2)])
    for it in range(1, 6):
        assert abs(pagerank(g, KernelParams(max_iters=it)).sum() - 1) < 1e-9


# ---------------------------------------------------------------------------
# SSSP
# ---------------------------------------------------------------------------


def test_sssp_path():
    assert sssp(path(4)).tolist() == [0, 1, 2, 3]


def test_sssp_unreachable_is_inf():
    d = sssp(graph(3, [(0, 1)]))
    assert d[2] == np.inf


@pytest.mark.parametrize("seed", range(5))
def test_sssp_matches_bellman_ford(seed):
    g, adj, w = oracles.gnp(50, 0.15, seed, weighted=True)
    assert np.array_equal(sssp(g), oracles.bellman_ford(adj, w, 0))


def test_sssp_rejects_negative_weight():
    # build_csr refuses negative weights, so assemble the CSR by hand
    g = graph(2, [(0, 1)])
    neg = CsrGraph(2, 1, g.offsets.copy(), g.neighbors.copy(), np.array([-1.0, -1.0]))
    with pytest.raises(GraphInputError):
        sssp(neg)


def test_sssp_triangle_inequality():
    g, _, _ = oracles.gnp(80, 0.08, 3, weighted=True)
    d = sssp(g)
    for u in range(g.n):
        for v, w in zip(g.neighbors_of(u), g.weights_of(u)):
            assert d[v] <= d[u] + w


def test_sssp_bad_source():
    with pytest.raises(GraphInputError):
        sssp(path(3), KernelParams(source=5))


# ---------------------------------------------------------------------------
# WCC
# ---------------------------------------------------------------------------


def test_wcc_two_triangles():
    g = graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert wcc(g).tolist() == [0, 0, 0, 3, 3, 3]


def test_wcc_empty():
    assert wcc(graph(4, [])).tolist() == [0, 1, 2, 3]


@pytest.mark.parametrize("seed", range(5))
def test_wcc_matches_flood_fill(seed):
    g, adj, _ = oracles.gnp(100, 0.02, seed)
    assert wcc(g).tolist() == oracles.components(adj)


# ---------------------------------------------------------------------------
# LPA
# ---------------------------------------------------------------------------


def test_lpa_k4():
    g = complete(4)
    assert lpa(g, KernelParams(max_iters=1)).tolist() == [0, 0, 0, 0]


def test_lpa_two_k5_bridge():
    pairs = list(itertools.combinations(range(5), 2)) + list(itertools.combinations(range(5, 10), 2))
    g = graph(10, pairs + [(4, 5)])
    labels = lpa(g)
    assert len(set(labels.tolist())) == 2
    assert labels.tolist() == oracles.lpa_sync(oracles.adjacency_sets(g), 10)


def test_lpa_isolated_keep_labels():
    labels = lpa(graph(5, [(0, 1)]))
    assert labels[2:].tolist() == [2, 3, 4]


@pytest.mark.parametrize("seed", range(5))
def test_lpa_matches_simulation(seed):
    g, adj, _ = oracles.gnp(60, 0.08, seed)
    assert lpa(g).tolist() == oracles.lpa_sync(adj, 10)


# ---------------------------------------------------------------------------
# BC
# ---------------------------------------------------------------------------


def test_bc_path():
    assert bc(path(3)).tolist() == [0, 1, 0]


def test_bc_star():
    assert np.all(bc(star(6)) == 0)


@pytest.mark.parametrize("seed", range(3))
def test_bc_matches_path_enumeration(seed):
    g, adj, _ = oracles.gnp(40, 0.2, seed)
    assert np.allclose(bc(g), oracles.dependency_bruteforce(adj, 0), rtol=0, atol=1e-9)


def test_bc_bad_source():
    with pytest.raises(GraphInputError):
        bc(path(3), KernelParams(source=3))


# ---------------------------------------------------------------------------
# Core decomposition
# ---------------------------------------------------------------------------


def test_coreness_k4_and_star():
    assert core_decomposition(complete(4)).tolist() == [3, 3, 3, 3]
    assert core_decomposition(star(6)).tolist() == [1] * 6


@pytest.mark.parametrize("seed", range(5))
def test_coreness_matches_peeling(seed):
    g, adj, _ = oracles.gnp(60, 0.1, seed)
    core = core_decomposition(g)
    assert core.tolist() == oracles.coreness_naive(adj)
    assert np.all(core <= g.degree)


# ---------------------------------------------------------------------------
# Triangles and cliques
# ---------------------------------------------------------------------------


def test_triangles_small():
    assert triangle_count(complete(4)) == 4
    assert triangle_count(path(10)) == 0
    assert triangle_count(star(10)) == 0


@pytest.mark.parametrize("seed", range(3))
def test_triangles_match_bruteforce(seed):
    g, adj, _ = oracles.gnp(100, 0.1, seed)
    assert triangle_count(g) == oracles.triangles_brute(adj)


def test_kclique_small():
    assert kclique_count(complete(5), KernelParams(k=5)) == 1
    assert kclique_count(complete(4), KernelParams(k=5)) == 0
    assert kclique_count(complete(7), KernelParams(k=4)) == 35


@pytest.mark.parametrize("seed", range(3))
def test_kclique_matches_bruteforce(seed):
    g, adj, _ = oracles.gnp(40, 0.3, seed)
    assert kclique_count(g, KernelParams(k=5)) == oracles.kcliques_brute(adj, 5)


def test_kclique_k3_equals_triangles_on_100_graphs():
    rng = np.random.default_rng(0)
    for seed in range(100):
        n = int(rng.integers(3, 40))
        g, _, _ = oracles.gnp(n, float(rng.uniform(0.05, 0.6)), seed)
        assert kclique_count(g, KernelParams(k=3)) == triangle_count(g)


# ---------------------------------------------------------------------------
# params, registry, output
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kw", [{"max_iters": 0}, {"k": 2}, {"damping": 1.0}])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        KernelParams(**kw).validate()


def test_registry_and_unknown_kernel():
    assert set(KERNEL_NAMES) == {"pr", "sssp", "wcc", "lpa", "bc", "cd", "tc", "kc"}
    with pytest.raises(ValueError, match="valid: pr"):
        run_kernel("bfs", path(3))


def test_result_write(tmp_path):
    r = run_kernel("sssp", path(3))
    r.write(tmp_path / "d.txt")
    assert (tmp_path / "d.txt").read_text() == "0.0\n1.0\n2.0\n"
    KernelResult("tc", scalar=4).write(tmp_path / "t.txt")
    assert (tmp_path / "t.txt").read_text() == "4\n"


@pytest.mark.parametrize("name", KERNEL_NAMES)
def test_thread_count_invariance(name):
    g, _, _ = oracles.gnp(200, 0.05, 9)
    a = run_kernel(name, g, KernelParams(), threads=1)
    b = run_kernel(name, g, KernelParams(), threads=4)
    if a.per_vertex is None:
        assert a.scalar == b.scalar
    elif a.per_vertex.dtype.kind == "f":
        assert np.allclose(a.per_vertex, b.per_vertex, rtol=0, atol=1e-9)
    else:
        assert np.array_equal(a.per_vertex, b.per_vertex)


@given(st.integers(2, 25), st.floats(0.05, 0.7), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_coreness_bounded_by_degeneracy(n, p, seed):
    g, adj, _ = oracles.gnp(n, p, seed)
    core = core_decomposition(g)
    assert np.all(core <= g.degree)
    # degeneracy = max over peeling order of the min residual degree
    alive = set(range(n))
    degen = 0
    while alive:
        v = min(alive, key=lambda x: (len(adj[x] & alive), x))
        degen = max(degen, len(adj[v] & alive))
        alive.remove(v)
    assert core.max() == degen


@pytest.mark.parametrize("k", [3, 4, 5])
def test_clique_oracles_agree(k):
    _, adj, _ = oracles.gnp(25, 0.4, k)
    assert oracles.kcliques_grow(adj, k) == oracles.kcliques_brute(adj, k)
