import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphbench.generator import GeneratorConfig, generate
from graphbench.graph import EdgeList, GraphInputError, build_csr
from graphbench.kernels import triangle_count
from graphbench.stats import (
    Distribution,
    bridge_mask,
    community_stats,
    eccentricity,
    global_clustering,
    graph_stats,
    js_divergence,
    linear_edges,
    log_edges,
    metric_distributions,
    pseudo_diameter,
    similarity_report,
    wedge_count,
)

from . import oracles


def graph(n, pairs):
    return build_csr(EdgeList.from_pairs(n, pairs))


K4 = graph(4, itertools.combinations(range(4), 2))
TWO_K3 = graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


# ---------------------------------------------------------------------------
# graph statistics
# ---------------------------------------------------------------------------


def test_k4_stats():
    s = graph_stats(K4)
    assert (s.density, s.global_clustering, s.pseudo_diameter) == (1.0, 1.0, 1)
    assert s.degree_histogram == {3: 4}


def test_path_stats():
    s = graph_stats(graph(5, [(i, i + 1) for i in range(4)]))
    assert s.pseudo_diameter == 4 and s.global_clustering == 0.0


def test_density_desk_analogue():
    # 3600 vertices, 153000 edges as a ring of consecutive-offset chords
    n, m = 3600, 153_000
    pairs = [(i, (i + d) % n) for d in range(1, m // n + 2) for i in range(n)][:m]
    s = graph_stats(graph(n, pairs))
    assert s.m == m
    assert s.density == pytest.approx(2 * 153_000 / (3600 * 3599), rel=1e-15)


def test_histogram_sums_to_n():
    g, _, _ = oracles.gnp(80, 0.05, 1)
    assert sum(graph_stats(g).degree_histogram.values()) == 80


def test_clustering_cross_checks_triangle_kernel():
    g, adj, _ = oracles.gnp(60, 0.15, 2)
    wedges = sum(len(a) * (len(a) - 1) // 2 for a in adj)
    assert wedge_count(g) == wedges
    assert global_clustering(g) == pytest.approx(3 * triangle_count(g) / wedges)
    assert triangle_count(g) == oracles.triangles_brute(adj)


def test_graph_stats_needs_two_vertices():
    with pytest.raises(GraphInputError):
        graph_stats(graph(1, []))


def random_tree(n, seed):
    rng = np.random.default_rng(seed)
    return graph(n, [(int(rng.integers(0, v)), v) for v in range(1, n)])


@pytest.mark.parametrize("seed", range(20))
def test_pseudo_diameter_exact_on_trees(seed):
    g = random_tree(150, seed)
    assert pseudo_diameter(g) == oracles.diameter_exact(oracles.adjacency_sets(g))


@pytest.mark.parametrize("seed", range(10))
def test_pseudo_diameter_exact_on_small_random_graphs(seed):
    g, adj, _ = oracles.gnp(200, 0.03, seed)
    assert pseudo_diameter(g) == oracles.diameter_exact(adj)


def test_sweep_bound_alone_is_usually_exact():
    # the heuristic path only, across sparse-to-moderate densities
    hits = total = 0
    for p in (0.01, 0.02, 0.03, 0.05, 0.1):
        for seed in range(20):
            g, adj, _ = oracles.gnp(200, p, seed)
            d = pseudo_diameter(g, exact_below=0)
            exact = oracles.diameter_exact(adj)
            assert d <= exact
            hits += d == exact
            total += 1
    assert hits >= 0.9 * total


def test_pseudo_diameter_bounds_start_eccentricity():
    g, _, _ = oracles.gnp(150, 0.03, 7)
    assert pseudo_diameter(g) >= eccentricity(g, 0)


# ---------------------------------------------------------------------------
# community statistics
# ---------------------------------------------------------------------------


def test_k4_single_community():
    cs = community_stats(K4, [0, 0, 0, 0])
    assert cs.clustering_coefficient.tolist() == [1.0]
    assert cs.triangle_participation_ratio.tolist() == [1.0]
    assert cs.conductance.tolist() == [0.0]
    assert cs.size.tolist() == [4]


def test_two_triangles_conductance():
    cs = community_stats(TWO_K3, [0, 0, 0, 1, 1, 1])
    # cut 1, volumes 2+2+3 = 7 on both sides
    assert cs.conductance.tolist() == [1 / 7, 1 / 7]
    assert cs.bridge_ratio.tolist() == [1.0, 1.0]
    assert cs.diameter.tolist() == [1, 1]


def test_cut_fraction_mode():
    cs = community_stats(TWO_K3, [0, 0, 0, 1, 1, 1], bridge_mode="cut_fraction")
    # 3 internal edges and 1 boundary edge per side
    assert cs.bridge_ratio.tolist() == [0.25, 0.25]


def test_isolated_vertex_community():
    g = graph(4, [(0, 1), (1, 2), (0, 2)])
    cs = community_stats(g, [5, 5, 5, 9])
    assert cs.size.tolist() == [3, 1]
    assert cs.clustering_coefficient[1] == 0 and cs.triangle_participation_ratio[1] == 0


def test_assignment_must_be_total():
    with pytest.raises(GraphInputError):
        community_stats(K4, [0, 0, 0])
    with pytest.raises(GraphInputError):
        community_stats(graph(0, []), np.zeros(0, int))


def induced_oracle(adj, members):
    members = set(members)
    sub = {v: adj[v] & members for v in members}
    tris = sum(
        1 for a, b, c in itertools.combinations(sorted(members), 3) if b in sub[a] and c in sub[a] and c in sub[b]
    )
    wedges = sum(len(s) * (len(s) - 1) // 2 for s in sub.values())
    in_tri = {
        v for a, b, c in itertools.combinations(sorted(members), 3)
        if b in sub[a] and c in sub[a] and c in sub[b] for v in (a, b, c)
    }
    cut = sum(len(adj[v] - members) for v in members)
    vol = sum(len(adj[v]) for v in members)
    total = sum(len(a) for a in adj)
    den = min(vol, total - vol)
    return {
        "cc": 3 * tris / wedges if wedges else 0.0,
        "tpr": len(in_tri) / len(members),
        "cond": cut / den if den else 0.0,
        "size": len(members),
    }


@pytest.mark.parametrize("seed", range(5))
def test_community_stats_match_induced_oracle(seed):
    g, adj, _ = oracles.gnp(60, 0.12, seed)
    rng = np.random.default_rng(seed)
    assign = rng.integers(0, 4, g.n)
    cs = community_stats(g, assign)
    for idx, lab in enumerate(np.unique(assign)):
        exp = induced_oracle(adj, np.flatnonzero(assign == lab).tolist())
        assert cs.clustering_coefficient[idx] == pytest.approx(exp["cc"])
        assert cs.triangle_participation_ratio[idx] == pytest.approx(exp["tpr"])
        assert cs.conductance[idx] == pytest.approx(exp["cond"])
        assert cs.size[idx] == exp["size"]


def bridges_oracle(adj):
    """An edge is a bridge iff deleting it disconnects its endpoints."""
    out = set()
    for u in range(len(adj)):
        for v in adj[u]:
            if u < v:
                adj[u].discard(v)
                adj[v].discard(u)
                if oracles.bfs_dist(adj, u)[v] < 0:
                    out.add((u, v))
                adj[u].add(v)
                adj[v].add(u)
    return out


@pytest.mark.parametrize("seed", range(6))
def test_bridge_mask_matches_deletion_oracle(seed):
    g, adj, _ = oracles.gnp(40, 0.06, seed)
    mask = bridge_mask(g)
    found = set()
    for u in range(g.n):
        for e in range(g.offsets[u], g.offsets[u + 1]):
            if mask[e]:
                v = int(g.neighbors[e])
                found.add((min(u, v), max(u, v)))
    assert found == bridges_oracle(adj)
    # flagged in both directions
    assert mask.sum() == 2 * len(found)


@given(st.integers(2, 30), st.floats(0.05, 0.5), st.integers(0, 10**6), st.integers(1, 5))
@settings(max_examples=50, deadline=None)
def test_community_ratios_in_unit_interval(n, p, seed, k):
    g, _, _ = oracles.gnp(n, p, seed)
    assign = np.random.default_rng(seed).integers(0, k, n)
    for mode in ("bridges", "cut_fraction"):
        cs = community_stats(g, assign, mode)
        for name in ("cc", "tpr", "br", "cond"):
            v = cs.metric(name)
            assert np.all((v >= 0) & (v <= 1))
        assert cs.size.sum() == n and cs.size.min() >= 1


def test_community_csv(tmp_path):
    cs = community_stats(TWO_K3, [0, 0, 0, 1, 1, 1])
    cs.write_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "community,cc,tpr,br,diam,cond,size"
    assert len(lines) == 3


# ---------------------------------------------------------------------------
# JSD
# ---------------------------------------------------------------------------


def test_jsd_identity_and_disjoint():
    assert js_divergence([0.2, 0.3, 0.5], [0.2, 0.3, 0.5]) == 0.0
    assert js_divergence([1, 0, 0], [0, 0.5, 0.5]) == pytest.approx(1.0, abs=1e-15)


def test_jsd_matches_direct_summation():
    assert js_divergence([0.5, 0.5], [0.9, 0.1]) == pytest.approx(oracles.jsd_direct([0.5, 0.5], [0.9, 0.1]), abs=1e-15)
    assert js_divergence([0.5, 0.5], [0.9, 0.1]) == pytest.approx(0.146793, abs=1e-6)


def test_jsd_bin_mismatch():
    with pytest.raises(GraphInputError):
        js_divergence([0.5, 0.5], [0.2, 0.3, 0.5])
    a = Distribution(np.array([0.0, 0.5, 1.0]), np.array([0.5, 0.5]))
    b = Distribution(np.array([0.0, 0.4, 1.0]), np.array([0.5, 0.5]))
    with pytest.raises(GraphInputError):
        js_divergence(a, b)


mass = st.one_of(st.just(0.0), st.floats(1e-9, 1.0))
masses = st.lists(mass, min_size=1, max_size=40).filter(lambda x: sum(x) > 1e-6)


@given(st.data())
@settings(max_examples=200)
def test_jsd_symmetric_and_bounded(data):
    p = data.draw(masses)
    q = data.draw(st.lists(mass, min_size=len(p), max_size=len(p)).filter(lambda x: sum(x) > 1e-6))
    a, b = js_divergence(p, q), js_divergence(q, p)
    assert abs(a - b) < 1e-12
    assert 0.0 <= a <= 1.0
    assert a == pytest.approx(oracles.jsd_direct(p, q), abs=1e-12)


def test_distribution_masses_sum_to_one():
    vals = np.random.default_rng(0).random(1000)
    d = Distribution.from_samples(vals, linear_edges())
    assert abs(d.masses.sum() - 1) < 1e-12 and len(d.masses) == 32


def test_log_edges_cover_both_samples():
    e = log_edges([1, 5, 10], [0, 300])
    assert len(e) == 33
    assert e[0] == pytest.approx(0.0) and e[-1] == pytest.approx(300.0)
    assert np.all(np.diff(np.log(e + 1)) > 0)


def test_metric_distributions_share_bins():
    a = community_stats(TWO_K3, [0, 0, 0, 1, 1, 1])
    b = community_stats(K4, [0, 0, 1, 1])
    for name, (da, db) in metric_distributions(a, b).items():
        assert np.array_equal(da.edges, db.edges), name


# ---------------------------------------------------------------------------
# similarity report
# ---------------------------------------------------------------------------


def test_similarity_identity_is_zero():
    g = build_csr(generate(GeneratorConfig(3000, alpha=10, seed=1))[0])
    rep = similarity_report(g, g)
    assert set(rep.jsd) == {"cc", "tpr", "br", "diam", "cond", "size"}
    assert all(v == 0.0 for v in rep.jsd.values())


def test_similarity_flags_degenerate():
    g = build_csr(generate(GeneratorConfig(500, alpha=10, seed=1))[0])
    rep = similarity_report(g, g, "wcc")
    assert rep.degenerate
    assert math.isfinite(rep.to_dict()["mean_jsd"])


def test_similarity_bad_method():
    with pytest.raises(GraphInputError):
        similarity_report(K4, K4, "louvain")
