"""Slow, obviously-correct reference implementations used only by tests.

Nothing here imports the package's algorithms; graphs are handled as plain
Python adjacency sets or dense numpy matrices.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque

import numpy as np

from graphbench.graph import EdgeList, build_csr


def gnp(n: int, p: float, seed: int, weighted: bool = False):
    """Erdos-Renyi G(n, p) as (CsrGraph, adjacency sets, weight dict)."""
    rng = np.random.default_rng(seed)
    pairs, weights = [], []
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p:
            pairs.append((u, v))
            weights.append(float(rng.integers(1, 10)) if weighted else 1.0)
    g = build_csr(EdgeList.from_pairs(n, pairs, weights))
    adj = [set() for _ in range(n)]
    w = {}
    for (u, v), x in zip(pairs, weights):
        adj[u].add(v)
        adj[v].add(u)
        w[(u, v)] = w[(v, u)] = x
    return g, adj, w


def adjacency_sets(g) -> list[set]:
    return [set(g.neighbors_of(v).tolist()) for v in range(g.n)]


def pagerank_dense(adj, iters: int, damping: float = 0.85) -> np.ndarray:
    n = len(adj)
    a = np.zeros((n, n))
    for u in range(n):
        for v in adj[u]:
            a[v, u] = 1.0 / len(adj[u])
    dangling = np.array([len(s) == 0 for s in adj], float)
    r = np.full(n, 1.0 / n)
    for _ in range(iters):
        r = (1 - damping) / n + damping * (a @ r + (dangling @ r) / n)
    return r


def bellman_ford(adj, w, source: int) -> np.ndarray:
    n = len(adj)
    dist = [math.inf] * n
    dist[source] = 0.0
    for _ in range(n - 1):
        changed = False
        for u in range(n):
            for v in adj[u]:
                if dist[u] + w[(u, v)] < dist[v]:
                    dist[v] = dist[u] + w[(u, v)]
                    changed = True
        if not changed:
            break
    return np.array(dist)


def components(adj) -> list[int]:
    """Minimum vertex id of each vertex's component, via BFS flood fill."""
    n = len(adj)
    comp = [-1] * n
    for s in range(n):
        if comp[s] >= 0:
            continue
        seen = [s]
        comp[s] = s
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if comp[v] < 0:
                    comp[v] = s
                    seen.append(v)
                    q.append(v)
    return comp


def lpa_sync(adj, iters: int) -> list[int]:
    """Synchronous label propagation; a vertex counts its own label and ties
    go to the smallest label."""
    labels = list(range(len(adj)))
    for _ in range(iters):
        new = []
        for v in range(len(adj)):
            cnt = Counter(labels[u] for u in adj[v])
            cnt[labels[v]] += 1
            best = max(cnt.values())
            new.append(min(lab for lab, c in cnt.items() if c == best))
        if new == labels:
            break
        labels = new
    return labels


def bfs_dist(adj, s: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def all_shortest_paths(adj, s: int, t: int, dist) -> list[list[int]]:
    """Every shortest s-t path, enumerated by walking back along the BFS DAG."""
    if dist[t] < 0:
        return []
    paths = []

    def walk(v, suffix):
        if v == s:
            paths.append([s, *suffix])
            return
        for u in adj[v]:
            if dist[u] == dist[v] - 1:
                walk(u, [v, *suffix])

    walk(t, [])
    return paths


def dependency_bruteforce(adj, s: int) -> np.ndarray:
    """delta_s(v) = sum over targets t of (shortest s-t paths through v) / (all of them)."""
    n = len(adj)
    dist = bfs_dist(adj, s)
    delta = np.zeros(n)
    for t in range(n):
        if t == s:
            continue
        paths = all_shortest_paths(adj, s, t, dist)
        if not paths:
            continue
        through = Counter(v for p in paths for v in p[1:-1])
        for v, c in through.items():
            delta[v] += c / len(paths)
    return delta


def coreness_naive(adj) -> list[int]:
    n = len(adj)
    core = [0] * n
    alive = set(range(n))
    k = 0
    while alive:
        k += 1
        while True:
            drop = [v for v in alive if len(adj[v] & alive) < k]
            if not drop:
                break
            alive -= set(drop)
        for v in alive:
            core[v] = k
    return core


def triangles_brute(adj) -> int:
    n = len(adj)
    return sum(
        1 for a, b, c in itertools.combinations(range(n), 3) if b in adj[a] and c in adj[a] and c in adj[b]
    )


def kcliques_brute(adj, k: int) -> int:
    n = len(adj)
    total = 0
    for combo in itertools.combinations(range(n), k):
        if all(v in adj[u] for u, v in itertools.combinations(combo, 2)):
            total += 1
    return total


def kcliques_grow(adj, k: int) -> int:
    """Extend cliques one vertex at a time, always with a larger id."""
    cliques = [(v,) for v in range(len(adj))]
    for _ in range(k - 1):
        cliques = [
            (*c, w) for c in cliques for w in adj[c[-1]] if w > c[-1] and all(w in adj[u] for u in c)
        ]
    return len(cliques)


def diameter_exact(adj) -> int:
    """Largest finite all-pairs BFS distance."""
    return max((max(bfs_dist(adj, s)) for s in range(len(adj))), default=0)


def jsd_direct(p, q) -> float:
    p = [x / sum(p) for x in p]
    q = [x / sum(q) for x in q]
    total = 0.0
    for a, b in zip(p, q):
        m = (a + b) / 2
        if a > 0:
            total += 0.5 * a * math.log2(a / m)
        if b > 0:
            total += 0.5 * b * math.log2(b / m)
    return total


def fft_reference(n, alpha, limits, draws, group_size=None):
    """Pure-Python sampling loop; ``draws(i)`` yields vertex i's uniforms.

    With ``group_size`` the backbone is included first and candidates leaving
    the source's group end the vertex.
    """
    deg = [0] * n
    edges = []
    if group_size is not None:
        for i in range(n - 1):
            edges.append((i, i + 1))
            deg[i] += 1
            deg[i + 1] += 1
    trials = 0
    for i in range(n):
        c, j = 0.0, i
        it = draws(i)
        while deg[i] < limits[i]:
            f = next(it)
            trials += 1
            k = j + math.floor((1.0 / f - 1.0) * c / alpha) + 1
            if k >= n:
                break
            if group_size is not None and math.floor(k / group_size) != math.floor(i / group_size):
                break
            if deg[k] < limits[k] and not (group_size is not None and k == i + 1):
                edges.append((i, k))
                deg[i] += 1
                deg[k] += 1
            c += k - j
            j = k
    return edges, trials


def ldbc_reference(n, p, p_limit, limits, draws):
    deg = [0] * n
    edges = []
    trials = 0
    for i in range(n):
        it = draws(i)
        j = i + 1
        while deg[i] < limits[i] and j < n:
            f = next(it)
            trials += 1
            if f <= max(p ** (j - i), p_limit) and deg[j] < limits[j]:
                edges.append((i, j))
                deg[i] += 1
                deg[j] += 1
            j += 1
    return edges, trials


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
