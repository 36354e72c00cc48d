"""The eight benchmark kernels over :class:`~graphbench.graph.CsrGraph`.

Vertex loops run under ``numba.prange``. Every parallel loop either writes
only its own vertex's slot from a read-only snapshot (Jacobi-style
supersteps) or performs an integer reduction, so results do not depend on
the thread count.
"""

from __future__ import annotations

import contextlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numba
import numpy as np

from .graph import CsrGraph, GraphInputError

log = logging.getLogger(__name__)

INF = np.inf


@dataclass(frozen=True)
class KernelParams:
    max_iters: int = 10
    source: int = 0
    k: int = 5
    damping: float = 0.85

    def validate(self, n: int | None = None) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.k < 3:
            raise ValueError("k must be >= 3")
        if not 0.0 < self.damping < 1.0:
            raise ValueError("damping must lie in (0, 1)")
        if self.source < 0 or (n is not None and n > 0 and self.source >= n):
            raise GraphInputError(f"source {self.source} out of range for n={n}")


@dataclass
class KernelResult:
    kernel: str
    scalar: int | None = None
    per_vertex: np.ndarray | None = None

    def write(self, path) -> None:
        """One value per line in vertex order, or the scalar alone."""
        path = Path(path)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            if self.per_vertex is None:
                fh.write(f"{self.scalar}\n")
                return
            arr = self.per_vertex
            if arr.dtype.kind == "f":
                fh.writelines(f"{x!r}\n" for x in arr.tolist())
            else:
                fh.writelines(f"{x}\n" for x in arr.tolist())


def available_threads() -> int:
    return int(numba.config.NUMBA_NUM_THREADS)


@contextlib.contextmanager
def thread_pool(threads: int):
    """Pin numba's worker count for the duration of the block."""
    want = max(1, min(int(threads), available_threads()))
    prev = numba.get_num_threads()
    numba.set_num_threads(want)
    try:
        yield want
    finally:
        numba.set_num_threads(prev)


# ---------------------------------------------------------------------------
# PageRank
# ---------------------------------------------------------------------------


@numba.njit(cache=True, parallel=True)
def _pagerank(offsets, nbrs, iters, damping):
    n = offsets.shape[0] - 1
    r = np.full(n, 1.0 / n)
    nxt = np.empty(n)
    contrib = np.empty(n)
    for _ in range(iters):
        dangling = 0.0
        for v in range(n):
            d = offsets[v + 1] - offsets[v]
            if d == 0:
                dangling += r[v]
                contrib[v] = 0.0
            else:
                contrib[v] = r[v] / d
        base = (1.0 - damping) / n + damping * dangling / n
        for v in numba.prange(n):
            s = 0.0
            for e in range(offsets[v], offsets[v + 1]):
                s += contrib[nbrs[e]]
            nxt[v] = base + damping * s
        r, nxt = nxt, r
    return r


def pagerank(g: CsrGraph, params: KernelParams = KernelParams()) -> np.ndarray:
    """Exactly ``max_iters`` synchronous power iterations from the uniform
    vector; mass on degree-0 vertices is spread uniformly."""
    params.validate()
    if g.n == 0:
        return np.zeros(0)
    return _pagerank(g.offsets, g.neighbors, params.max_iters, params.damping)


# ---------------------------------------------------------------------------
# SSSP
# ---------------------------------------------------------------------------


@numba.njit(cache=True, parallel=True)
def _sssp(offsets, nbrs, wts, source):
    n = offsets.shape[0] - 1
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    active = np.zeros(n, np.bool_)
    active[source] = True
    new = dist.copy()
    nxt_active = np.zeros(n, np.bool_)
    steps = 0
    any_active = True
    while any_active:
        steps += 1
        for v in numba.prange(n):
            best = dist[v]
            for e in range(offsets[v], offsets[v + 1]):
                u = nbrs[e]
                if active[u]:
                    cand = dist[u] + wts[e]
                    if cand < best:
                        best = cand
            new[v] = best
            nxt_active[v] = best < dist[v]
        any_active = False
        for v in range(n):
            dist[v] = new[v]
            active[v] = nxt_active[v]
            if nxt_active[v]:
                any_active = True
    return dist, steps


def sssp(g: CsrGraph, params: KernelParams = KernelParams()) -> np.ndarray:
    """Exact distances from ``params.source`` by frontier-driven
    Bellman-Ford supersteps. Unreachable vertices get ``inf``."""
    params.validate(g.n)
    if g.n == 0:
        return np.zeros(0)
    if g.weights.size and g.weights.min() < 0:
        raise GraphInputError("sssp requires non-negative edge weights")
    dist, _ = _sssp(g.offsets, g.neighbors, g.weights, params.source)
    return dist


# ---------------------------------------------------------------------------
# WCC
# ---------------------------------------------------------------------------


@numba.njit(cache=True, parallel=True)
def _wcc(offsets, nbrs):
    n = offsets.shape[0] - 1
    label = np.arange(n)
    changed = True
    while changed:
        changed = False
        flags = np.zeros(n, np.bool_)
        # min-label propagation converges to the same fixed point under any
        # interleaving, so in-place reads are safe
        for v in numba.prange(n):
            best = label[v]
            for e in range(offsets[v], offsets[v + 1]):
                lu = label[nbrs[e]]
                if lu < best:
                    best = lu
            if best < label[v]:
                label[v] = best
                flags[v] = True
        for v in range(n):
            if flags[v]:
                changed = True
                break
    return label


def wcc(g: CsrGraph) -> np.ndarray:
    """Component ids; each id is the smallest vertex id in its component."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    return _wcc(g.offsets, g.neighbors)


# ---------------------------------------------------------------------------
# Label propagation
# ---------------------------------------------------------------------------


@numba.njit(cache=True, parallel=True)
def _lpa(offsets, nbrs, iters):
    n = offsets.shape[0] - 1
    label = np.arange(n)
    new = np.empty(n, np.int64)
    scratch = np.empty(offsets[n] + n, np.int64)
    for _ in range(iters):
        for v in numba.prange(n):
            lo = offsets[v] + v
            cnt = offsets[v + 1] - offsets[v] + 1
            buf = scratch[lo : lo + cnt]
            buf[0] = label[v]
            for e in range(offsets[v], offsets[v + 1]):
                buf[e - offsets[v] + 1] = label[nbrs[e]]
            buf.sort()
            best = buf[0]
            best_run = 0
            run = 0
            for t in range(cnt):
                if t > 0 and buf[t] == buf[t - 1]:
                    run += 1
                else:
                    run = 1
                # strict > keeps the smallest label among equally frequent ones
                if run > best_run:
                    best_run = run
                    best = buf[t]
            new[v] = best
        changed = False
        for v in range(n):
            if new[v] != label[v]:
                changed = True
            label[v] = new[v]
        if not changed:
            break
    return label


def lpa(g: CsrGraph, params: KernelParams = KernelParams()) -> np.ndarray:
    """Synchronous label propagation, at most ``max_iters`` rounds.

    A vertex votes over its own label and its neighbours' labels; the most
    frequent wins and ties go to the smallest label.
    """
    params.validate()
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    return _lpa(g.offsets, g.neighbors, params.max_iters)


# ---------------------------------------------------------------------------
# Single-source betweenness (Brandes dependencies)
# ---------------------------------------------------------------------------


@numba.njit(cache=True, parallel=True)
def _bfs_levels(offsets, nbrs, source):
    n = offsets.shape[0] - 1
    level = np.full(n, -1, np.int64)
    sigma = np.zeros(n)
    level[source] = 0
    sigma[source] = 1.0
    depth = 0
    grew = True
    while grew:
        grew = False
        found = np.zeros(n, np.bool_)
        for v in numba.prange(n):
            if level[v] != -1:
                continue
            s = 0.0
            for e in range(offsets[v], offsets[v + 1]):
                if level[nbrs[e]] == depth:
                    s += sigma[nbrs[e]]
            if s > 0.0:
                sigma[v] = s
                found[v] = True
        for v in range(n):
            if found[v]:
                level[v] = depth + 1
                grew = True
        depth += 1
    return level, sigma, depth - 1


@numba.njit(cache=True, parallel=True)
def _brandes(offsets, nbrs, source):
    n = offsets.shape[0] - 1
    level, sigma, maxd = _bfs_levels(offsets, nbrs, source)
    delta = np.zeros(n)
    order = np.argsort(level, kind="mergesort")
    starts = np.searchsorted(level[order], np.arange(maxd + 2))
    for d in range(maxd - 1, -1, -1):
        a = starts[d]
        b = starts[d + 1]
        for t in numba.prange(a, b):
            v = order[t]
            s = 0.0
            for e in range(offsets[v], offsets[v + 1]):
                w = nbrs[e]
                if level[w] == d + 1:
                    s += sigma[v] / sigma[w] * (1.0 + delta[w])
            delta[v] = s
    delta[source] = 0.0
    return delta


def bc(g: CsrGraph, params: KernelParams = KernelParams()) -> np.ndarray:
    """Dependency of ``params.source`` on every vertex, over unit-length
    shortest paths."""
    params.validate(g.n)
    if g.n == 0:
        return np.zeros(0)
    return _brandes(g.offsets, g.neighbors, params.source)


# ---------------------------------------------------------------------------
# Core decomposition
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _coreness(offsets, nbrs):
    n = offsets.shape[0] - 1
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = offsets[v + 1] - offsets[v]
    alive = np.ones(n, np.bool_)
    core = np.zeros(n, np.int64)
    frontier = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    left = n
    k = 1
    while left > 0:
        nf = 0
        for v in range(n):
            if alive[v] and deg[v] < k:
                frontier[nf] = v
                nf += 1
        while nf > 0:
            for t in range(nf):
                u = frontier[t]
                alive[u] = False
                core[u] = k - 1
            left -= nf
            nn = 0
            for t in range(nf):
                u = frontier[t]
                for e in range(offsets[u], offsets[u + 1]):
                    v = nbrs[e]
                    if alive[v]:
                        deg[v] -= 1
                        if deg[v] == k - 1:
                            nxt[nn] = v
                            nn += 1
            frontier, nxt = nxt, frontier
            nf = nn
        k += 1
    return core


def core_decomposition(g: CsrGraph) -> np.ndarray:
    """Coreness by peeling with thresholds k = 1, 2, ...: every vertex whose
    residual degree is below k is removed; its coreness is k - 1."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    return _coreness(g.offsets, g.neighbors)


# ---------------------------------------------------------------------------
# Triangles and cliques
# ---------------------------------------------------------------------------


@numba.njit(cache=True, inline="always")
def _first_above(nbrs, lo, hi, x):
    # index of the first entry > x in the sorted slice nbrs[lo:hi]
    while lo < hi:
        mid = (lo + hi) >> 1
        if nbrs[mid] <= x:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True, parallel=True)
def _triangles(offsets, nbrs):
    n = offsets.shape[0] - 1
    per = np.zeros(n, np.int64)
    for u in numba.prange(n):
        cnt = 0
        u_end = offsets[u + 1]
        for e in range(_first_above(nbrs, offsets[u], u_end, u), u_end):
            v = nbrs[e]
            a = e + 1
            b = _first_above(nbrs, offsets[v], offsets[v + 1], v)
            b_end = offsets[v + 1]
            while a < u_end and b < b_end:
                x = nbrs[a]
                y = nbrs[b]
                if x == y:
                    cnt += 1
                    a += 1
                    b += 1
                elif x < y:
                    a += 1
                else:
                    b += 1
        per[u] = cnt
    return per.sum()


def triangle_count(g: CsrGraph) -> int:
    """Triangles ``u < v < w`` found by intersecting sorted adjacency of each
    edge's endpoints."""
    if g.n == 0:
        return 0
    return int(_triangles(g.offsets, g.neighbors))


@numba.njit(cache=True)
def _degeneracy_rank(offsets, nbrs):
    # Matula-Beck bucket peeling; rank[v] = removal position
    n = offsets.shape[0] - 1
    deg = np.empty(n, np.int64)
    maxd = 0
    for v in range(n):
        deg[v] = offsets[v + 1] - offsets[v]
        if deg[v] > maxd:
            maxd = deg[v]
    bin_start = np.zeros(maxd + 2, np.int64)
    for v in range(n):
        bin_start[deg[v] + 1] += 1
    for d in range(1, maxd + 2):
        bin_start[d] += bin_start[d - 1]
    pos = np.empty(n, np.int64)
    vert = np.empty(n, np.int64)
    fill = bin_start.copy()
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    for i in range(n):
        v = vert[i]
        for e in range(offsets[v], offsets[v + 1]):
            u = nbrs[e]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bin_start[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bin_start[du] += 1
                deg[u] -= 1
    rank = np.empty(n, np.int64)
    for i in range(n):
        rank[vert[i]] = i
    return rank


@numba.njit(cache=True)
def _orient(offsets, nbrs, rank):
    n = offsets.shape[0] - 1
    out_off = np.zeros(n + 1, np.int64)
    for v in range(n):
        c = 0
        for e in range(offsets[v], offsets[v + 1]):
            if rank[nbrs[e]] > rank[v]:
                c += 1
        out_off[v + 1] = out_off[v] + c
    out = np.empty(out_off[n], np.int64)
    for v in range(n):
        p = out_off[v]
        for e in range(offsets[v], offsets[v + 1]):
            if rank[nbrs[e]] > rank[v]:
                out[p] = nbrs[e]
                p += 1
    return out_off, out


@numba.njit(cache=True, parallel=True)
def _kcliques(offsets, nbrs, out_off, out, k):
    n = out_off.shape[0] - 1
    maxout = 0
    for v in range(n):
        if out_off[v + 1] - out_off[v] > maxout:
            maxout = out_off[v + 1] - out_off[v]
    per = np.zeros(n, np.int64)
    for v in numba.prange(n):
        dv = out_off[v + 1] - out_off[v]
        if dv < k - 1:
            continue
        # cand[l, :size[l]] = common out-neighbours of the current l+1 clique
        cand = np.empty((k - 1, dv), np.int64)
        size = np.zeros(k - 1, np.int64)
        idx = np.zeros(k - 1, np.int64)
        for t in range(dv):
            cand[0, t] = out[out_off[v] + t]
        size[0] = dv
        total = 0
        lvl = 0
        # depth-first over clique extensions; lvl = clique size - 1
        while lvl >= 0:
            if lvl == k - 2:
                total += size[lvl]
                lvl -= 1
                continue
            if idx[lvl] >= size[lvl] or size[lvl] - idx[lvl] < k - 1 - lvl:
                idx[lvl] = 0
                lvl -= 1
                continue
            u = cand[lvl, idx[lvl]]
            idx[lvl] += 1
            a = idx[lvl]
            a_end = size[lvl]
            # later candidates (higher id) that are also adjacent to u
            b = offsets[u]
            b_end = offsets[u + 1]
            c = 0
            while a < a_end and b < b_end:
                x = cand[lvl, a]
                y = nbrs[b]
                if x == y:
                    cand[lvl + 1, c] = x
                    c += 1
                    a += 1
                    b += 1
                elif x < y:
                    a += 1
                else:
                    b += 1
            size[lvl + 1] = c
            idx[lvl + 1] = 0
            lvl += 1
        per[v] = total
    return per.sum()


def kclique_count(g: CsrGraph, params: KernelParams = KernelParams()) -> int:
    """Number of ``k``-cliques.

    Each clique is found from its lowest vertex in a degeneracy order, whose
    out-neighbourhood is small; inside it vertices are added in id order.
    """
    params.validate()
    k = params.k
    if k > g.n or g.n == 0:
        return 0
    rank = _degeneracy_rank(g.offsets, g.neighbors)
    # out-lists inherit id order from the CSR, as the merge step needs
    out_off, out = _orient(g.offsets, g.neighbors, rank)
    return int(_kcliques(g.offsets, g.neighbors, out_off, out, k))


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _wrap_scalar(name, fn):
    def run(g, params):
        return KernelResult(name, scalar=fn(g, params))

    return run


def _wrap_vec(name, fn, with_params=True):
    def run(g, params):
        return KernelResult(name, per_vertex=fn(g, params) if with_params else fn(g))

    return run


KERNELS: dict[str, Callable[[CsrGraph, KernelParams], KernelResult]] = {
    "pr": _wrap_vec("pr", pagerank),
    "sssp": _wrap_vec("sssp", sssp),
    "wcc": _wrap_vec("wcc", wcc, with_params=False),
    "lpa": _wrap_vec("lpa", lpa),
    "bc": _wrap_vec("bc", bc),
    "cd": _wrap_vec("cd", core_decomposition, with_params=False),
    "tc": _wrap_scalar("tc", lambda g, p: triangle_count(g)),
    "kc": _wrap_scalar("kc", kclique_count),
}
KERNEL_NAMES = tuple(KERNELS)


def run_kernel(name: str, g: CsrGraph, params: KernelParams = KernelParams(), threads: int = 1) -> KernelResult:
    try:
        fn = KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; valid: {', '.join(KERNEL_NAMES)}") from None
    with thread_pool(threads):
        return fn(g, params)
