"""Dataset statistics and distribution-level similarity between graphs.

Diameters are sweep lower bounds: a BFS finds a far vertex ``a``, a BFS from
``a`` gives its eccentricity, and the sweep restarts from the middle of the
path found. Small components are measured exactly.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field

import numba
import numpy as np

from .graph import CsrGraph, GraphInputError
from .kernels import KernelParams, lpa, triangle_count, wcc

RATIO_METRICS = ("cc", "tpr", "br", "cond")
SCALE_METRICS = ("diam", "size")
METRICS = ("cc", "tpr", "br", "diam", "cond", "size")
BRIDGE_MODES = ("bridges", "cut_fraction")
N_BINS = 32
_SWEEP_ROUNDS = 8
# components this small get an exact all-pairs BFS diameter
EXACT_BELOW = 256


# ---------------------------------------------------------------------------
# BFS helpers
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _bfs_far(offsets, nbrs, labels, src, dist, queue):
    """BFS from ``src`` inside ``labels == labels[src]``.

    Returns (farthest vertex, its distance, visited count); ``queue[:count]``
    holds the visited vertices and ``dist`` is left set on them.
    """
    lab = labels[src]
    dist[src] = 0
    queue[0] = src
    head = 0
    tail = 1
    far = src
    while head < tail:
        v = queue[head]
        head += 1
        dv = dist[v]
        if dv > dist[far] or (dv == dist[far] and v < far):
            far = v
        for e in range(offsets[v], offsets[v + 1]):
            u = nbrs[e]
            if dist[u] < 0 and labels[u] == lab:
                dist[u] = dv + 1
                queue[tail] = u
                tail += 1
    return far, dist[far], tail


@numba.njit(cache=True)
def _reset(dist, queue, cnt):
    for t in range(cnt):
        dist[queue[t]] = -1


@numba.njit(cache=True)
def _sweep_bound(offsets, nbrs, labels, start, dist, queue, rounds):
    """Repeated 4-sweep lower bound on the diameter of ``start``'s component.

    Each round runs BFS from ``r`` to a far vertex ``a``, BFS from ``a`` to a
    far vertex ``b`` (the bound is ``d(a, b)``), then restarts from the middle
    of that ``a``-``b`` path.
    """
    best = 0
    prev = np.full(rounds, -1, np.int64)
    r = start
    for rnd in range(rounds):
        for q in range(rnd):
            if prev[q] == r:
                return best
        prev[rnd] = r
        a, _, cnt = _bfs_far(offsets, nbrs, labels, r, dist, queue)
        _reset(dist, queue, cnt)
        b, lb, cnt = _bfs_far(offsets, nbrs, labels, a, dist, queue)
        if lb > best:
            best = lb
        lab = labels[a]
        v = b
        while dist[v] > lb // 2:
            step = -1
            for e in range(offsets[v], offsets[v + 1]):
                u = nbrs[e]
                if labels[u] == lab and dist[u] == dist[v] - 1:
                    step = u
                    break
            v = step
        _reset(dist, queue, cnt)
        r = v
    return best


@numba.njit(cache=True)
def _diameters(offsets, nbrs, labels, n_labels, rounds, exact_below):
    """Diameter bound per label, maximised over the label's induced components.

    Components with at most ``exact_below`` vertices get the exact value from
    a BFS per member.
    """
    n = offsets.shape[0] - 1
    dist = np.full(n, -1, np.int64)
    queue = np.empty(max(n, 1), np.int64)
    covered = np.zeros(n, np.bool_)
    out = np.zeros(n_labels, np.int64)
    for s in range(n):
        if covered[s]:
            continue
        _, _, cnt = _bfs_far(offsets, nbrs, labels, s, dist, queue)
        members = queue[:cnt].copy()
        _reset(dist, queue, cnt)
        hub = s
        for v in members:
            covered[v] = True
            dh = offsets[hub + 1] - offsets[hub]
            dv = offsets[v + 1] - offsets[v]
            if dv > dh or (dv == dh and v < hub):
                hub = v
        best = 0
        if cnt <= exact_below:
            for v in members:
                _, ecc, c2 = _bfs_far(offsets, nbrs, labels, v, dist, queue)
                _reset(dist, queue, c2)
                if ecc > best:
                    best = ecc
        else:
            best = _sweep_bound(offsets, nbrs, labels, hub, dist, queue, rounds)
            alt = _sweep_bound(offsets, nbrs, labels, s, dist, queue, rounds)
            if alt > best:
                best = alt
        if best > out[labels[s]]:
            out[labels[s]] = best
    return out


def pseudo_diameter(g: CsrGraph, exact_below: int = EXACT_BELOW) -> int:
    """Largest diameter bound over all connected components."""
    if g.n == 0:
        return 0
    labels = np.zeros(g.n, np.int64)
    return int(_diameters(g.offsets, g.neighbors, labels, 1, _SWEEP_ROUNDS, exact_below)[0])


def eccentricity(g: CsrGraph, v: int) -> int:
    """Largest BFS distance from ``v`` inside its component."""
    dist = np.full(g.n, -1, np.int64)
    queue = np.empty(g.n, np.int64)
    _, ecc, _ = _bfs_far(g.offsets, g.neighbors, np.zeros(g.n, np.int64), v, dist, queue)
    return int(ecc)


# ---------------------------------------------------------------------------
# Whole-graph statistics
# ---------------------------------------------------------------------------


def wedge_count(g: CsrGraph) -> int:
    d = g.degree.astype(np.int64)
    return int((d * (d - 1) // 2).sum())


def global_clustering(g: CsrGraph) -> float:
    w = wedge_count(g)
    return 3.0 * triangle_count(g) / w if w else 0.0


@dataclass
class GraphStats:
    n: int
    m: int
    density: float
    pseudo_diameter: int
    global_clustering: float
    components: int
    degree_histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["degree_histogram"] = {str(k): v for k, v in self.degree_histogram.items()}
        return d


def graph_stats(g: CsrGraph) -> GraphStats:
    if g.n < 2:
        raise GraphInputError("graph_stats needs n >= 2")
    degs, counts = np.unique(g.degree, return_counts=True)
    comp = wcc(g)
    return GraphStats(
        n=g.n,
        m=g.m,
        density=g.density,
        pseudo_diameter=pseudo_diameter(g),
        global_clustering=global_clustering(g),
        components=int(np.count_nonzero(comp == np.arange(g.n))),
        degree_histogram={int(k): int(c) for k, c in zip(degs, counts)},
    )


# ---------------------------------------------------------------------------
# Bridges
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _bridge_flags(offsets, nbrs):
    """Per-CSR-entry flag: True if that edge is a bridge (iterative Tarjan)."""
    n = offsets.shape[0] - 1
    disc = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    parent = np.full(n, -1, np.int64)
    parent_edge = np.full(n, -1, np.int64)
    it = np.zeros(n, np.int64)
    stack = np.empty(max(n, 1), np.int64)
    flags = np.zeros(nbrs.shape[0], np.bool_)
    timer = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        top = 0
        stack[0] = root
        disc[root] = timer
        low[root] = timer
        timer += 1
        it[root] = offsets[root]
        while top >= 0:
            v = stack[top]
            if it[v] < offsets[v + 1]:
                e = it[v]
                it[v] += 1
                u = nbrs[e]
                if disc[u] < 0:
                    parent[u] = v
                    parent_edge[u] = e
                    disc[u] = timer
                    low[u] = timer
                    timer += 1
                    it[u] = offsets[u]
                    top += 1
                    stack[top] = u
                elif u != parent[v]:
                    if disc[u] < low[v]:
                        low[v] = disc[u]
            else:
                top -= 1
                if top >= 0:
                    p = stack[top]
                    if low[v] < low[p]:
                        low[p] = low[v]
                    if low[v] > disc[p]:
                        flags[parent_edge[v]] = True
    # mirror flags onto the reverse CSR entries
    for v in range(n):
        for e in range(offsets[v], offsets[v + 1]):
            if flags[e]:
                u = nbrs[e]
                lo = offsets[u]
                hi = offsets[u + 1]
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if nbrs[mid] < v:
                        lo = mid + 1
                    else:
                        hi = mid
                flags[lo] = True
    return flags


def bridge_mask(g: CsrGraph) -> np.ndarray:
    """Boolean per CSR entry marking bridge edges (both directions)."""
    if g.n == 0:
        return np.zeros(0, bool)
    return _bridge_flags(g.offsets, g.neighbors)


# ---------------------------------------------------------------------------
# Community statistics
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _community_counts(offsets, nbrs, labels, n_labels, bridges):
    n = offsets.shape[0] - 1
    size = np.zeros(n_labels, np.int64)
    vol = np.zeros(n_labels, np.int64)
    cut = np.zeros(n_labels, np.int64)
    cut_bridges = np.zeros(n_labels, np.int64)
    internal = np.zeros(n_labels, np.int64)
    wedges = np.zeros(n_labels, np.int64)
    tris = np.zeros(n_labels, np.int64)
    in_tri = np.zeros(n, np.bool_)
    for v in range(n):
        c = labels[v]
        size[c] += 1
        vol[c] += offsets[v + 1] - offsets[v]
        d_in = 0
        for e in range(offsets[v], offsets[v + 1]):
            u = nbrs[e]
            if labels[u] == c:
                d_in += 1
                if u > v:
                    internal[c] += 1
            else:
                cut[c] += 1
                if bridges[e]:
                    cut_bridges[c] += 1
        wedges[c] += d_in * (d_in - 1) // 2
    # intra-community triangles v < u < w
    for v in range(n):
        c = labels[v]
        v_end = offsets[v + 1]
        for e in range(offsets[v], v_end):
            u = nbrs[e]
            if u <= v or labels[u] != c:
                continue
            a = e + 1
            b = offsets[u]
            b_end = offsets[u + 1]
            while a < v_end and b < b_end:
                x = nbrs[a]
                y = nbrs[b]
                if x == y:
                    if x > u and labels[x] == c:
                        tris[c] += 1
                        in_tri[v] = True
                        in_tri[u] = True
                        in_tri[x] = True
                    a += 1
                    b += 1
                elif x < y:
                    a += 1
                else:
                    b += 1
    tri_members = np.zeros(n_labels, np.int64)
    for v in range(n):
        if in_tri[v]:
            tri_members[labels[v]] += 1
    return size, vol, cut, cut_bridges, internal, wedges, tris, tri_members


@dataclass
class CommunityStats:
    """One entry per community, indexed by the dense community id."""

    clustering_coefficient: np.ndarray
    triangle_participation_ratio: np.ndarray
    bridge_ratio: np.ndarray
    diameter: np.ndarray
    conductance: np.ndarray
    size: np.ndarray
    bridge_mode: str = "bridges"

    def __len__(self) -> int:
        return len(self.size)

    def metric(self, name: str) -> np.ndarray:
        return {
            "cc": self.clustering_coefficient,
            "tpr": self.triangle_participation_ratio,
            "br": self.bridge_ratio,
            "diam": self.diameter,
            "cond": self.conductance,
            "size": self.size,
        }[name]

    def records(self) -> list[dict]:
        cols = {m: self.metric(m).tolist() for m in METRICS}
        return [{"community": i, **{m: cols[m][i] for m in METRICS}} for i in range(len(self))]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["community", *METRICS], lineterminator="\n")
            w.writeheader()
            w.writerows(self.records())


def _ratio(num, den) -> np.ndarray:
    num = np.asarray(num, np.float64)
    den = np.asarray(den, np.float64)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0)
    return out


def community_stats(g: CsrGraph, assignment, bridge_mode: str = "bridges") -> CommunityStats:
    """Per-community CC, TPR, BR, Diam, Cond and Size.

    ``assignment`` is any integer label per vertex; labels are compacted to
    ``0..k-1`` in increasing label order. BR is the share of a community's
    boundary edges that are bridges of ``g`` (``bridge_mode="bridges"``) or
    the share of its incident edges that cross the boundary
    (``"cut_fraction"``).
    """
    if bridge_mode not in BRIDGE_MODES:
        raise GraphInputError(f"bridge_mode must be one of {BRIDGE_MODES}")
    assignment = np.asarray(assignment)
    if assignment.shape != (g.n,):
        raise GraphInputError(f"assignment must have one label per vertex ({g.n}), got {assignment.shape}")
    if g.n == 0:
        raise GraphInputError("community_stats needs at least one vertex")
    _, labels = np.unique(assignment, return_inverse=True)
    labels = labels.astype(np.int64)
    k = int(labels.max()) + 1
    bridges = bridge_mask(g) if bridge_mode == "bridges" else np.zeros(len(g.neighbors), bool)
    size, vol, cut, cut_br, internal, wedges, tris, members = _community_counts(
        g.offsets, g.neighbors, labels, k, bridges
    )
    total = 2 * g.m
    if bridge_mode == "bridges":
        br = _ratio(cut_br, cut)
    else:
        br = _ratio(cut, cut + internal)
    return CommunityStats(
        clustering_coefficient=_ratio(3 * tris, wedges),
        triangle_participation_ratio=_ratio(members, size),
        bridge_ratio=br,
        diameter=_diameters(g.offsets, g.neighbors, labels, k, _SWEEP_ROUNDS, EXACT_BELOW),
        conductance=_ratio(cut, np.minimum(vol, total - vol)),
        size=size,
        bridge_mode=bridge_mode,
    )


# ---------------------------------------------------------------------------
# Distributions and Jensen-Shannon divergence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    edges: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        if len(self.edges) != len(self.masses) + 1:
            raise GraphInputError("need len(edges) == len(masses) + 1")
        if np.any(self.masses < 0):
            raise GraphInputError("masses must be non-negative")

    @classmethod
    def from_samples(cls, values, edges) -> "Distribution":
        edges = np.asarray(edges, np.float64)
        counts, _ = np.histogram(np.asarray(values, np.float64), bins=edges)
        total = counts.sum()
        masses = counts / total if total else np.full(len(counts), 1.0 / len(counts))
        return cls(edges, masses)


def linear_edges(bins: int = N_BINS) -> np.ndarray:
    return np.linspace(0.0, 1.0, bins + 1)


def log_edges(*samples, bins: int = N_BINS) -> np.ndarray:
    """Log-spaced edges over ``value + 1`` covering every sample."""
    vals = np.concatenate([np.asarray(s, np.float64).ravel() for s in samples]) + 1.0
    lo = float(vals.min()) if len(vals) else 1.0
    hi = float(vals.max()) if len(vals) else 2.0
    if hi <= lo:
        hi = lo + 1.0
    return np.geomspace(lo, hi, bins + 1) - 1.0


def _kl2(p: np.ndarray, q: np.ndarray) -> float:
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / q[nz])))


def js_divergence(p, q) -> float:
    """Base-2 Jensen-Shannon divergence; 0 for equal, 1 for disjoint masses.

    Accepts :class:`Distribution` pairs (whose bin edges must agree) or raw
    mass vectors of equal length.
    """
    if isinstance(p, Distribution) or isinstance(q, Distribution):
        if not (isinstance(p, Distribution) and isinstance(q, Distribution)):
            raise GraphInputError("cannot mix Distribution and raw masses")
        if p.edges.shape != q.edges.shape or not np.allclose(p.edges, q.edges, rtol=0, atol=1e-12):
            raise GraphInputError("distributions use different bins")
        p, q = p.masses, q.masses
    p = np.asarray(p, np.float64)
    q = np.asarray(q, np.float64)
    if p.shape != q.shape:
        raise GraphInputError(f"bin count mismatch: {p.shape} vs {q.shape}")
    p = p / p.sum()
    q = q / q.sum()
    mid = 0.5 * (p + q)
    jsd = 0.5 * _kl2(p, mid) + 0.5 * _kl2(q, mid)
    return min(1.0, max(0.0, jsd))


# ---------------------------------------------------------------------------
# Similarity report
# ---------------------------------------------------------------------------


def detect_communities(g: CsrGraph, method: str = "lpa", params: KernelParams = KernelParams()) -> np.ndarray:
    if method == "lpa":
        return lpa(g, params)
    if method == "wcc":
        return wcc(g)
    raise GraphInputError(f"community method must be 'lpa' or 'wcc', got {method!r}")


@dataclass
class SimilarityReport:
    jsd: dict[str, float]
    communities_a: int
    communities_b: int
    method: str
    bridge_mode: str
    degenerate: bool
    stats_a: CommunityStats | None = field(default=None, repr=False)
    stats_b: CommunityStats | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "jsd": dict(self.jsd),
            "mean_jsd": float(np.mean(list(self.jsd.values()))),
            "communities_a": self.communities_a,
            "communities_b": self.communities_b,
            "method": self.method,
            "bridge_mode": self.bridge_mode,
            "degenerate": self.degenerate,
        }


def metric_distributions(a: CommunityStats, b: CommunityStats) -> dict[str, tuple[Distribution, Distribution]]:
    """Shared binning per metric: linear on [0, 1] for ratios, log for scales."""
    out = {}
    for name in METRICS:
        va, vb = a.metric(name), b.metric(name)
        edges = linear_edges() if name in RATIO_METRICS else log_edges(va, vb)
        out[name] = (Distribution.from_samples(va, edges), Distribution.from_samples(vb, edges))
    return out


def similarity_report(
    g_a: CsrGraph,
    g_b: CsrGraph,
    community_method: str = "lpa",
    bridge_mode: str = "bridges",
    params: KernelParams = KernelParams(),
) -> SimilarityReport:
    """JSD between the per-community metric distributions of two graphs."""
    sa = community_stats(g_a, detect_communities(g_a, community_method, params), bridge_mode)
    sb = community_stats(g_b, detect_communities(g_b, community_method, params), bridge_mode)
    jsd = {name: js_divergence(da, db) for name, (da, db) in metric_distributions(sa, sb).items()}
    return SimilarityReport(
        jsd=jsd,
        communities_a=len(sa),
        communities_b=len(sb),
        method=community_method,
        bridge_mode=bridge_mode,
        degenerate=len(sa) < 2 or len(sb) < 2,
        stats_a=sa,
        stats_b=sb,
    )
