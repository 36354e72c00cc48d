"""Undirected graph storage: edge lists, CSR adjacency and edge-list files.

Two on-disk formats are supported:

* ``text``: one edge per line, ``src dst [weight]``, whitespace separated.
  Lines starting with ``#`` are comments. The writer emits a
  ``# n=<vertices> m=<edges>`` header so the vertex count survives a
  round trip.
* ``binary``: 8-byte magic ``GBGRAPH1``, vertex count as little-endian
  uint64, then little-endian uint64 ``(src, dst)`` pairs. Weights are not
  stored; reading yields unit weights.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

BINARY_MAGIC = b"GBGRAPH1"
FORMATS = ("text", "binary")
VARIANTS = ("Std", "Dense", "Diam")

_HEADER_RE = re.compile(r"#\s*n\s*=\s*(\d+)")


class GraphInputError(ValueError):
    """Invalid graph data (endpoint out of range, bad weights, bad file)."""


class EdgeListParseError(GraphInputError):
    def __init__(self, path, lineno: int, line: str, reason: str):
        self.path = str(path)
        self.lineno = lineno
        self.line = line
        super().__init__(f"{path}:{lineno}: {reason}: {line.strip()!r}")


class Edge(NamedTuple):
    src: int
    dst: int
    weight: float = 1.0


@dataclass
class EdgeList:
    """``n`` vertices plus parallel ``src``/``dst``/``weight`` arrays."""

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray | None = None

    def __post_init__(self):
        self.src = np.ascontiguousarray(self.src, dtype=np.int64)
        self.dst = np.ascontiguousarray(self.dst, dtype=np.int64)
        if self.src.shape != self.dst.shape or self.src.ndim != 1:
            raise GraphInputError("src and dst must be 1-d arrays of equal length")
        if self.weight is None:
            self.weight = np.ones(len(self.src), dtype=np.float64)
        else:
            self.weight = np.ascontiguousarray(self.weight, dtype=np.float64)
            if self.weight.shape != self.src.shape:
                raise GraphInputError("weight array length differs from edge count")

    @classmethod
    def from_pairs(cls, n: int, pairs, weights=None) -> "EdgeList":
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(n, arr[:, 0], arr[:, 1], weights)

    def __len__(self) -> int:
        return len(self.src)

    def __iter__(self) -> Iterator[Edge]:
        for s, d, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            yield Edge(s, d, w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeList):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
        )

    def validate(self) -> None:
        if self.n < 0:
            raise GraphInputError(f"negative vertex count {self.n}")
        if len(self.src) == 0:
            return
        lo = min(self.src.min(), self.dst.min())
        hi = max(self.src.max(), self.dst.max())
        if lo < 0:
            raise GraphInputError(f"negative endpoint {lo}")
        if hi >= self.n:
            raise GraphInputError(f"endpoint {hi} out of range for n={self.n}")
        if np.any(self.weight < 0) or np.any(~np.isfinite(self.weight)):
            raise GraphInputError("edge weights must be finite and non-negative")

    def sorted(self) -> "EdgeList":
        """Copy ordered by ``(src, dst)``; ties keep input order."""
        order = np.lexsort((self.dst, self.src))
        return EdgeList(self.n, self.src[order], self.dst[order], self.weight[order])


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """Immutable symmetric CSR adjacency.

    Every undirected edge ``{u, v}`` appears twice, once in each endpoint's
    slice; ``m`` counts it once. Neighbor slices are strictly increasing.
    """

    n: int
    m: int
    offsets: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray
    _degree: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("offsets", "neighbors", "weights"):
            getattr(self, name).flags.writeable = False
        deg = np.diff(self.offsets)
        deg.flags.writeable = False
        object.__setattr__(self, "_degree", deg)

    @property
    def degree(self) -> np.ndarray:
        return self._degree

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v] : self.offsets[v + 1]]

    def weights_of(self, v: int) -> np.ndarray:
        return self.weights[self.offsets[v] : self.offsets[v + 1]]

    @property
    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return 2.0 * self.m / (self.n * (self.n - 1.0))

    def to_edge_list(self) -> EdgeList:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degree)
        keep = src < self.neighbors
        return EdgeList(self.n, src[keep], self.neighbors[keep].copy(), self.weights[keep].copy())

    def structurally_equal(self, other: "CsrGraph") -> bool:
        return (
            self.n == other.n
            and self.m == other.m
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
            and np.array_equal(self.weights, other.weights)
        )


def build_csr(edges: EdgeList) -> CsrGraph:
    """Symmetrize, drop self-loops, merge duplicates (keeping the minimum
    weight) and pack into sorted CSR."""
    edges.validate()
    n = edges.n
    keep = edges.src != edges.dst
    u = edges.src[keep]
    v = edges.dst[keep]
    w = edges.weight[keep]
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    # after sorting by (lo, hi, w) the first of each run carries the min weight
    order = np.lexsort((w, hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    if len(lo):
        first = np.ones(len(lo), dtype=bool)
        first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
        lo, hi, w = lo[first], hi[first], w[first]
    m = len(lo)

    a = np.concatenate([lo, hi])
    b = np.concatenate([hi, lo])
    ww = np.concatenate([w, w])
    order = np.lexsort((b, a))
    a, b, ww = a[order], b[order], ww[order]
    counts = np.bincount(a, minlength=n) if n else np.zeros(0, dtype=np.int64)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return CsrGraph(n, int(m), offsets, b.astype(np.int64), ww.astype(np.float64))


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------


def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise GraphInputError(f"unknown edge-list format {fmt!r}; expected one of {FORMATS}")


def write_edge_list(edges: EdgeList, path, fmt: str = "text") -> None:
    """Write ``edges`` sorted by ``(src, dst)``; output is byte-stable."""
    _check_format(fmt)
    path = Path(path)
    e = edges.sorted()
    try:
        if fmt == "binary":
            with open(path, "wb") as fh:
                fh.write(BINARY_MAGIC)
                fh.write(np.uint64(e.n).astype("<u8").tobytes())
                pairs = np.empty((len(e), 2), dtype="<u8")
                pairs[:, 0] = e.src
                pairs[:, 1] = e.dst
                fh.write(pairs.tobytes())
            return
        weighted = bool(np.any(e.weight != 1.0))
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"# n={e.n} m={len(e)}\n")
            if not len(e):
                return
            if weighted:
                # repr() is the shortest string that round-trips a float64
                fh.writelines(
                    f"{s} {d} {w!r}\n"
                    for s, d, w in zip(e.src.tolist(), e.dst.tolist(), e.weight.tolist())
                )
            else:
                body = np.column_stack([e.src, e.dst])
                np.savetxt(fh, body, fmt="%d", delimiter=" ", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write edge list to {path}: {exc.strerror or exc}") from exc


def read_edge_list(path, fmt: str = "text", n: int | None = None) -> EdgeList:
    """Read an edge list.

    ``n`` is the declared vertex count. When omitted it comes from the file
    header, or failing that from the largest endpoint plus one.
    """
    _check_format(fmt)
    path = Path(path)
    if fmt == "binary":
        el = _read_binary(path, n)
    else:
        el = _read_text(path, n)
    el.validate()
    return el


def _read_binary(path: Path, n: int | None) -> EdgeList:
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:8] != BINARY_MAGIC:
        raise GraphInputError(f"{path}: not a GBGRAPH1 binary edge list")
    body = raw[16:]
    if len(body) % 16:
        raise GraphInputError(f"{path}: truncated binary payload ({len(body)} bytes)")
    header_n = int(np.frombuffer(raw[8:16], dtype="<u8")[0])
    pairs = np.frombuffer(body, dtype="<u8").reshape(-1, 2)
    if pairs.size and pairs.max() > np.iinfo(np.int64).max:
        raise GraphInputError(f"{path}: endpoint overflows int64")
    return EdgeList(header_n if n is None else n, pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64))


def _read_text(path: Path, n: int | None) -> EdgeList:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read edge list {path}: {exc.strerror or exc}") from exc
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        raise GraphInputError(f"{path}: not a text edge list (non-ASCII bytes)") from None

    header_n = None
    for line in text.splitlines():
        s = line.lstrip()
        if not s:
            continue
        if not s.startswith("#"):
            break
        mt = _HEADER_RE.match(s)
        if mt:
            header_n = int(mt.group(1))
            break

    src, dst, wt = _parse_fast(text)
    if src is None:
        src, dst, wt = _parse_slow(path, text)
    if n is None:
        n = header_n if header_n is not None else (int(max(src.max(), dst.max())) + 1 if len(src) else 0)
    return EdgeList(n, src, dst, wt)


def _parse_fast(text: str):
    """Vectorised parse for well-formed files; ``(None,)*3`` on anything odd."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), np.zeros(0)
    ncol = len(lines[0].split())
    if ncol not in (2, 3):
        return None, None, None
    tokens = " ".join(lines).split()
    if len(tokens) != ncol * len(lines):
        return None, None, None
    try:
        arr = np.array(tokens, dtype=np.float64).reshape(-1, ncol)
    except ValueError:
        return None, None, None
    ends = arr[:, :2]
    if np.any(ends != np.floor(ends)) or np.any(ends < 0) or np.any(ends >= 2.0**53):
        return None, None, None
    # integers above 2**53 are not representable; the slow path handles them
    src = ends[:, 0].astype(np.int64)
    dst = ends[:, 1].astype(np.int64)
    wt = arr[:, 2].copy() if ncol == 3 else np.ones(len(src))
    return src, dst, wt


def _parse_slow(path: Path, text: str):
    src, dst, wt = [], [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(path, lineno, line, "expected 'src dst [weight]'")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(path, lineno, line, "endpoints must be integers") from None
        if a < 0 or b < 0:
            raise EdgeListParseError(path, lineno, line, "negative endpoint")
        if a > np.iinfo(np.int64).max or b > np.iinfo(np.int64).max:
            raise GraphInputError(f"{path}:{lineno}: endpoint overflows int64")
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise EdgeListParseError(path, lineno, line, "weight must be a number") from None
        src.append(a)
        dst.append(b)
        wt.append(w)
    return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64), np.array(wt, dtype=np.float64)


def detect_format(path) -> str:
    with open(path, "rb") as fh:
        return "binary" if fh.read(8) == BINARY_MAGIC else "text"


def load_graph(path, fmt: str | None = None) -> CsrGraph:
    return build_csr(read_edge_list(path, fmt or "text"))


# ---------------------------------------------------------------------------
# Dataset naming
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DatasetName:
    scale: float
    variant: str = "Std"

    def __str__(self) -> str:
        s = f"{self.scale:.1f}"
        if s.endswith(".0"):
            s = s[:-2]
        return f"S{s}-{self.variant}"


def dataset_name(n: int, m: int, variant: str = "Std") -> DatasetName:
    """Scale class ``log10(n + m)`` rounded to the nearest half."""
    if n < 1 or m < 0:
        raise GraphInputError(f"dataset_name needs n >= 1 and m >= 0 (got n={n}, m={m})")
    if variant not in VARIANTS:
        raise GraphInputError(f"variant must be one of {VARIANTS}, got {variant!r}")
    x = math.log10(n + m)
    scale = math.floor(2.0 * x + 0.5) / 2.0
    return DatasetName(scale, variant)


def sidecar(path, suffix: str) -> Path:
    """``graph.txt`` -> ``graph.txt.<suffix>``."""
    p = Path(path)
    return p.with_name(p.name + "." + suffix)


def file_size(path) -> int:
    return os.stat(path).st_size
