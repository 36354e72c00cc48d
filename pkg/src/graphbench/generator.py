"""Failure-free trial graph generator and a sequential-trial reference sampler.

For a source vertex ``i`` the chance that ``j > i`` is its *first* neighbour
telescopes to ``c/(c+d-1) - c/(c+d)`` with ``d = j - i``. Inverting that CDF
turns one uniform draw ``f`` in ``(0, 1]`` straight into the next neighbour
offset, so no draw is ever wasted on a non-edge. After each draw ``c`` grows
by the offset, which makes later neighbours progressively sparser. Dividing
``c`` by the density factor ``alpha`` pulls probability mass towards nearby
vertices and raises the edge count.

Diameter control splits the id range into groups, links every pair of
consecutive ids (the backbone) and then only samples edges that stay inside
a group.

The reference sampler walks ``j = i+1, i+2, ...`` and flips an independent
coin with probability ``max(p**(j-i), p_limit)`` for every candidate, which
is what makes it slow on sparse graphs.

Randomness comes from one SplitMix64 stream per source vertex (stream id =
vertex id), so a vertex's draws do not depend on how vertices are scheduled.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numba
import numpy as np

from .graph import EdgeList

log = logging.getLogger(__name__)

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_WEIGHT_SALT = np.uint64(0xD1B54A32D192ED03)
_INV_2_53 = 1.0 / 9007199254740992.0


class ConfigError(ValueError):
    """Invalid generator configuration."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantLimit:
    k: int

    def __str__(self) -> str:
        return f"const:{self.k}"


@dataclass(frozen=True)
class PowerLawLimit:
    """Discrete power law ``P(k) ~ k**-exponent`` on ``[min_deg, max_deg]``.

    ``max_deg=None`` means ``max(min_deg, n // 100)``.
    """

    exponent: float = 1.8
    min_deg: int = 10
    max_deg: int | None = None

    def bounds(self, n: int) -> tuple[int, int]:
        hi = self.max_deg if self.max_deg is not None else max(self.min_deg, n // 100)
        return self.min_deg, hi

    def __str__(self) -> str:
        s = f"powerlaw:{self.exponent:g}:{self.min_deg}"
        return s if self.max_deg is None else f"{s}:{self.max_deg}"


DegreeLimitSpec = ConstantLimit | PowerLawLimit


def parse_degree_spec(text: str) -> DegreeLimitSpec:
    """``const:K`` or ``powerlaw[:EXP[:MIN[:MAX]]]``."""
    parts = text.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind in ("const", "constant"):
            if len(parts) != 2:
                raise ConfigError(f"constant degree spec needs one value: {text!r}")
            return ConstantLimit(int(parts[1]))
        if kind in ("powerlaw", "power_law", "zipf"):
            d = PowerLawLimit()
            exp = float(parts[1]) if len(parts) > 1 else d.exponent
            lo = int(parts[2]) if len(parts) > 2 else d.min_deg
            hi = int(parts[3]) if len(parts) > 3 else None
            return PowerLawLimit(exp, lo, hi)
    except ValueError as exc:
        raise ConfigError(f"bad degree spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown degree spec {text!r} (use const:K or powerlaw:EXP:MIN[:MAX])")


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    alpha: float = 10.0
    target_diameter: int | None = None
    degree_limits: DegreeLimitSpec = field(default_factory=PowerLawLimit)
    seed: int = 0
    group_diameter: int = 6
    # unit weights, or uniform in (0, 1] hashed from (seed, src, dst)
    weights: str = "unit"
    # stop once this many edges exist (None = run every vertex to completion)
    max_edges: int | None = None
    # multiplies every sampled degree limit before generation
    degree_scale: float = 1.0
    threads: int = 1
    deterministic: bool = True

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not self.alpha >= 1.0:
            raise ConfigError(f"alpha must be >= 1, got {self.alpha}")
        if self.group_diameter < 1:
            raise ConfigError("group_diameter must be >= 1")
        if self.target_diameter is not None and self.target_diameter < self.group_diameter + 1:
            raise ConfigError(
                f"target_diameter must be >= group_diameter + 1 = {self.group_diameter + 1}"
            )
        if self.weights not in ("unit", "uniform"):
            raise ConfigError(f"weights must be 'unit' or 'uniform', got {self.weights!r}")
        if self.max_edges is not None and self.max_edges < 0:
            raise ConfigError("max_edges must be non-negative")
        if not self.degree_scale > 0:
            raise ConfigError("degree_scale must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        _validate_degree_spec(self.degree_limits, self.n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["degree_limits"] = str(self.degree_limits)
        return d


@dataclass(frozen=True)
class LdbcRefConfig:
    n: int
    p: float = 0.95
    p_limit: float = 0.2
    degree_limits: DegreeLimitSpec = field(default_factory=PowerLawLimit)
    seed: int = 0
    degree_scale: float = 1.0
    weights: str = "unit"

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not (0.0 < self.p_limit <= self.p < 1.0):
            raise ConfigError(f"need 0 < p_limit <= p < 1 (p={self.p}, p_limit={self.p_limit})")
        if not self.degree_scale > 0:
            raise ConfigError("degree_scale must be positive")
        if self.weights not in ("unit", "uniform"):
            raise ConfigError(f"weights must be 'unit' or 'uniform', got {self.weights!r}")
        _validate_degree_spec(self.degree_limits, self.n)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["degree_limits"] = str(self.degree_limits)
        return d


def _validate_degree_spec(spec: DegreeLimitSpec, n: int) -> None:
    if isinstance(spec, ConstantLimit):
        if spec.k < 0:
            raise ConfigError("constant degree limit must be >= 0")
    elif isinstance(spec, PowerLawLimit):
        lo, hi = spec.bounds(n)
        if lo < 1:
            raise ConfigError("power-law min_deg must be >= 1")
        if lo > hi:
            raise ConfigError(f"power-law min_deg {lo} exceeds max_deg {hi}")
        if not spec.exponent > 0:
            raise ConfigError("power-law exponent must be positive")
    else:
        raise ConfigError(f"unsupported degree limit spec {spec!r}")


@dataclass
class SamplerState:
    c: float = 0.0
    j: int = 0

    def advance(self, offset: int) -> None:
        self.c += offset
        self.j += offset


@dataclass
class GenerationReport:
    trials: int
    edges_emitted: int
    wall_time: float
    generator: str = "fft"
    isolated_vertices: int = 0
    warnings: list[str] = field(default_factory=list)
    group_number: float | None = None
    group_size: float | None = None

    @property
    def trials_per_edge(self) -> float:
        return self.trials / max(self.edges_emitted, 1)

    @property
    def edges_per_second(self) -> float:
        return self.edges_emitted / self.wall_time if self.wall_time > 0 else float("inf")

    def to_dict(self) -> dict:
        d = {
            "trials": self.trials,
            "edges": self.edges_emitted,
            "wall_time_s": self.wall_time,
            "trials_per_edge": self.trials_per_edge,
            "generator": self.generator,
            "isolated_vertices": self.isolated_vertices,
            "warnings": list(self.warnings),
        }
        if self.group_number is not None:
            d["group_number"] = self.group_number
            d["group_size"] = self.group_size
        return d


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def first_edge_probability(c: float, d: int) -> float:
    """Probability that offset ``d`` is the first sampled neighbour."""
    if d < 1:
        raise ValueError("offset must be >= 1")
    if c == 0:
        return 1.0 if d == 1 else 0.0
    return c / (c + d - 1) - c / (c + d)


def density_boundary(c: float, alpha: float) -> float:
    """Distance beyond which ``alpha`` lowers an edge's probability."""
    return math.sqrt(c * c / alpha)


@numba.njit(cache=True, inline="always")
def _offset(c, alpha, f):
    return np.int64(math.floor((1.0 / f - 1.0) * c / alpha)) + 1


@numba.njit(cache=True)
def _offsets_vec(c, alpha, f):
    out = np.empty(f.shape[0], np.int64)
    for t in range(f.shape[0]):
        out[t] = _offset(c, alpha, f[t])
    return out


def sample_next_offset(state: SamplerState | float, alpha: float, f):
    """Inverse-CDF step: ``floor((1/f - 1) * c / alpha) + 1``.

    ``state`` may be a :class:`SamplerState` or a bare ``c``; ``f`` may be a
    scalar or an array of draws in ``(0, 1]``. The caller advances the state.
    """
    c = state.c if isinstance(state, SamplerState) else float(state)
    if c < 0:
        raise ValueError("sampler parameter c must be >= 0")
    if np.ndim(f):
        f = np.ascontiguousarray(f, dtype=np.float64)
        if np.any(f <= 0) or np.any(f > 1):
            raise ValueError("draws must lie in (0, 1]")
        return _offsets_vec(c, float(alpha), f)
    f = float(f)
    if not 0.0 < f <= 1.0:
        raise ValueError(f"draw f={f} outside (0, 1]")
    return int(_offset(c, float(alpha), f))


def ldbc_edge_probability(d: int, p: float = 0.95, p_limit: float = 0.2) -> float:
    return max(p**d, p_limit)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


@numba.njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, inline="always")
def _stream_start(seed, stream):
    return _mix64(seed ^ _mix64(np.uint64(stream) + GOLDEN))


@numba.njit(cache=True, inline="always")
def _to_unit(z):
    # 53 random bits mapped onto (0, 1]
    return np.float64((z >> np.uint64(11)) + np.uint64(1)) * _INV_2_53


@numba.njit(cache=True)
def _uniform_stream(seed, stream, size):
    out = np.empty(size, np.float64)
    state = _stream_start(seed, stream)
    for t in range(size):
        state += GOLDEN
        out[t] = _to_unit(_mix64(state))
    return out


def uniform_stream(seed: int, stream: int, size: int) -> np.ndarray:
    """The first ``size`` draws in ``(0, 1]`` of a vertex's stream."""
    return _uniform_stream(np.uint64(seed & 0xFFFFFFFFFFFFFFFF), stream, size)


def _seed64(seed: int) -> np.uint64:
    return np.uint64(seed & 0xFFFFFFFFFFFFFFFF)


@numba.njit(cache=True)
def _edge_weights(seed, src, dst):
    out = np.empty(src.shape[0], np.float64)
    for e in range(src.shape[0]):
        a = min(src[e], dst[e])
        b = max(src[e], dst[e])
        z = _mix64(_mix64(seed ^ _WEIGHT_SALT ^ np.uint64(a)) + np.uint64(b) * GOLDEN)
        out[e] = _to_unit(z)
    return out


# ---------------------------------------------------------------------------
# Degree limits
# ---------------------------------------------------------------------------


def power_law_mean(exponent: float, lo: int, hi: int) -> float:
    k = np.arange(lo, hi + 1, dtype=np.float64)
    w = k**-exponent
    return float((k * w).sum() / w.sum())


def assign_degree_limits(n: int, spec: DegreeLimitSpec, seed: int, scale: float = 1.0) -> np.ndarray:
    """Per-vertex degree caps, reproducible from ``seed``."""
    _validate_degree_spec(spec, n)
    if isinstance(spec, ConstantLimit):
        limits = np.full(n, spec.k, dtype=np.int64)
    else:
        lo, hi = spec.bounds(n)
        k = np.arange(lo, hi + 1, dtype=np.float64)
        cdf = np.cumsum(k**-spec.exponent)
        cdf /= cdf[-1]
        rng = np.random.Generator(np.random.PCG64([seed & 0xFFFFFFFFFFFFFFFF, 0x6C696D]))
        idx = np.searchsorted(cdf, rng.random(n), side="right")
        limits = (lo + np.minimum(idx, len(k) - 1)).astype(np.int64)
    if scale != 1.0:
        limits = np.maximum(1, np.rint(limits * scale)).astype(np.int64)
    return limits


# ---------------------------------------------------------------------------
# Sampling loops
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _fft_serial(n, alpha, limits, seed, group_size, grouped, max_edges, deg):
    """Serial sampling loop. With ``grouped`` a backbone is assumed present
    in ``deg`` and ``(i, i+1)`` candidates are not emitted again."""
    # every edge spends one unit of budget at both endpoints
    cap = min(limits.sum() // 2, max_edges) + 1
    src = np.empty(cap, np.int64)
    dst = np.empty(cap, np.int64)
    m = 0
    trials = 0
    for i in range(n):
        if m >= max_edges:
            break
        state = _stream_start(seed, i)
        c = 0.0
        j = i
        gi = np.int64(math.floor(i / group_size)) if grouped else 0
        while deg[i] < limits[i]:
            state += GOLDEN
            f = _to_unit(_mix64(state))
            trials += 1
            k = j + _offset(c, alpha, f)
            if k >= n:
                break
            if grouped and np.int64(math.floor(k / group_size)) != gi:
                break
            if deg[k] < limits[k] and not (grouped and k == i + 1):
                src[m] = i
                dst[m] = k
                m += 1
                deg[i] += 1
                deg[k] += 1
                if m >= max_edges:
                    break
            c += k - j
            j = k
    return src[:m].copy(), dst[:m].copy(), trials


@numba.njit(cache=True)
def _fft_vertex(i, n, alpha, limits, seed, group_size, grouped, deg, src, dst, base):
    """Sample one source vertex into ``src/dst[base:base+limits[i]]``.

    Returns (edges written, trials)."""
    i = np.int64(i)
    state = _stream_start(seed, i)
    c = 0.0
    j = i
    gi = np.int64(math.floor(i / group_size)) if grouped else 0
    t = 0
    u = 0
    while deg[i] < limits[i] and u < limits[i]:
        state += GOLDEN
        f = _to_unit(_mix64(state))
        t += 1
        k = j + _offset(c, alpha, f)
        if k >= n:
            break
        if grouped and np.int64(math.floor(k / group_size)) != gi:
            break
        if deg[k] < limits[k] and not (grouped and k == i + 1):
            src[base + u] = i
            dst[base + u] = k
            u += 1
            deg[i] += 1
            deg[k] += 1
        c += k - j
        j = k
    return u, t


@numba.njit(cache=True, parallel=True)
def _fft_parallel(n, alpha, limits, seed, group_size, grouped, deg):
    # each source owns limits[i] output slots; deg updates race by design
    slot = np.zeros(n + 1, np.int64)
    for v in range(n):
        slot[v + 1] = slot[v] + limits[v]
    src = np.empty(slot[n], np.int64)
    dst = np.empty(slot[n], np.int64)
    used = np.zeros(n, np.int64)
    trials_v = np.zeros(n, np.int64)
    for i in numba.prange(n):
        u, t = _fft_vertex(i, n, alpha, limits, seed, group_size, grouped, deg, src, dst, slot[i])
        used[i] = u
        trials_v[i] = t
    total = used.sum()
    out_s = np.empty(total, np.int64)
    out_d = np.empty(total, np.int64)
    p = 0
    for v in range(n):
        for q in range(used[v]):
            out_s[p] = src[slot[v] + q]
            out_d[p] = dst[slot[v] + q]
            p += 1
    return out_s, out_d, trials_v.sum()


@numba.njit(cache=True)
def _ldbc_serial(n, p, p_limit, limits, seed, deg):
    cap = limits.sum() // 2 + 1
    src = np.empty(cap, np.int64)
    dst = np.empty(cap, np.int64)
    m = 0
    trials = 0
    for i in range(n):
        state = _stream_start(seed, i)
        j = i + 1
        pd = p
        while deg[i] < limits[i] and j < n:
            state += GOLDEN
            f = _to_unit(_mix64(state))
            trials += 1
            prob = pd if pd > p_limit else p_limit
            if f <= prob and deg[j] < limits[j]:
                src[m] = i
                dst[m] = j
                m += 1
                deg[i] += 1
                deg[j] += 1
            if pd > p_limit:
                pd *= p
            j += 1
    return src[:m].copy(), dst[:m].copy(), trials


# ---------------------------------------------------------------------------
# Public generators
# ---------------------------------------------------------------------------


def _finish(n, src, dst, seed, weights, report, deg) -> tuple[EdgeList, GenerationReport]:
    w = _edge_weights(_seed64(seed), src, dst) if weights == "uniform" else None
    isolated = int(np.count_nonzero(deg == 0))
    report.isolated_vertices = isolated
    if isolated:
        msg = f"{isolated} isolated vertices (degree limits too small to connect them)"
        report.warnings.append(msg)
        log.warning(msg)
    return EdgeList(n, src, dst, w), report


def _use_parallel(config: GeneratorConfig) -> bool:
    return config.threads > 1 and not config.deterministic


def _run_fft(config: GeneratorConfig, limits, deg, group_size: float, grouped: bool):
    seed = _seed64(config.seed)
    max_edges = np.int64(config.max_edges if config.max_edges is not None else np.iinfo(np.int64).max)
    if _use_parallel(config):
        if config.max_edges is not None:
            raise ConfigError("max_edges requires deterministic (serial) generation")
        from .kernels import thread_pool

        with thread_pool(config.threads):
            return _fft_parallel(config.n, float(config.alpha), limits, seed, float(group_size), grouped, deg)
    return _fft_serial(config.n, float(config.alpha), limits, seed, float(group_size), grouped, max_edges, deg)


def generate(config: GeneratorConfig) -> tuple[EdgeList, GenerationReport]:
    """Plain failure-free generation over all vertices in id order."""
    config.validate()
    if config.target_diameter is not None:
        raise ConfigError("target_diameter is set; use generate_grouped")
    limits = assign_degree_limits(config.n, config.degree_limits, config.seed, config.degree_scale)
    deg = np.zeros(config.n, np.int64)
    t0 = time.perf_counter()
    src, dst, trials = _run_fft(config, limits, deg, 1.0, False)
    wall = time.perf_counter() - t0
    report = GenerationReport(int(trials), len(src), wall, generator="fft")
    return _finish(config.n, src, dst, config.seed, config.weights, report, deg)


def group_layout(n: int, target_diameter: int, group_diameter: int = 6) -> tuple[float, float]:
    """``(group_number, group_size)``; both real-valued, the last group may be partial."""
    group_number = target_diameter / (group_diameter + 1)
    if group_number < 1:
        raise ConfigError(f"group_number {group_number:.3f} < 1: target_diameter too small")
    return group_number, n / group_number


def group_ids(n: int, group_size: float) -> np.ndarray:
    return np.floor(np.arange(n) / group_size).astype(np.int64)


def generate_grouped(config: GeneratorConfig) -> tuple[EdgeList, GenerationReport]:
    """Backbone ``(i, i+1)`` edges plus failure-free edges confined to groups."""
    config.validate()
    if config.target_diameter is None:
        raise ConfigError("generate_grouped needs target_diameter")
    group_number, group_size = group_layout(config.n, config.target_diameter, config.group_diameter)
    n = config.n
    limits = assign_degree_limits(n, config.degree_limits, config.seed, config.degree_scale)
    t0 = time.perf_counter()
    bb_src = np.arange(n - 1, dtype=np.int64)
    bb_dst = bb_src + 1
    deg = np.zeros(n, np.int64)
    deg[:-1] += 1
    deg[1:] += 1
    if config.max_edges is not None:
        config = replace(config, max_edges=max(0, config.max_edges - (n - 1)))
    src, dst, trials = _run_fft(config, limits, deg, group_size, True)
    wall = time.perf_counter() - t0
    src = np.concatenate([bb_src, src])
    dst = np.concatenate([bb_dst, dst])
    report = GenerationReport(
        int(trials), len(src), wall, generator="fft-grouped",
        group_number=group_number, group_size=group_size,
    )
    return _finish(n, src, dst, config.seed, config.weights, report, deg)


def generate_any(config: GeneratorConfig) -> tuple[EdgeList, GenerationReport]:
    if config.target_diameter is not None:
        return generate_grouped(config)
    return generate(config)


def generate_ldbc_reference(config: LdbcRefConfig) -> tuple[EdgeList, GenerationReport]:
    """One Bernoulli trial per candidate pair; every draw is counted."""
    config.validate()
    limits = assign_degree_limits(config.n, config.degree_limits, config.seed, config.degree_scale)
    deg = np.zeros(config.n, np.int64)
    t0 = time.perf_counter()
    src, dst, trials = _ldbc_serial(
        config.n, float(config.p), float(config.p_limit), limits, _seed64(config.seed), deg
    )
    wall = time.perf_counter() - t0
    report = GenerationReport(int(trials), len(src), wall, generator="ldbc-reference")
    return _finish(config.n, src, dst, config.seed, config.weights, report, deg)


def calibrate_degree_scale(config, target_edges: int, rel_tol: float = 0.01, max_iter: int = 30):
    """Bisect ``degree_scale`` so generation yields about ``target_edges`` edges.

    Works for both :class:`GeneratorConfig` and :class:`LdbcRefConfig`;
    returns the tuned config together with its edge list and report.
    """
    run = generate_ldbc_reference if isinstance(config, LdbcRefConfig) else generate_any

    def attempt(s):
        return run(replace(config, degree_scale=s))

    lo, hi = 0.05, 1.0
    best = attempt(hi)
    while len(best[0]) < target_edges:
        lo, hi = hi, hi * 2.0
        best = attempt(hi)
        if hi > 1024:
            raise ConfigError(f"cannot reach {target_edges} edges by scaling degree limits")
    best_s = hi
    for _ in range(max_iter):
        if abs(len(best[0]) - target_edges) <= rel_tol * target_edges:
            break
        mid = 0.5 * (lo + hi)
        res = attempt(mid)
        if len(res[0]) < target_edges:
            lo = mid
        else:
            hi = mid
        if abs(len(res[0]) - target_edges) < abs(len(best[0]) - target_edges):
            best, best_s = res, mid
    else:
        warnings.warn(f"degree_scale calibration stopped at {len(best[0])} edges (target {target_edges})")
    return replace(config, degree_scale=best_s), best[0], best[1]


# ---------------------------------------------------------------------------
# Flat key=value config files
# ---------------------------------------------------------------------------

_INT_KEYS = {"n", "seed", "group_diameter", "threads"}
_OPT_INT_KEYS = {"target_diameter", "max_edges"}
_FLOAT_KEYS = {"alpha", "degree_scale", "p", "p_limit"}


def parse_config_items(items: dict) -> dict:
    """Coerce string values from config files/flags into typed config kwargs."""
    out = {}
    for raw_key, val in items.items():
        key = raw_key.strip().replace("-", "_")
        if key == "degree_dist":
            key = "degree_limits"
        if isinstance(val, str):
            val = val.strip()
        if key in _INT_KEYS:
            out[key] = int(val)
        elif key in _OPT_INT_KEYS:
            out[key] = None if val in (None, "", "none", "None") else int(val)
        elif key in _FLOAT_KEYS:
            out[key] = float(val)
        elif key == "degree_limits":
            out[key] = val if isinstance(val, (ConstantLimit, PowerLawLimit)) else parse_degree_spec(str(val))
        elif key == "deterministic":
            out[key] = val if isinstance(val, bool) else str(val).lower() in ("1", "true", "yes", "on")
        else:
            out[key] = val
    return out


def read_config_file(path) -> dict:
    """Read ``key = value`` lines (``#`` comments allowed) into a dict of strings."""
    items = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        k, v = s.split("=", 1)
        items[k.strip()] = v.strip()
    return items
