"""Benchmark harness: timed kernel runs, thread scaling, stress ladders and
the kernel-by-dataset impact grid.

A run is split into upload (read + CSR build), running (kernel only, median
of ``repeat`` runs) and write (result file). Makespan adds the harness time
spent outside those sections, so it is never below their sum.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import statistics
import subprocess
import sys
import tempfile
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .generator import GeneratorConfig, calibrate_degree_scale, generate_any
from .graph import CsrGraph, EdgeList, build_csr, dataset_name, read_edge_list, write_edge_list
from .kernels import KERNEL_NAMES, KERNELS, KernelParams, available_threads, run_kernel

log = logging.getLogger(__name__)

DEFAULT_THREADS = (1, 2, 4, 8, 16, 32)
MEM_CAP_ENV = "GRAPHBENCH_MEM_CAP"
_UNITS = {"": 1, "B": 1, "K": 1 << 10, "M": 1 << 20, "G": 1 << 30, "T": 1 << 40}
_warmed: set[str] = set()


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class BenchReport:
    kernel: str
    dataset: str
    threads: int
    effective_threads: int = 1
    n: int = 0
    m: int = 0
    upload_time_s: float = 0.0
    running_time_s: float = 0.0
    write_time_s: float = 0.0
    makespan_s: float = 0.0
    throughput_eps: float = 0.0
    repeat: int = 0
    run_times_s: list[float] = field(default_factory=list)
    scalar: int | None = None
    outcome: str = "pass"
    reason: str | None = None
    graph: str | None = None
    label: str | None = None

    @property
    def ok(self) -> bool:
        return self.outcome == "pass"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class SpeedupTable:
    kernel: str
    thread_counts: list[int]
    times: list[float]
    factors: list[float]
    requested: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def rows(self) -> list[dict]:
        return [
            {"kernel": self.kernel, "threads": t, "running_time_s": s, "speedup": f}
            for t, s, f in zip(self.thread_counts, self.times, self.factors)
        ]


@dataclass
class StressRow:
    rung: int
    n: int
    dataset: str | None
    outcome: str  # pass | fail | not-attempted
    reason: str | None = None
    m: int | None = None
    peak_memory_bytes: int | None = None
    wall_time_s: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def write_jsonl(records, path, append: bool = False) -> None:
    with open(path, "a" if append else "w") as fh:
        for r in records:
            d = r.to_dict() if hasattr(r, "to_dict") else r
            fh.write(json.dumps(d, sort_keys=True) + "\n")


def write_csv(rows: list[dict], path) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


# ---------------------------------------------------------------------------
# Single runs
# ---------------------------------------------------------------------------


def _check_kernel(kernel: str) -> None:
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; valid: {', '.join(KERNEL_NAMES)}")


def warm_up(kernel: str) -> None:
    """Trigger JIT compilation on a tiny graph so it is not timed."""
    if kernel in _warmed:
        return
    g = build_csr(EdgeList.from_pairs(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (1, 3), (0, 3), (1, 4)]))
    run_kernel(kernel, g, KernelParams(k=3))
    _warmed.add(kernel)


def time_kernel(kernel: str, g: CsrGraph, params: KernelParams, threads: int, repeat: int):
    """Median running time over ``repeat`` runs, the per-run times, last result."""
    warm_up(kernel)
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = run_kernel(kernel, g, params, threads)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), times, result


def run_once(
    kernel: str,
    graph_path,
    params: KernelParams = KernelParams(),
    threads: int = 1,
    repeat: int = 3,
    fmt: str = "text",
    variant: str = "Std",
    result_path=None,
) -> BenchReport:
    """Load, run and write one kernel; failures come back as ``outcome="fail"``."""
    _check_kernel(kernel)
    if repeat < 1:
        raise ValueError("repeat must be >= 1")
    report = BenchReport(
        kernel=kernel,
        dataset="?",
        threads=threads,
        effective_threads=min(threads, available_threads()),
        repeat=repeat,
        graph=str(graph_path),
    )
    t_start = time.perf_counter()
    try:
        t0 = time.perf_counter()
        g = build_csr(read_edge_list(graph_path, fmt))
        report.upload_time_s = time.perf_counter() - t0
        report.n, report.m = g.n, g.m
        report.dataset = str(dataset_name(max(g.n, 1), g.m, variant))

        report.running_time_s, report.run_times_s, result = time_kernel(kernel, g, params, threads, repeat)
        report.scalar = result.scalar

        t0 = time.perf_counter()
        if result_path is not None:
            result.write(result_path)
        else:
            with tempfile.TemporaryDirectory() as tmp:
                result.write(Path(tmp) / "result.txt")
        report.write_time_s = time.perf_counter() - t0
    except MemoryError:
        report.outcome, report.reason = "fail", "OOM"
    except Exception as exc:  # failures are data, not crashes
        report.outcome, report.reason = "fail", f"{type(exc).__name__}: {exc}"
    total = time.perf_counter() - t_start
    measured = report.upload_time_s + sum(report.run_times_s) + report.write_time_s
    overhead = max(0.0, total - measured)
    report.makespan_s = report.upload_time_s + report.running_time_s + report.write_time_s + overhead
    if report.ok:
        report.throughput_eps = report.m / report.running_time_s if report.m and report.running_time_s > 0 else 0.0
    return report


# ---------------------------------------------------------------------------
# Thread scaling
# ---------------------------------------------------------------------------


def usable_thread_counts(thread_counts) -> list[int]:
    cores = available_threads()
    keep = [t for t in thread_counts if t <= cores]
    if len(keep) < len(thread_counts):
        dropped = [t for t in thread_counts if t > cores]
        warnings.warn(f"only {cores} worker thread(s) available; dropping thread counts {dropped}")
    return keep or [1]


def speedup_suite(
    kernel: str,
    graph: CsrGraph,
    thread_counts=DEFAULT_THREADS,
    params: KernelParams = KernelParams(),
    repeat: int = 3,
) -> SpeedupTable:
    """``time(t_0) / time(t)`` over the usable thread counts; ``t_0`` is the first count."""
    _check_kernel(kernel)
    requested = list(thread_counts)
    counts = usable_thread_counts(requested)
    times = [time_kernel(kernel, graph, params, t, repeat)[0] for t in counts]
    base = times[0]
    factors = [base / t if t > 0 else float("inf") for t in times]
    factors[0] = 1.0
    return SpeedupTable(kernel, counts, times, factors, requested)


# ---------------------------------------------------------------------------
# Stress ladder
# ---------------------------------------------------------------------------


def parse_mem_cap(text: str | None) -> int | None:
    """``"2G"``, ``"512M"``, ``"1073741824"`` to bytes; empty means no cap."""
    if text is None or not str(text).strip():
        return None
    s = str(text).strip().upper().removesuffix("B") or "0"
    unit = s[-1] if s[-1] in _UNITS else ""
    num = s[:-1] if unit else s
    try:
        return int(float(num) * _UNITS[unit])
    except ValueError:
        raise ValueError(f"bad memory cap {text!r}") from None


def _rung_payload(kernel, config: GeneratorConfig, params: KernelParams, threads: int, mem_cap) -> str:
    return json.dumps(
        {
            "kernel": kernel,
            "config": config.to_dict(),
            "params": asdict(params),
            "threads": threads,
            "mem_cap": mem_cap,
        }
    )


def stress_ladder(
    kernel: str,
    configs: list[GeneratorConfig],
    params: KernelParams = KernelParams(),
    threads: int = 1,
    mem_cap: int | None = None,
    timeout_s: float | None = 600.0,
) -> list[StressRow]:
    """Generate and run each rung in a capped subprocess until one fails.

    ``mem_cap`` defaults to the ``GRAPHBENCH_MEM_CAP`` environment variable.
    """
    _check_kernel(kernel)
    ns = [c.n for c in configs]
    if ns != sorted(ns):
        raise ValueError("stress ladder rungs must be sorted by scale (ascending n)")
    if mem_cap is None:
        mem_cap = parse_mem_cap(os.environ.get(MEM_CAP_ENV))
    rows: list[StressRow] = []
    failed = False
    for i, cfg in enumerate(configs):
        if failed:
            rows.append(StressRow(i, cfg.n, None, "not-attempted"))
            continue
        row = _run_rung(i, kernel, cfg, params, threads, mem_cap, timeout_s)
        rows.append(row)
        failed = row.outcome != "pass"
    return rows


def _run_rung(i, kernel, cfg, params, threads, mem_cap, timeout_s) -> StressRow:
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(
            [sys.executable, "-m", "graphbench._stress_worker"],
            input=_rung_payload(kernel, cfg, params, threads, mem_cap),
            capture_output=True,
            text=True,
            timeout=timeout_s,
        )
    except subprocess.TimeoutExpired:
        return StressRow(i, cfg.n, None, "fail", "timeout", wall_time_s=time.perf_counter() - t0)
    wall = time.perf_counter() - t0
    out = {}
    for line in reversed(proc.stdout.splitlines()):
        try:
            out = json.loads(line)
            break
        except json.JSONDecodeError:
            continue
    if proc.returncode == 0 and out.get("outcome") == "pass":
        return StressRow(i, cfg.n, out["dataset"], "pass", None, out["m"], out.get("peak_memory_bytes"), wall)
    if out.get("reason"):
        reason = out["reason"]
    elif proc.returncode < 0 or "MemoryError" in proc.stderr or "std::bad_alloc" in proc.stderr:
        # killed by a signal or the allocator gave up: treat as out of memory
        reason = "OOM"
    else:
        tail = proc.stderr.strip().splitlines()[-1:] or [f"exit code {proc.returncode}"]
        reason = f"error: {tail[0]}"
    return StressRow(i, cfg.n, out.get("dataset"), "fail", reason, out.get("m"), out.get("peak_memory_bytes"), wall)


def read_ladder_file(path) -> list[GeneratorConfig]:
    """One rung per line as ``key=value`` pairs separated by whitespace."""
    from .generator import parse_config_items

    rungs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        items = {}
        for tok in s.replace(",", " ").split():
            if "=" not in tok:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {tok!r}")
            k, v = tok.split("=", 1)
            items[k] = v
        rungs.append(GeneratorConfig(**parse_config_items(items)))
    return rungs


# ---------------------------------------------------------------------------
# Impact grid
# ---------------------------------------------------------------------------


@dataclass
class ImpactMatrix:
    kernels: list[str]
    datasets: list[str]
    cells: list[BenchReport]

    def time(self, kernel: str, dataset: str) -> float:
        for r in self.cells:
            if r.kernel == kernel and r.label == dataset:
                return r.running_time_s if r.ok else float("nan")
        raise KeyError((kernel, dataset))

    def rows(self) -> list[dict]:
        out = []
        for k in self.kernels:
            row = {"kernel": k}
            for d in self.datasets:
                row[d] = self.time(k, d)
            out.append(row)
        return out


def impact_matrix(
    graphs: dict[str, str | Path],
    kernels=KERNEL_NAMES,
    params: KernelParams = KernelParams(),
    threads: int = 1,
    repeat: int = 3,
    fmt: str = "text",
) -> ImpactMatrix:
    """Every kernel on every labelled graph file; per-cell failures are kept."""
    cells = []
    for label, path in graphs.items():
        variant = label.split("-")[-1] if label.split("-")[-1] in ("Std", "Dense", "Diam") else "Std"
        for k in kernels:
            r = run_once(k, path, params, threads, repeat, fmt, variant)
            r.label = label
            cells.append(r)
    return ImpactMatrix(list(kernels), list(graphs), cells)


@dataclass(frozen=True)
class TrioRecipe:
    """How the three same-budget datasets are derived from one vertex count."""

    n: int = 100_000
    alpha: float = 10.0
    dense_alpha: float = 1000.0
    dense_shrink: int = 3
    target_diameter: int = 100
    seed: int = 0

    def configs(self) -> dict[str, GeneratorConfig]:
        return {
            "Std": GeneratorConfig(self.n, alpha=self.alpha, seed=self.seed),
            "Dense": GeneratorConfig(self.n // self.dense_shrink, alpha=self.dense_alpha, seed=self.seed),
            "Diam": GeneratorConfig(
                self.n, alpha=self.alpha, target_diameter=self.target_diameter, seed=self.seed
            ),
        }


def build_trio(recipe: TrioRecipe = TrioRecipe()) -> dict[str, tuple[GeneratorConfig, EdgeList]]:
    """Std as configured; Dense and Diam have degree limits rescaled to match Std's m."""
    cfgs = recipe.configs()
    std_edges, _ = generate_any(cfgs["Std"])
    out = {"Std": (cfgs["Std"], std_edges)}
    for name in ("Dense", "Diam"):
        cfg, edges, _ = calibrate_degree_scale(cfgs[name], len(std_edges))
        out[name] = (cfg, edges)
    return out


def write_trio(out_dir, recipe: TrioRecipe = TrioRecipe(), fmt: str = "text") -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for variant, (cfg, edges) in build_trio(recipe).items():
        label = str(dataset_name(edges.n, len(edges), variant))
        path = out_dir / f"{label}.{'txt' if fmt == 'text' else 'bin'}"
        write_edge_list(edges, path, fmt)
        (out_dir / f"{label}.config.json").write_text(json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n")
        paths[label] = path
    return paths


def variant_graphs(recipe: TrioRecipe = TrioRecipe()) -> dict[str, CsrGraph]:
    return {name: build_csr(edges) for name, (_, edges) in build_trio(recipe).items()}
