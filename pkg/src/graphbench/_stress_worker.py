"""Subprocess body for one stress-ladder rung.

Reads a JSON job on stdin, applies the address-space cap, generates the
graph, runs the kernel once and prints a JSON result line. Exit code 3
means the rung ran out of memory.
"""

import json
import resource
import sys


def _cap(mem_cap):
    if mem_cap:
        resource.setrlimit(resource.RLIMIT_AS, (int(mem_cap), int(mem_cap)))


def main() -> int:
    job = json.loads(sys.stdin.read())
    _cap(job.get("mem_cap"))
    out = {"outcome": "fail", "reason": None, "dataset": None, "m": None}
    try:
        from .generator import GeneratorConfig, generate_any, parse_config_items
        from .graph import build_csr, dataset_name
        from .kernels import KernelParams, run_kernel

        cfg = GeneratorConfig(**parse_config_items(job["config"]))
        g = build_csr(generate_any(cfg)[0])
        out["m"] = g.m
        out["dataset"] = str(dataset_name(g.n, g.m, "Diam" if cfg.target_diameter else "Std"))
        run_kernel(job["kernel"], g, KernelParams(**job["params"]), job["threads"])
        out["outcome"] = "pass"
        code = 0
    except MemoryError:
        out["reason"] = "OOM"
        code = 3
    except Exception as exc:
        out["reason"] = f"error: {type(exc).__name__}: {exc}"
        code = 1
    out["peak_memory_bytes"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    print(json.dumps(out), flush=True)
    return code


if __name__ == "__main__":
    sys.exit(main())
