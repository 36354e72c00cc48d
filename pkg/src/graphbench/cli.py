"""``graphbench`` command line: generate, stats, bench, compare.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
Every command that writes files also writes ``<output>.manifest.json``
holding the full configuration, so ``--config <manifest>`` reruns it.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    MEM_CAP_ENV,
    TrioRecipe,
    impact_matrix,
    parse_mem_cap,
    read_ladder_file,
    run_once,
    speedup_suite,
    stress_ladder,
    write_csv,
    write_jsonl,
    write_trio,
)
from .generator import (
    ConfigError,
    GeneratorConfig,
    LdbcRefConfig,
    calibrate_degree_scale,
    generate_any,
    generate_ldbc_reference,
    group_ids,
    parse_config_items,
    read_config_file,
)
from .graph import (
    FORMATS,
    VARIANTS,
    GraphInputError,
    build_csr,
    dataset_name,
    detect_format,
    read_edge_list,
    sidecar,
    write_edge_list,
)
from .kernels import KERNEL_NAMES, KernelParams
from .stats import BRIDGE_MODES, community_stats, detect_communities, graph_stats, similarity_report

log = logging.getLogger("graphbench")

# generate flags that may also come from --config; CLI value wins when given
GENERATE_DEFAULTS = {
    "n": None,
    "alpha": 10.0,
    "target_diameter": None,
    "group_diameter": 6,
    "degree_dist": "powerlaw:1.8:10",
    "seed": 0,
    "weights": "unit",
    "max_edges": None,
    "degree_scale": 1.0,
    "match_edges": None,
    "threads": 1,
    "deterministic": True,
    "ldbc_reference": False,
    "p": 0.95,
    "p_limit": 0.2,
    "format": "text",
    "variant": None,
    "out": None,
}


class UsageError(Exception):
    """Bad flag combination; mapped to exit code 2."""


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="milliseconds")


def write_manifest(primary_output, command: str, config: dict, started: str, outputs: list) -> Path:
    path = sidecar(primary_output, "manifest.json")
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "version": __version__,
        "started": started,
        "finished": _now(),
        "outputs": [str(p) for p in outputs],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path


def load_config_source(path) -> dict:
    """A manifest JSON (its ``config`` block) or a flat ``key = value`` file."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return dict(data.get("config", data))
    return read_config_file(path)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------


def _bool(text) -> bool:
    return text if isinstance(text, bool) else str(text).strip().lower() in ("1", "true", "yes", "on")


def resolve_generate_options(args) -> dict:
    opts = dict(GENERATE_DEFAULTS)
    if args.config:
        for k, v in load_config_source(args.config).items():
            key = k.replace("-", "_")
            if key == "degree_limits":
                key = "degree_dist"
            if key in opts:
                opts[key] = v
    for key in opts:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    for key in ("ldbc_reference", "deterministic"):
        opts[key] = _bool(opts[key])
    if opts["n"] is None:
        raise UsageError("--n is required (directly or via --config)")
    if opts["out"] is None:
        raise UsageError("--out is required (directly or via --config)")
    if opts["ldbc_reference"] and opts["target_diameter"] not in (None, "", "None"):
        raise UsageError("--target-diameter cannot be combined with --ldbc-reference")
    if opts["format"] not in FORMATS:
        raise UsageError(f"--format must be one of {FORMATS}")
    return opts


def _build_config(opts: dict):
    common = {"n": opts["n"], "seed": opts["seed"], "degree_limits": opts["degree_dist"],
              "degree_scale": opts["degree_scale"], "weights": opts["weights"]}
    if opts["ldbc_reference"]:
        return LdbcRefConfig(**parse_config_items({**common, "p": opts["p"], "p_limit": opts["p_limit"]}))
    return GeneratorConfig(
        **parse_config_items(
            {
                **common,
                "alpha": opts["alpha"],
                "target_diameter": opts["target_diameter"],
                "group_diameter": opts["group_diameter"],
                "max_edges": opts["max_edges"],
                "threads": opts["threads"],
                "deterministic": opts["deterministic"],
            }
        )
    )


def cmd_generate(args) -> int:
    started = _now()
    opts = resolve_generate_options(args)
    config = _build_config(opts)
    config.validate()
    if opts["match_edges"] not in (None, "", "None"):
        config, edges, report = calibrate_degree_scale(config, int(opts["match_edges"]))
    elif isinstance(config, LdbcRefConfig):
        edges, report = generate_ldbc_reference(config)
    else:
        edges, report = generate_any(config)

    out = Path(opts["out"])
    write_edge_list(edges, out, opts["format"])
    variant = opts["variant"] or ("Diam" if getattr(config, "target_diameter", None) else "Std")
    if variant not in VARIANTS:
        raise UsageError(f"--variant must be one of {VARIANTS}")
    g = build_csr(edges)
    name = dataset_name(g.n, g.m, variant)
    report_path = sidecar(out, "report.json")
    report_dict = {**report.to_dict(), "dataset": str(name), "n": g.n, "m": g.m}
    report_path.write_text(json.dumps(report_dict, indent=2, sort_keys=True) + "\n")

    # the snapshot is the resolved option set, with calibration folded in
    snapshot = {**opts, "degree_scale": config.degree_scale, "match_edges": None, "out": str(out)}
    snapshot["degree_dist"] = str(config.degree_limits)
    write_manifest(out, "generate", snapshot, started, [out, report_path])
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(name)
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def _resolve_format(path, fmt: str) -> str:
    return detect_format(path) if fmt == "auto" else fmt


def _group_assignment(path, n: int) -> np.ndarray:
    rep = sidecar(path, "report.json")
    try:
        group_size = json.loads(rep.read_text())["group_size"]
    except (OSError, KeyError, json.JSONDecodeError):
        raise GraphInputError(f"--communities groups needs a grouped-generation report at {rep}") from None
    return group_ids(n, float(group_size))


def cmd_stats(args) -> int:
    started = _now()
    g = build_csr(read_edge_list(args.input, _resolve_format(args.input, args.format)))
    result = {"graph": str(args.input), "stats": graph_stats(g).to_dict()}
    if args.communities:
        if args.communities == "groups":
            assignment = _group_assignment(args.input, g.n)
        else:
            assignment = detect_communities(g, args.communities)
        cs = community_stats(g, assignment, args.bridge_mode)
        result["communities"] = {
            "method": args.communities,
            "count": len(cs),
            "bridge_mode": args.bridge_mode,
            "mean": {m: float(np.mean(cs.metric(m))) for m in ("cc", "tpr", "br", "diam", "cond", "size")},
        }
        if args.csv:
            cs.write_csv(args.csv)
    text = json.dumps(result, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
        outputs = [args.out] + ([args.csv] if args.csv else [])
        write_manifest(args.out, "stats", _args_snapshot(args), started, outputs)
    return 0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _kernel_list(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if names == ["all"]:
        return list(KERNEL_NAMES)
    bad = [s for s in names if s not in KERNEL_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown kernel {','.join(bad) or text!r}; valid: {', '.join(KERNEL_NAMES)}, all"
        )
    return names


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("thread counts must be positive")
    return vals


def _params(args) -> KernelParams:
    return KernelParams(max_iters=args.max_iters, source=args.source, k=args.k, damping=args.damping)


def _emit(lines: list[dict], out) -> None:
    for d in lines:
        print(json.dumps(d, sort_keys=True))
    if out:
        write_jsonl(lines, out)


def cmd_bench(args) -> int:
    started = _now()
    params = _params(args)
    if args.stress:
        return _bench_stress(args, params, started)
    inputs = list(args.input or [])
    if args.trio:
        inputs += [str(p) for p in write_trio(args.trio, TrioRecipe(n=args.trio_n, seed=args.seed), args.format).values()]
    if not inputs:
        raise UsageError("bench needs --in PATH (repeatable) or --trio DIR")
    lines = []
    if len(inputs) > 1 or args.impact_csv:
        labels = {Path(p).stem: p for p in inputs}
        for t in args.threads:
            grid = impact_matrix(labels, args.kernel, params, t, args.repeat, args.format)
            lines += [c.to_dict() for c in grid.cells]
            if args.impact_csv:
                write_csv(grid.rows(), args.impact_csv)
    else:
        for k in args.kernel:
            for t in args.threads:
                lines.append(run_once(k, inputs[0], params, t, args.repeat, args.format).to_dict())
    if args.speedup:
        g = build_csr(read_edge_list(inputs[0], args.format))
        tables = [speedup_suite(k, g, args.threads, params, args.repeat) for k in args.kernel]
        lines += [{"speedup": t.to_dict()} for t in tables]
        if args.speedup_csv:
            write_csv([r for t in tables for r in t.rows()], args.speedup_csv)
    _emit(lines, args.out)
    if args.out:
        outputs = [args.out] + [p for p in (args.impact_csv, args.speedup_csv) if p]
        write_manifest(args.out, "bench", _args_snapshot(args), started, outputs)
    return 0


def _bench_stress(args, params, started) -> int:
    if not args.ladder:
        raise UsageError("--stress needs --ladder FILE")
    if len(args.kernel) != 1:
        raise UsageError("--stress runs a single kernel")
    cap = parse_mem_cap(args.mem_cap) if args.mem_cap else None
    rows = stress_ladder(args.kernel[0], read_ladder_file(args.ladder), params, args.threads[0], cap, args.timeout)
    _emit([r.to_dict() for r in rows], args.out)
    if args.csv:
        write_csv([r.to_dict() for r in rows], args.csv)
    if args.out:
        write_manifest(args.out, "bench", _args_snapshot(args), started, [args.out])
    return 0


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def cmd_compare(args) -> int:
    started = _now()
    ga = build_csr(read_edge_list(args.a, _resolve_format(args.a, args.format)))
    gb = build_csr(read_edge_list(args.b, _resolve_format(args.b, args.format)))
    rep = similarity_report(ga, gb, args.method, args.bridge_mode, KernelParams(max_iters=args.max_iters))
    result = {"a": str(args.a), "b": str(args.b), **rep.to_dict()}
    text = json.dumps(result, indent=2, sort_keys=True)
    print(text)
    if rep.degenerate:
        print("warning: a graph produced fewer than two communities", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(text + "\n")
        write_manifest(args.out, "compare", _args_snapshot(args), started, [args.out])
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _args_snapshot(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphbench", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic graph")
    g.add_argument("--config", help="manifest JSON or key=value file; explicit flags override it")
    g.add_argument("--n", type=int)
    g.add_argument("--alpha", type=float, help="density factor (default 10)")
    g.add_argument("--target-diameter", type=int)
    g.add_argument("--group-diameter", type=int, help="diameter of one group (default 6)")
    g.add_argument("--degree-dist", help="const:K or powerlaw:EXP:MIN[:MAX] (default powerlaw:1.8:10)")
    g.add_argument("--degree-scale", type=float, help="multiply every degree limit")
    g.add_argument("--match-edges", type=int, help="rescale degree limits to produce about this many edges")
    g.add_argument("--seed", type=int)
    g.add_argument("--weights", choices=("unit", "uniform"))
    g.add_argument("--max-edges", type=int)
    g.add_argument("--threads", type=int)
    g.add_argument("--nondeterministic", dest="deterministic", action="store_const", const=False,
                   help="parallel generation; degree-limit races may change the edge set")
    g.add_argument("--ldbc-reference", action="store_const", const=True,
                   help="use the sequential-trial reference sampler")
    g.add_argument("--p", type=float, help="reference sampler base probability (default 0.95)")
    g.add_argument("--p-limit", type=float, help="reference sampler probability floor (default 0.2)")
    g.add_argument("--variant", choices=VARIANTS, help="dataset name suffix (default Std, or Diam with a target)")
    g.add_argument("--out")
    g.add_argument("--format", choices=FORMATS)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("stats", help="graph statistics as JSON")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--format", choices=(*FORMATS, "auto"), default="text")
    s.add_argument("--communities", choices=("lpa", "wcc", "groups"))
    s.add_argument("--bridge-mode", choices=BRIDGE_MODES, default="bridges")
    s.add_argument("--csv", help="per-community records")
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    b = sub.add_parser("bench", help="timed kernel runs (JSON lines)")
    b.add_argument("--in", dest="input", action="append", help="graph file; repeat for an impact grid")
    b.add_argument("--kernel", type=_kernel_list, default=["pr"], help=f"{','.join(KERNEL_NAMES)} or all")
    b.add_argument("--threads", type=_int_list, default=[1], help="comma-separated thread counts")
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--max-iters", type=int, default=10)
    b.add_argument("--source", type=int, default=0)
    b.add_argument("--k", type=int, default=5)
    b.add_argument("--damping", type=float, default=0.85)
    b.add_argument("--format", choices=FORMATS, default="text")
    b.add_argument("--speedup", action="store_true", help="also compute a speedup table")
    b.add_argument("--speedup-csv")
    b.add_argument("--impact-csv", help="kernel x dataset running-time CSV")
    b.add_argument("--trio", metavar="DIR", help="generate the Std/Dense/Diam trio into DIR and bench it")
    b.add_argument("--trio-n", type=int, default=100_000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--stress", action="store_true")
    b.add_argument("--ladder", help="one rung per line, key=value generator settings")
    b.add_argument("--mem-cap", help=f"address-space cap per rung, e.g. 2G (default ${MEM_CAP_ENV})")
    b.add_argument("--timeout", type=float, default=600.0)
    b.add_argument("--csv")
    b.add_argument("--out", help="JSON-lines report file")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("compare", help="community-statistic JSD between two graphs")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--format", choices=(*FORMATS, "auto"), default="text")
    c.add_argument("--method", choices=("lpa", "wcc"), default="lpa")
    c.add_argument("--bridge-mode", choices=BRIDGE_MODES, default="bridges")
    c.add_argument("--max-iters", type=int, default=10)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"graphbench: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, GraphInputError, ConfigError, ValueError, json.JSONDecodeError) as exc:
        print(f"graphbench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
