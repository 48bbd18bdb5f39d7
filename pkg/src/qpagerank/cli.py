"""Command-line front end: ``rank``, ``classical`` and ``bench``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .bench import BenchConfig, BenchRow, fit_exponent, measure, run_bench
from .integrator import RKF45Config, StiffnessError, Termination
from .netio import (NetworkParseError, attach_metadata, adjacency, load_edge_list_file)
from .operators import NetworkTooSmall, WalkParameters, build_operators
from .rank import ConvergenceError, classical_pagerank, classify_hubs, quantum_pagerank, rank_nodes

logger = logging.getLogger("qpagerank")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
CLASSICAL_CHECK_TOL = 1e-6

_DEFAULT_PARAMS = WalkParameters()
_DEFAULT_CONFIG = RKF45Config()


class InputError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_walk_flags(p: argparse.ArgumentParser, quantum: bool = True):
    if quantum:
        p.add_argument("--omega", type=float, help=f"classical weight in [0,1] (default {_DEFAULT_PARAMS.omega})")
    p.add_argument("--q", type=float, help=f"Google damping (default {_DEFAULT_PARAMS.q})")
    p.add_argument("--c", type=float, help=f"hub constant (default {_DEFAULT_PARAMS.c})")


def _add_integrator_flags(p: argparse.ArgumentParser, t_max: float | None = None,
                          ss_eps: float | None = None):
    p.add_argument("--tol", type=float, help=f"per-step tolerance (default {_DEFAULT_CONFIG.tol})")
    p.add_argument("--t-max", type=float, dest="t_max",
                   help=f"maximum walk time (default {t_max or _DEFAULT_CONFIG.t_max})")
    p.add_argument("--ss-eps", type=float, dest="ss_eps",
                   help="steady-state residual threshold (default "
                        f"{_DEFAULT_CONFIG.ss_eps if ss_eps is None else ss_eps})")
    p.add_argument("--h0", type=float, help=f"initial step (default {_DEFAULT_CONFIG.h0})")
    p.add_argument("--threads", type=int, default=None, help="kernel worker threads (default 1)")


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", help="edge-list CSV (src,dst per line)")
    p.add_argument("--nodes", help="optional node metadata CSV (label,lon,lat)")
    p.add_argument("--top", type=int, default=None, help="rows in the printed table (default 10)")
    p.add_argument("--format", choices=("json", "csv"), default=None, help="ranking file format")
    p.add_argument("--output-dir", default=None, help="directory for ranking and manifest files")
    p.add_argument("--manifest", help="reuse every parameter recorded in a previous manifest")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpagerank", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="log diagnostics to stderr (-v info, -vv debug)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    rank = sub.add_parser("rank", help="quantum PageRank of a network")
    _add_output_flags(rank)
    _add_walk_flags(rank)
    _add_integrator_flags(rank)
    rank.add_argument("--initial", choices=("mixed", "coherent"), default=None,
                      help="initial state: I/n (mixed) or |s><s| (coherent)")
    rank.add_argument("--classical-check", action="store_true",
                      help="also run classical PageRank and report max |dp|")
    rank.set_defaults(func=cmd_rank)

    classical = sub.add_parser("classical", help="classical PageRank of a network")
    _add_output_flags(classical)
    _add_walk_flags(classical, quantum=False)
    classical.set_defaults(func=cmd_classical)

    bench = sub.add_parser("bench", help="time and memory scaling on synthetic graphs")
    bench.add_argument("--sizes", type=_int_list, required=True, help="node counts, e.g. 50,100,200")
    bench.add_argument("--family", choices=("random", "complete", "scale-free"), default="random")
    bench.add_argument("--degree", type=float, default=15.0, help="mean out-degree (random family)")
    bench.add_argument("--seed", type=int, default=7)
    _add_walk_flags(bench)
    _add_integrator_flags(bench, t_max=10.0, ss_eps=0.0)
    bench.add_argument("--oracle", action="store_true",
                       help="cross-check against the dense superoperator (small n only)")
    bench.add_argument("--mem-limit-mb", type=float, default=None,
                       help="skip rows whose estimated memory exceeds this cap")
    bench.add_argument("--output-dir", default=".")
    bench.set_defaults(func=cmd_bench)
    return parser


def _resolve(args, manifest: dict, key: str, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    for section in ("params", "config", "options"):
        if key in manifest.get(section, {}):
            return manifest[section][key]
    return manifest.get(key, default)


def _load_manifest(path) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"manifest not found: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}")


def _settings(args, quantum: bool):
    manifest = _load_manifest(getattr(args, "manifest", None))
    inputs = manifest.get("inputs", {})
    input_path = args.input or inputs.get("edges")
    if not input_path:
        raise InputError("no input: pass --input or --manifest")
    nodes_path = args.nodes or inputs.get("nodes")
    params = WalkParameters(
        omega=_resolve(args, manifest, "omega", _DEFAULT_PARAMS.omega) if quantum else 1.0,
        q=_resolve(args, manifest, "q", _DEFAULT_PARAMS.q),
        c=_resolve(args, manifest, "c", _DEFAULT_PARAMS.c),
    )
    config = None
    if quantum:
        config = RKF45Config(**{
            k: _resolve(args, manifest, k, v) for k, v in _DEFAULT_CONFIG.as_dict().items()
        })
    options = {
        "top": _resolve(args, manifest, "top", 10),
        "format": _resolve(args, manifest, "format", "json"),
        "threads": _resolve(args, manifest, "threads", 1) if quantum else 1,
        "initial": _resolve(args, manifest, "initial", "mixed") if quantum else None,
        "output_dir": _resolve(args, manifest, "output_dir", "."),
    }
    return input_path, nodes_path, params, config, options


def _load_network(input_path, nodes_path):
    if not os.path.exists(input_path):
        raise InputError(f"input file not found: {input_path}")
    net, report = load_edge_list_file(input_path)
    added = 0
    if nodes_path:
        if not os.path.exists(nodes_path):
            raise InputError(f"node metadata file not found: {nodes_path}")
        with open(nodes_path, encoding="utf-8", newline="") as fh:
            net, added = attach_metadata(net, fh)
    info = report.as_dict()
    info["metadata_added"] = added
    info["nodes"] = net.n
    return net, info


def write_ranking(ranking, path: Path, fmt: str):
    rows = [r.as_dict() for r in ranking]
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=1)
            fh.write("\n")
        return
    fields = ["rank", "label", "probability", "hub_class"]
    if any("lon" in r for r in rows):
        fields += ["lon", "lat"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


def _print_table(ranking, top: int, out=None):
    out = sys.stdout if out is None else out
    print(f"{'rank':>4}  {'label':<24} {'probability':>14}  hub", file=out)
    for r in ranking[:top]:
        print(f"{r.rank:>4}  {r.label:<24} {r.probability:>14.8f}  {r.hub_class.value}", file=out)


def _host() -> dict:
    return {"python": platform.python_version(), "machine": platform.machine(),
            "system": platform.system(), "cpus": os.cpu_count(), "numpy": np.__version__}


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


def _finish_ranking(kind, p, net, params, options, input_path, nodes_path, load_info,
                    seconds, peak, config=None, diagnostics=None, extra=None):
    ranking = rank_nodes(p, net.labels, params.c, net.coords)
    _, counts = classify_hubs(p, params.c)
    out_dir = Path(options["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = options["format"]
    ranking_path = out_dir / f"ranking.{fmt}"
    write_ranking(ranking, ranking_path, fmt)

    manifest = {
        "command": kind,
        "solver_version": __version__,
        "inputs": {"edges": os.path.abspath(input_path),
                   "nodes": os.path.abspath(nodes_path) if nodes_path else None},
        "params": asdict(params),
        "config": config.as_dict() if config else None,
        "options": options,
        "load_report": load_info,
        "counts": counts,
        "wall_seconds": seconds,
        "peak_bytes": peak,
        "diagnostics": diagnostics,
        "outputs": {"ranking": str(ranking_path)},
        "host": _host(),
    }
    if extra:
        manifest.update(extra)
    _write_json(out_dir / "manifest.json", manifest)

    _print_table(ranking, options["top"])
    print(f"hubs: main={counts['main']} secondary={counts['secondary']} rest={counts['rest']}")
    return manifest


def cmd_rank(args) -> int:
    input_path, nodes_path, params, config, options = _settings(args, quantum=True)
    net, load_info = _load_network(input_path, nodes_path)
    m = measure(quantum_pagerank, net, params, config, threads=options["threads"],
                initial=options["initial"])
    p, result = m.value
    extra = {}
    status = EXIT_OK
    if result.terminated_by is not Termination.STEADY_STATE:
        logger.warning("evolution stopped by %s before steady state (residual %.3e)",
                       result.terminated_by.value, result.residual)
    if args.classical_check:
        pc = classical_pagerank(build_operators(adjacency(net), params.q).rates)
        delta = float(np.abs(p - pc).max())
        extra["classical_check"] = {"max_abs_diff": delta}
        print(f"classical check: max |dp| = {delta:.3e}")
        if params.omega == 1.0 and delta >= CLASSICAL_CHECK_TOL:
            print(f"error: omega=1 result differs from classical PageRank by {delta:.3e}",
                  file=sys.stderr)
            status = EXIT_NUMERIC
    _finish_ranking("rank", p, net, params, options, input_path, nodes_path, load_info,
                    m.seconds, m.peak_bytes, config, result.diagnostics(), extra)
    return status


def cmd_classical(args) -> int:
    input_path, nodes_path, params, _, options = _settings(args, quantum=False)
    net, load_info = _load_network(input_path, nodes_path)

    def solve():
        return classical_pagerank(build_operators(adjacency(net), params.q).rates)

    m = measure(solve)
    _finish_ranking("classical", m.value, net, params, options, input_path, nodes_path,
                    load_info, m.seconds, m.peak_bytes)
    return EXIT_OK


def cmd_bench(args) -> int:
    params = WalkParameters(
        omega=_DEFAULT_PARAMS.omega if args.omega is None else args.omega,
        q=_DEFAULT_PARAMS.q if args.q is None else args.q,
        c=_DEFAULT_PARAMS.c if args.c is None else args.c,
    )
    overrides = {k: getattr(args, k) for k in ("tol", "t_max", "ss_eps", "h0")
                 if getattr(args, k) is not None}
    config = RKF45Config(**{"t_max": 10.0, "ss_eps": 0.0, **overrides})
    bc = BenchConfig(
        sizes=args.sizes, family=args.family, mean_degree=args.degree, seed=args.seed,
        params=params, config=config, threads=args.threads or 1, oracle=args.oracle,
        mem_limit_bytes=None if args.mem_limit_mb is None else int(args.mem_limit_mb * 2**20),
    )
    t0 = time.perf_counter()
    rows = run_bench(bc)
    ok = [r for r in rows if r.status == "ok"]
    slope = fit_exponent([r.n for r in ok], [r.seconds for r in ok])

    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "bench.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BenchRow.FIELDS, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(r.as_dict())
    _write_json(out_dir / "bench_manifest.json", {
        "command": "bench",
        "solver_version": __version__,
        "bench": bc.as_dict(),
        "time_exponent": slope,
        "wall_seconds": time.perf_counter() - t0,
        "host": _host(),
    })

    print(f"{'n':>6} {'seconds':>10} {'peak_bytes':>12} {'slots/n^2':>10}  status")
    for r in rows:
        print(f"{r.n:>6} {r.seconds:>10.4f} {r.peak_bytes:>12} {r.slots_per_n2:>10.2f}  {r.status}"
              + ("" if np.isnan(r.oracle_error) else f"  oracle_err={r.oracle_error:.2e}"))
    print(f"time scaling exponent: {slope:.3f}")
    if any(r.n4_free == "no" for r in rows):
        print("error: a run allocated as much as an n^2 x n^2 matrix", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s %(message)s")
    try:
        return args.func(args)
    except (InputError, NetworkParseError, NetworkTooSmall, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StiffnessError, ConvergenceError) as exc:
        diag = getattr(exc, "diagnostics", None) or {"residual": getattr(exc, "residual", None)}
        print(f"error: numerical failure: {exc} {json.dumps(diag, default=str)}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
