"""Command-line front end.

    mpcconn gen gnm n=100 m=300 --seed 7 --out g.txt
    mpcconn run g.txt --out labels.txt --metrics metrics.json
    mpcconn verify labels.txt g.txt
    mpcconn bench --suite cycles --out bench.csv
    mpcconn matching --gen "cycle n=40"
    mpcconn hitset --random 4096 32 --seed 1

Exit codes: 0 success, 1 verification failure, 2 bad input, 3 capacity
violation (a JSON error record goes to stderr), 4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import graph, oracle
from .connectivity import PipelineConfig, run_components
from .errors import CapacityError, InvariantError
from .hitting_set import derand_hitting_set, random_instance, read_instance, standalone_config
from .matching import derand_matching
from .mpc import MpcConfig, Simulator

BENCH_COLUMNS = ("graph", "n", "m", "D", "rounds", "peak_local", "peak_global", "total_ops")

SUITES = {
    "cycles": [f"cycle n={1 << k}" for k in range(8, 13)],
    "stars": [f"star n={1 << k}" for k in range(8, 15, 2)],
    "hypercubes": [f"hypercube dim={k}" for k in range(8, 15, 2)],
    "gnm": [f"gnm n={1 << k} m={4 << k} seed=0" for k in range(10, 15)],
    "smoke": ["path n=64", "cycle n=64", "star n=64", "grid dims=8x8",
              "two_cycles n=64", "tree n=64 seed=1", "gnm n=64 m=128 seed=1 isolated=4"],
    "corpus": graph.corpus(),
}


class InputError(Exception):
    pass


# --- shared helpers -------------------------------------------------------------

def _pipeline_config(args) -> PipelineConfig:
    try:
        return PipelineConfig(delta=args.delta, gamma=args.gamma, c=args.c,
                              kappa_global=args.kappa_global, unsafe=args.unsafe)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _spec_params(items, seed):
    params = {}
    for item in items:
        if "=" not in item:
            raise InputError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k] = v
    if seed is not None:
        params["seed"] = seed
    return params


def _load_graph(args):
    if getattr(args, "gen", None):
        try:
            kind, params = graph.parse_spec(args.gen)
            return graph.generate(kind, **params)
        except (KeyError, ValueError) as exc:
            raise InputError(f"bad generator spec {args.gen!r}: {exc}") from None
    if not args.input:
        raise InputError("give an edge-list path or --gen SPEC")
    try:
        return graph.read_edge_list(args.input)
    except OSError as exc:
        raise InputError(str(exc)) from None


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump_json(obj, indent: int | None = 1) -> str:
    return json.dumps(obj, sort_keys=True, indent=indent) + "\n"


def format_metrics(metrics: dict, fmt: str) -> str:
    if fmt == "json":
        return _dump_json(metrics)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k in sorted(metrics):
        w.writerow([k, metrics[k]])
    return buf.getvalue()


def format_labels(labels) -> str:
    return "".join(f"{v} {lab}\n" for v, lab in enumerate(labels.tolist(), 1))


def parse_labels(text: str) -> dict[int, int]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"labels line {lineno}: expected 'vertex label', got {raw!r}")
        try:
            v, lab = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"labels line {lineno}: non-integer field in {raw!r}") from None
        if v in out:
            raise InputError(f"labels line {lineno}: vertex {v} listed twice")
        out[v] = lab
    return out


# --- subcommands -------------------------------------------------------------------------

def cmd_gen(args) -> int:
    params = _spec_params(args.params, args.seed)
    try:
        edges, n = graph.generate(args.kind, **params)
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad parameters for {args.kind}: {exc}") from None
    _emit(graph.format_edge_list(edges, n), args.out)
    return 0


def cmd_run(args) -> int:
    cfg = _pipeline_config(args)
    edges, n = _load_graph(args)
    res = run_components(edges, n, cfg)
    _emit(format_labels(res.labels), args.out)
    if args.metrics:
        _emit(format_metrics(res.metrics.to_dict(), args.format), args.metrics)
    return 0


def verify_labels(labels: dict[int, int], edges, n: int) -> dict:
    """Check label equality against union-find roots; first counterexample wins."""
    missing = [v for v in range(1, n + 1) if v not in labels]
    if missing:
        return {"status": "fail", "reason": "missing_label", "vertex": missing[0]}
    extra = sorted(v for v in labels if not 1 <= v <= n)
    if extra:
        return {"status": "fail", "reason": "unknown_vertex", "vertex": extra[0]}
    uf = oracle.UnionFind(n)
    edge_list = [tuple(e) for e in edges.reshape(-1, 2).tolist()]
    for u, v in edge_list:
        uf.union(u, v)
    for u, v in edge_list:
        if labels[u] != labels[v]:
            return {"status": "fail", "reason": "split_component", "edge": [u, v],
                    "labels": [labels[u], labels[v]]}
    owner: dict[int, int] = {}
    for v in range(1, n + 1):
        root = uf.find(v)
        first = owner.setdefault(labels[v], v)
        if uf.find(first) != root:
            return {"status": "fail", "reason": "merged_components", "pair": [first, v],
                    "label": labels[v]}
    comps = len({uf.find(v) for v in range(1, n + 1)})
    return {"status": "pass", "n": n, "m": len(edge_list), "components": comps}


def cmd_verify(args) -> int:
    try:
        labels = parse_labels(Path(args.labels).read_text())
        edges, n = graph.read_edge_list(args.edges)
    except OSError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = verify_labels(labels, edges, n)
    _emit(_dump_json(report), args.out)
    return 0 if report["status"] == "pass" else 1


def bench_rows(specs, cfg: PipelineConfig) -> list[dict]:
    rows = []
    for spec in specs:
        kind, params = graph.parse_spec(spec)
        edges, n = graph.generate(kind, **params)
        res = run_components(edges, n, cfg)
        m = int(graph.normalize_edges(edges).shape[0])
        rows.append({"graph": spec, "n": n, "m": m, "D": oracle.diameter(edges, n),
                     "rounds": res.metrics.rounds, "peak_local": res.metrics.peak_local,
                     "peak_global": res.metrics.peak_global,
                     "total_ops": res.metrics.total_ops})
    return rows


def format_bench(rows, fmt: str) -> str:
    if fmt == "json":
        return _dump_json(rows)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _suite_specs(args) -> list[str]:
    specs = list(args.graph or [])
    for name in args.suite or []:
        if name in SUITES:
            specs.extend(SUITES[name])
            continue
        try:
            text = Path(name).read_text()
        except OSError:
            raise InputError(f"unknown suite {name!r}; builtin: {', '.join(sorted(SUITES))}") from None
        specs.extend(ln.strip() for ln in text.splitlines()
                     if ln.strip() and not ln.lstrip().startswith("#"))
    return specs


def cmd_bench(args) -> int:
    cfg = _pipeline_config(args)
    try:
        rows = bench_rows(_suite_specs(args), cfg)
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc)) from None
    _emit(format_bench(rows, args.format), args.out)
    return 0


def cmd_matching(args) -> int:
    edges, n = _load_graph(args)
    m = int(graph.normalize_edges(edges).shape[0])
    sim = Simulator(MpcConfig(delta=args.delta, input_words=max(1, n + m),
                              kappa_global=args.kappa_global))
    try:
        res = derand_matching(edges, sim)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    summary = {"m": m, "size": res.size, "target": res.target,
               "seed": None if res.seed is None else res.seed.index,
               "seeds_scanned": res.seeds_scanned, "family_size": res.family_size,
               "edges": res.edges.tolist()}
    summary.update({f"metric_{k}": v for k, v in sim.metrics.to_dict().items()})
    _emit(_dump_json(summary, indent=None), args.out)
    return 0


def cmd_hitset(args) -> int:
    if args.random:
        n, b = args.random
        try:
            inst = random_instance(n, b, args.seed)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    elif args.input:
        try:
            inst = read_instance(args.input)
        except (OSError, ValueError) as exc:
            raise InputError(str(exc)) from None
    else:
        raise InputError("give an instance path or --random N B")
    sim = Simulator(standalone_config(inst.n, inst.b, args.delta, args.kappa_global))
    res = derand_hitting_set(inst, sim)
    summary = {"n": inst.n, "b": inst.b, "size": res.size, "bound": res.bound, "tau": res.tau,
               "heavy": int(res.heavy.shape[0]), "altered": int(res.altered.shape[0]),
               "fallback": res.fallback, "ell": res.ell,
               "seed": None if res.seed is None else res.seed.index,
               "seeds_scanned": res.seeds_scanned, "hitters": res.hitters.tolist()}
    summary.update({f"metric_{k}": v for k, v in sim.metrics.to_dict().items()})
    _emit(_dump_json(summary, indent=None), args.out)
    return 0


# --- parser ----------------------------------------------------------------------------

def _add_model_flags(p, pipeline: bool = True) -> None:
    p.add_argument("--delta", type=float, default=0.5, help="local space exponent, S = N^delta")
    p.add_argument("--kappa-global", type=float, default=8.0, dest="kappa_global",
                   help="global space as a multiple of the input size")
    if pipeline:
        p.add_argument("--gamma", type=float, default=0.2, help="budget growth exponent")
        p.add_argument("--c", type=int, default=3, help="space exponent of the budget rule (>= 3)")
        p.add_argument("--unsafe", action="store_true", help="allow --c below 3")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mpcconn", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated edge list")
    p.add_argument("kind", choices=graph.KINDS)
    p.add_argument("params", nargs="*", help="key=value generator parameters")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="label connected components")
    p.add_argument("input", nargs="?")
    p.add_argument("--gen", default=None, help='generator spec, e.g. "gnm n=100 m=300 seed=7"')
    p.add_argument("--out", default=None, help="labels file (default stdout)")
    p.add_argument("--metrics", default=None, help="metrics file")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_model_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check labels against a union-find oracle")
    p.add_argument("labels")
    p.add_argument("edges")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="sweep a suite and emit a CSV")
    p.add_argument("--suite", action="append", help="builtin suite name or file of specs")
    p.add_argument("--graph", action="append", help="one generator spec (repeatable)")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    _add_model_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("matching", help="m/8 matching on a graph of maximum degree 2")
    p.add_argument("input", nargs="?")
    p.add_argument("--gen", default=None)
    p.add_argument("--out", default=None)
    _add_model_flags(p, pipeline=False)
    p.set_defaults(func=cmd_matching)

    p = sub.add_parser("hitset", help="hitting set of an n-by-b instance")
    p.add_argument("input", nargs="?")
    p.add_argument("--random", nargs=2, type=int, metavar=("N", "B"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    _add_model_flags(p, pipeline=False)
    p.set_defaults(func=cmd_hitset)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(_dump_json({"error": "input", "message": str(exc)}))
        return 2
    except CapacityError as exc:
        sys.stderr.write(_dump_json(exc.record()))
        return 3
    except InvariantError as exc:
        sys.stderr.write(_dump_json({"error": "invariant", "message": str(exc)}))
        return 4


if __name__ == "__main__":
    sys.exit(main())
