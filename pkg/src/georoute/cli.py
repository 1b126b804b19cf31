"""Command line entry point: ``georoute {gen-mesh,trace,check-deadlock,eval}``.

Exit status is 0 on success, 1 for usage or configuration errors and 2
for domain errors (unreachable pair, dependency cycle).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .deadlock import build_cdg, find_cycle, format_cycle
from .errors import InvalidArgument, RoutingError, Unreachable
from .evaluation import ExperimentConfig, run_sweep, write_reports
from .forest import build_forest, choose_root, default_preferences
from .router import RoutingState, format_trace, route
from .topology import Topology, build_mesh, inject_link_faults, format_topology, parse_topology

SEED_ENV = "GEOROUTE_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    try:
        return int(os.environ.get(SEED_ENV, "1"))
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer") from None


def parse_mesh(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise UsageError(f"mesh size must look like 4x4, got {text!r}") from None


def parse_root(text: str):
    text = str(text).strip().lower().replace("-", "_")
    if text.isdigit():
        return int(text)
    return text


def parse_preferences(text: str) -> tuple[tuple[str, ...], ...]:
    """``NSEW,EWNS`` -> one compass order per tree."""
    prefs = tuple(tuple(p.strip().upper()) for p in text.split(",") if p.strip())
    for p in prefs:
        if sorted(p) != sorted("NESW"):
            raise UsageError(f"preference {''.join(p)!r} must be a permutation of NESW")
    return prefs


def _add_topology_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--mesh", default=None, help="mesh size WxH (default 4x4)")
    src.add_argument("--topology", default=None, help="topology text file")
    p.add_argument("--fail-prob", type=float, default=0.0)
    p.add_argument("--granularity", choices=("link", "arc"), default="link")
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV} or 1)")


def _add_routing_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--root", default="central",
                   help="central, highest-id, corner-se/ne/sw/nw or a node id")
    p.add_argument("--trees", type=int, default=2)
    p.add_argument("--preferences", default=None, help="per-tree orders, e.g. NSEW,EWNS")
    p.add_argument("--no-manhattan", action="store_true", help="disable the grid tie-break")


def _load_topology(args, pattern: int = 0) -> Topology:
    if args.topology:
        with open(args.topology) as fp:
            topo = parse_topology(fp.read())
    else:
        topo = build_mesh(*parse_mesh(args.mesh or "4x4"))
    seed = args.seed if args.seed is not None else _default_seed()
    rng_seed = seed if pattern == 0 else (seed, pattern)
    return inject_link_faults(topo, args.fail_prob, rng_seed, args.granularity)


def _build_state(args, topo: Topology, restricted: bool = True) -> RoutingState:
    root = choose_root(topo, parse_root(args.root))
    if args.preferences:
        prefs = parse_preferences(args.preferences)
        if len(prefs) < args.trees:
            raise UsageError(f"--preferences gives {len(prefs)} orders for {args.trees} trees")
        prefs = list(prefs[: args.trees])
    elif topo.is_grid:
        prefs = default_preferences(args.trees)
    else:
        prefs = [None] * args.trees
    forest = build_forest(topo, root, prefs)
    return RoutingState(topo, forest, manhattan=not args.no_manhattan, restricted=restricted)


# -- subcommands -------------------------------------------------------------


def cmd_gen_mesh(args) -> int:
    text = format_topology(_load_topology(args))
    if args.output:
        with open(args.output, "w") as fp:
            fp.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_trace(args) -> int:
    topo = _load_topology(args)
    state = _build_state(args, topo)
    try:
        src, dst = state.resolve(args.src), state.resolve(args.dst)
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from None
    for v in (src, dst):
        if not 0 <= v < topo.node_count:
            raise UsageError(f"unknown node {v}")
    try:
        trace = route(state, src, dst, args.mode, args.seed if args.seed is not None else _default_seed())
    except Unreachable as exc:
        print(f"unreachable: {exc}", file=sys.stderr)
        return 2
    print(f"# {state.name(src)} -> {state.name(dst)}: {trace.length} hops, shape {trace.shape or '-'}")
    if trace.length:
        print(format_trace(state, trace))
    return 0


def cmd_check_deadlock(args) -> int:
    for i in range(args.patterns):
        topo = _load_topology(args, pattern=i)
        state = _build_state(args, topo, restricted=not args.disable_ancestor_rule)
        cycle = find_cycle(build_cdg(state, args.source))
        if cycle is not None:
            print(f"CYCLE pattern={i}: {format_cycle(cycle)}")
            return 2
    print(f"ACYCLIC patterns={args.patterns}")
    return 0


_CONFIG_KEYS = {
    "mesh_sizes": lambda v: tuple(parse_mesh(x) for x in v.split(",")),
    "tree_counts": lambda v: tuple(int(x) for x in v.split(",")),
    "fail_probs": lambda v: tuple(float(x) for x in v.split(",")),
    "master_seed": int,
    "min_pairs": int,
    "max_patterns": int,
    "root_policy": parse_root,
    "preferences": parse_preferences,
    "mode": str,
    "dependency_source": str,
    "granularity": str,
    "manhattan": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
    "output": str,
}
_CLI_ONLY_KEYS = ("workers", "format")


def load_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in _CLI_ONLY_KEYS:
            values[key] = val
            continue
        if key not in _CONFIG_KEYS:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](val)
        except ValueError as exc:
            raise UsageError(f"config line {lineno}: {exc}") from None
    return values


def cmd_eval(args) -> int:
    values: dict = {"master_seed": _default_seed()}
    if args.config:
        with open(args.config) as fp:
            values.update(load_config(fp.read()))
    flags = {
        "mesh_sizes": args.mesh_sizes, "tree_counts": args.tree_counts,
        "fail_probs": args.fail_probs, "master_seed": args.seed,
        "min_pairs": args.min_pairs, "max_patterns": args.max_patterns,
        "root_policy": args.root, "preferences": args.preferences, "mode": args.mode,
        "granularity": args.granularity, "output": args.output,
    }
    for key, val in flags.items():
        if val is not None:
            values[key] = _CONFIG_KEYS[key](str(val)) if isinstance(val, str) else val
    if args.no_manhattan:
        values["manhattan"] = False
    workers = values.pop("workers", None)
    fmt = args.format or values.pop("format", "csv")
    values.pop("format", None)
    if args.workers is not None:
        workers = args.workers
    try:
        workers = int(workers) if workers else None
    except ValueError:
        raise UsageError(f"workers must be an integer, got {workers!r}") from None
    if fmt not in ("csv", "tsv"):
        raise UsageError(f"unknown format {fmt!r}")
    try:
        config = ExperimentConfig(**values)
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from None
    reports = run_sweep(config, workers=workers)
    if config.output:
        with open(config.output, "w", newline="") as fp:
            write_reports(reports, fp, fmt)
    else:
        write_reports(reports, sys.stdout, fmt)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="georoute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-mesh", help="write a (faulted) mesh in topology text format")
    _add_topology_args(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gen_mesh)

    p = sub.add_parser("trace", help="route one packet and print every hop")
    _add_topology_args(p)
    _add_routing_args(p)
    p.add_argument("--src", required=True, help="node id or tree-0 address")
    p.add_argument("--dst", required=True, help="node id or tree-0 address")
    p.add_argument("--mode", choices=("deterministic", "adaptive"), default="deterministic")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("check-deadlock", help="verify the channel dependency graph is acyclic")
    _add_topology_args(p)
    _add_routing_args(p)
    p.add_argument("--patterns", type=int, default=1, help="number of fault patterns to check")
    p.add_argument("--source", choices=("legal", "greedy"), default="legal")
    p.add_argument("--disable-ancestor-rule", action="store_true",
                   help="debug: drop the path restriction (expect a cycle)")
    p.set_defaults(func=cmd_check_deadlock)

    p = sub.add_parser("eval", help="run a stretch/minimality/adaptiveness sweep")
    p.add_argument("config", nargs="?", default=None, help="key = value config file")
    p.add_argument("--mesh-sizes", default=None, help="e.g. 4x4,8x8")
    p.add_argument("--tree-counts", default=None, help="e.g. 1,2")
    p.add_argument("--fail-probs", default=None, help="e.g. 0,0.05")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--min-pairs", type=int, default=None)
    p.add_argument("--max-patterns", type=int, default=None)
    p.add_argument("--root", default=None)
    p.add_argument("--preferences", default=None)
    p.add_argument("--mode", choices=("adaptive", "deterministic"), default=None)
    p.add_argument("--granularity", choices=("link", "arc"), default=None)
    p.add_argument("--no-manhattan", action="store_true")
    p.add_argument("--workers", type=int, default=None, help="default: all cores")
    p.add_argument("--format", choices=("csv", "tsv"), default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (UsageError, InvalidArgument, OSError) as exc:
        print(f"georoute: error: {exc}", file=sys.stderr)
        return 1
    except RoutingError as exc:
        print(f"georoute: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
