"""Command-line interface.

    strategraph check <file>
    strategraph run --strategy S --goal "A --> B" [--order leftmost|oldest]
                    [--fuel N] [--all]
    strategraph serve --strategy S --goal "..." --port P [--stdio]
    strategraph export-dot S

Strategies resolve as file paths first, then by name against the
registry directories (--registry, repeatable) and the bundled fixtures.
Exit codes: 0 success / at least one ENF result, 1 evaluation found no
ENF, 2 usage or load errors.
"""

from __future__ import annotations

import argparse
import sys

from .engine import EVAL_ORDERS
from .kernel import ParseError
from .strategy import (
    StrategyError, check_strategy, export_dot, format_enf, resolve_strategy,
    run_strategy,
)

EXIT_OK = 0
EXIT_NO_ENF = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strategraph",
                                description="Strategy-graph engine")
    p.add_argument("--registry", action="append", default=[], metavar="DIR",
                   help="directory of strategy .json files (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="well-formedness and signature diagnostics")
    c.add_argument("file")

    r = sub.add_parser("run", help="evaluate a strategy on a goal")
    r.add_argument("--strategy", required=True)
    r.add_argument("--goal", required=True)
    r.add_argument("--order", choices=EVAL_ORDERS, default="leftmost")
    r.add_argument("--fuel", type=int, default=None)
    r.add_argument("--all", action="store_true",
                   help="report every ENF result, not just the first")

    s = sub.add_parser("serve", help="interactive stepping service")
    s.add_argument("--strategy", required=True)
    s.add_argument("--goal", required=True)
    s.add_argument("--port", type=int, default=0)
    s.add_argument("--order", choices=EVAL_ORDERS, default="leftmost")
    s.add_argument("--stdio", action="store_true",
                   help="serve one session on stdin/stdout instead of TCP")
    s.add_argument("--max-sessions", type=int, default=None)

    d = sub.add_parser("export-dot", help="print the graph in dot format")
    d.add_argument("strategy")
    return p


def cmd_check(args) -> int:
    strategy, diagnostics = check_strategy(args.file, args.registry)
    if strategy is None:
        for d in diagnostics:
            print(d, file=sys.stderr)
        return EXIT_USAGE
    print(f"{strategy.name}: ok "
          f"({len(strategy.graph.vertices())} vertices, "
          f"{len(strategy.graph.edges())} edges)")
    return EXIT_OK


def cmd_run(args) -> int:
    strategy = resolve_strategy(args.strategy, args.registry)
    result = run_strategy(strategy, args.goal, order=args.order, fuel=args.fuel,
                          max_results=None if args.all else 1)
    for i, state in enumerate(result.enf_states, start=1):
        print(f"ENF #{i}:")
        for line in format_enf(state):
            print(f"  {line}")
    if result.fuel_exhausted:
        print("fuel exhausted before the search completed", file=sys.stderr)
    if not result.succeeded:
        print("no ENF result", file=sys.stderr)
        return EXIT_NO_ENF
    return EXIT_OK


def cmd_serve(args) -> int:
    from .debugserver import serve_stdio, serve_tcp

    strategy = resolve_strategy(args.strategy, args.registry)
    if args.stdio:
        serve_stdio(strategy, args.goal, order=args.order)
    else:
        serve_tcp(strategy, args.goal, args.port, order=args.order,
                  max_sessions=args.max_sessions)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    strategy = resolve_strategy(args.strategy, args.registry)
    print(export_dot(strategy))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handlers = {"check": cmd_check, "run": cmd_run, "serve": cmd_serve,
                "export-dot": cmd_export_dot}
    try:
        return handlers[args.command](args)
    except (StrategyError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
