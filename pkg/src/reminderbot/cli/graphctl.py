"""Validate dialogue graphs and debug template matching."""

from __future__ import annotations

import argparse
import sys

from ..graph.engine import build_matcher, rank_states
from ..graph.loader import load_graph
from ..graph.model import GraphError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="graphctl")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="load a graph file and run all checks")
    p_validate.add_argument("graph", help="path to graph JSON")

    p_match = sub.add_parser("match", help="rank states for a query")
    p_match.add_argument("graph", help="path to graph JSON")
    p_match.add_argument("query", help="user text to match")
    p_match.add_argument("--top", type=int, default=5)

    args = parser.parse_args(argv)

    try:
        graph = load_graph(args.graph)
    except GraphError as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        n_templates = sum(len(s.templates) for s in graph.states.values())
        print(f"OK: {len(graph.states)} states, {len(graph.edges)} edges, "
              f"{n_templates} templates")
        return 0

    index = build_matcher(graph)
    templates = graph.all_templates()
    ranked = rank_states(index, args.query, list(graph.states))
    if not ranked:
        print("no vocabulary overlap with any template")
        return 0
    for r in ranked[: args.top]:
        print(f"{r.score:6.3f}  {r.state_id:24} {templates[r.template_index][1]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
