"""Score conversation logs and run graph-only vs hybrid comparisons."""

from __future__ import annotations

import argparse
import json
import sys

from ..corpus.pipeline import read_conversations_jsonl
from ..evalharness.metrics import (
    UndefinedScoreError,
    record_from_conversation,
    records_from_events,
    score_records,
)
from ..evalharness.simulate import (
    NoiseConfig,
    UserScript,
    generate_scripts,
    run_experiment,
)
from ..graph.engine import build_matcher
from ..graph.loader import load_default_graph, load_graph
from ..nn.checkpoint import load_checkpoint


def _read_records(path: str):
    """Accept either event-per-line service logs or conversation-per-line."""
    with open(path, encoding="utf-8") as fh:
        first = ""
        for line in fh:
            if line.strip():
                first = line
                break
    if not first:
        raise UndefinedScoreError(f"{path} is empty")
    if "\"event\"" in first:
        with open(path, encoding="utf-8") as fh:
            events = [json.loads(l) for l in fh if l.strip()]
        return records_from_events(events)
    return [record_from_conversation(c) for c in read_conversations_jsonl(path)]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="evalctl")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="E2E/AOR over a log file")
    p_score.add_argument("--log", required=True, help="conversation or event JSONL")

    p_scripts = sub.add_parser("scripts", help="generate ideal-flow user scripts")
    p_scripts.add_argument("--n", type=int, default=500)
    p_scripts.add_argument("--seed", type=int, default=0)
    p_scripts.add_argument("--out", required=True)

    p_cmp = sub.add_parser("compare", help="graph-only vs hybrid on noised scripts")
    p_cmp.add_argument("--graph", help="graph JSON (packaged default if omitted)")
    p_cmp.add_argument("--model", help="checkpoint; omitted = hybrid degrades to handoff")
    p_cmp.add_argument("--scripts", help="scripts JSONL from `evalctl scripts`")
    p_cmp.add_argument("--n", type=int, default=500, help="scripts to generate if no file")
    p_cmp.add_argument(
        "--noise",
        type=float,
        default=0.0,
        help="shorthand: char_rate=X, deviation_rate=X/2",
    )
    p_cmp.add_argument("--char-rate", type=float)
    p_cmp.add_argument("--deviation-rate", type=float)
    p_cmp.add_argument("--ood-rate", type=float, default=0.0)
    p_cmp.add_argument("--codemix-rate", type=float, default=0.0)
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--out", help="write the full report JSON here")

    args = parser.parse_args(argv)

    if args.command == "score":
        try:
            report = score_records(_read_records(args.log))
        except UndefinedScoreError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(json.dumps(report.to_dict(), indent=2))
        return 0

    if args.command == "scripts":
        scripts = generate_scripts(args.n, args.seed)
        with open(args.out, "w", encoding="utf-8") as fh:
            for s in scripts:
                fh.write(json.dumps(s.to_dict(), separators=(",", ":")) + "\n")
        print(f"{len(scripts)} scripts written: {args.out}")
        return 0

    graph = load_graph(args.graph) if args.graph else load_default_graph()
    index = build_matcher(graph)
    model = load_checkpoint(args.model) if args.model else None
    scripts = None
    if args.scripts:
        with open(args.scripts, encoding="utf-8") as fh:
            scripts = [UserScript.from_dict(json.loads(l)) for l in fh if l.strip()]
    noise = NoiseConfig(
        char_rate=args.char_rate if args.char_rate is not None else args.noise,
        deviation_rate=(
            args.deviation_rate if args.deviation_rate is not None else args.noise / 2
        ),
        ood_rate=args.ood_rate,
        codemix_rate=args.codemix_rate,
    )
    report = run_experiment(
        graph, index, model,
        n_scripts=args.n, scripts=scripts, noise=noise, seed=args.seed,
    )
    doc = report.to_dict()
    print(json.dumps(doc, indent=2))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
