"""Run the log-to-pairs preprocessing pipeline from the command line."""

from __future__ import annotations

import argparse
import json
import sys

from ..corpus.pipeline import (
    PipelineError,
    compute_stats,
    read_conversations_jsonl,
    run_pipeline,
    write_pairs_tsv,
)


def parse_steps(spec: str) -> list[int]:
    """'1-5', '2', or '1,3,5' → ordered step list."""
    steps: set[int] = set()
    for part in spec.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            steps.update(range(int(lo), int(hi) + 1))
        elif part:
            steps.add(int(part))
    out = sorted(steps)
    if not out:
        raise ValueError("no steps selected")
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="corpusctl")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="raw conversation log -> training pairs")
    p_run.add_argument("--steps", default="1-5", help="e.g. 1-5, 2, 1,3")
    p_run.add_argument("--in", dest="infile", required=True, help="raw JSONL log")
    p_run.add_argument("--out", dest="outfile", required=True, help="pairs TSV")
    p_run.add_argument("--stats", help="write step/corpus statistics JSON here")
    p_run.add_argument("--domain", default="reminders")

    args = parser.parse_args(argv)

    try:
        steps = parse_steps(args.steps)
        conversations = read_conversations_jsonl(args.infile)
        normalized, pairs, report = run_pipeline(
            conversations, domain=args.domain, steps=steps
        )
        write_pairs_tsv(pairs, args.outfile)
    except (PipelineError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for step in report.steps:
        print(f"{step.step:24} conversations={step.conversations:6d} messages={step.messages:7d}")
    print(f"pairs written: {len(pairs)} (dropped {report.pairs_dropped_empty_context} empty-context)")

    if args.stats:
        stats = compute_stats(conversations, normalized, pairs)
        doc = {"steps": report.to_dict(), "corpus": stats.to_dict()}
        with open(args.stats, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        print(f"stats written: {args.stats}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
