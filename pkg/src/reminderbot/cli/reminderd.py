"""Run the reminder chat service over HTTP."""

from __future__ import annotations

import argparse
from datetime import datetime

from ..service.api import DEFAULT_START_TIME, ServiceConfig, create_app


def build_config(args: argparse.Namespace) -> ServiceConfig:
    start = (
        datetime.fromisoformat(args.start_time)
        if args.start_time
        else DEFAULT_START_TIME
    )
    return ServiceConfig(
        graph_path=args.graph,
        checkpoint_path=args.checkpoint,
        store_path=args.store,
        log_path=args.log,
        frontend_dir=args.frontend,
        start_time=start,
        tau_sim=args.tau_sim,
        max_neural_turns=args.max_neural_turns,
        max_unfavorable=args.max_unfavorable,
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="reminderd")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    parser.add_argument("--graph", help="graph JSON (packaged default if omitted)")
    parser.add_argument("--checkpoint", help="seq2seq checkpoint for the fallback")
    parser.add_argument("--store", help="reminder journal path (in-memory if omitted)")
    parser.add_argument("--log", help="event log JSONL for evalctl score")
    parser.add_argument("--frontend", help="static chat UI directory to serve at /")
    parser.add_argument("--start-time", help="ISO service clock start")
    parser.add_argument("--tau-sim", type=float, default=0.35)
    parser.add_argument("--max-neural-turns", type=int, default=3)
    parser.add_argument("--max-unfavorable", type=int, default=2)
    args = parser.parse_args(argv)

    import uvicorn

    app = create_app(build_config(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
