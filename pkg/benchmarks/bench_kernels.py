"""Compare the compiled and pure-numpy kernel backends.

Backend choice is frozen at import, so the parent process re-execs itself
once per backend with REMINDERBOT_KERNELS set and merges the timings.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeats 9 --rows 4096
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeats: int) -> float:
    """Best-of-N wall time in seconds."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_suite(rows: int, hidden: int, vocab: int, repeats: int) -> dict:
    from reminderbot.nn import KERNEL_BACKEND, get_kernels
    from reminderbot.nn.buckets import BucketConfig
    from reminderbot.nn.model import ModelConfig, build_model, decode_greedy, loss_and_grads
    from reminderbot.nn.train import make_batches
    from reminderbot.nn.vocab import build_vocab

    K = get_kernels()
    rng = np.random.default_rng(0)
    results: dict[str, float] = {}

    a = rng.standard_normal((rows, hidden))
    results["sigmoid_inplace"] = _time(lambda: K.sigmoid_inplace(a.copy()), repeats)
    results["tanh_inplace"] = _time(lambda: K.tanh_inplace(a.copy()), repeats)

    z = 1.0 / (1.0 + np.exp(-rng.standard_normal((rows, hidden))))
    h_prev = rng.standard_normal((rows, hidden))
    hbar = np.tanh(rng.standard_normal((rows, hidden)))
    dh = rng.standard_normal((rows, hidden))
    results["gru_combine"] = _time(lambda: K.gru_combine(z, h_prev, hbar), repeats)
    results["gru_gate_grads"] = _time(lambda: K.gru_gate_grads(dh, z, hbar, h_prev), repeats)
    results["r_gate_grads"] = _time(lambda: K.r_gate_grads(dh, z, h_prev), repeats)

    logits = rng.standard_normal((rows, vocab))
    targets = rng.integers(0, vocab, size=rows)
    mask = (rng.random(rows) < 0.8).astype(float)
    results["softmax_xent"] = _time(
        lambda: K.softmax_xent(logits.copy(), targets, mask), repeats
    )

    # end-to-end: one training step and one decode on a desk-scale model
    texts = [f"tok{i % 40} tok{(i * 7) % 40} tok{(i * 13) % 40}" for i in range(200)]
    vocab_obj = build_vocab((t.split() for t in texts), min_freq=1, buffer_capacity=8)
    model = build_model(ModelConfig(layers=1, hidden=64, emb_dim=32, seed=1), vocab_obj)
    pairs = [
        (
            [f"tok{i % 40}", f"tok{(i + 1) % 40}", f"tok{(i + 2) % 40}"],
            [f"tok{(i + 3) % 40}", f"tok{(i + 4) % 40}"],
        )
        for i in range(24)
    ]
    batch = make_batches(
        vocab_obj, BucketConfig(), pairs, batch_size=24, rng=np.random.default_rng(0)
    )[0]
    results["train_step"] = _time(
        lambda: loss_and_grads(
            model, batch.ctx_ids, batch.ctx_lens,
            batch.tgt_in, batch.tgt_out, batch.tgt_mask,
        ),
        repeats,
    )
    results["greedy_decode"] = _time(
        lambda: decode_greedy(model, ["tok1", "tok2", "tok3"], max_len=20), repeats
    )
    return {"backend": KERNEL_BACKEND, "timings": results}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=2048)
    parser.add_argument("--hidden", type=int, default=128)
    parser.add_argument("--vocab", type=int, default=400)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.inner:
        doc = run_suite(args.rows, args.hidden, args.vocab, args.repeats)
        json.dump(doc, sys.stdout)
        return 0

    reports = {}
    for backend in ("python", "cython"):
        env = dict(os.environ, REMINDERBOT_KERNELS=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--inner",
             "--rows", str(args.rows), "--hidden", str(args.hidden),
             "--vocab", str(args.vocab), "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(f"{backend} run failed:\n{proc.stderr}", file=sys.stderr)
            return 1
        doc = json.loads(proc.stdout)
        if doc["backend"] != backend:
            print(f"asked for {backend}, got {doc['backend']}", file=sys.stderr)
            return 1
        reports[backend] = doc["timings"]

    names = list(reports["python"])
    width = max(len(n) for n in names)
    print(f"{'kernel':<{width}}  {'python':>10}  {'cython':>10}  speedup")
    for name in names:
        py = reports["python"][name]
        cy = reports["cython"][name]
        print(f"{name:<{width}}  {py * 1e3:>8.3f}ms  {cy * 1e3:>8.3f}ms  {py / cy:6.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
