"""Train the generative model on a pairs file; decode from a checkpoint."""

from __future__ import annotations

import argparse
import json
import sys

from ..corpus.pipeline import read_pairs_tsv
from ..nn.buckets import BucketConfig
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.model import ModelConfig, build_model, decode_greedy
from ..nn.train import TrainConfig, TrainingDiverged, train
from ..nn.vocab import build_vocab


def _load_config(path: str | None) -> tuple[ModelConfig, TrainConfig, dict]:
    doc: dict = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    model_cfg = ModelConfig(**doc.get("model", {}))
    train_cfg = TrainConfig(**doc.get("train", {}))
    vocab_cfg = {"min_freq": 2, "buffer_capacity": 64, **doc.get("vocab", {})}
    return model_cfg, train_cfg, vocab_cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="seq2seqctl")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train from a context/target TSV")
    p_train.add_argument("--pairs", required=True)
    p_train.add_argument("--config", help="JSON with model/train/vocab sections")
    p_train.add_argument("--out", required=True, help="checkpoint path (.npz)")

    p_decode = sub.add_parser("decode", help="greedy-decode one context")
    p_decode.add_argument("--model", required=True)
    p_decode.add_argument("--context", required=True, help="space-separated tokens")
    p_decode.add_argument("--max-len", type=int, default=40)

    args = parser.parse_args(argv)

    if args.command == "train":
        pairs = read_pairs_tsv(args.pairs)
        if not pairs:
            print("error: pairs file is empty", file=sys.stderr)
            return 1
        model_cfg, train_cfg, vocab_cfg = _load_config(args.config)
        vocab = build_vocab(
            [p.context + p.target for p in pairs],
            min_freq=vocab_cfg["min_freq"],
            buffer_capacity=vocab_cfg["buffer_capacity"],
        )
        model = build_model(model_cfg, vocab)
        token_pairs = [(p.context, p.target) for p in pairs]
        try:
            report = train(model, token_pairs, BucketConfig(), train_cfg)
        except TrainingDiverged as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        for epoch, loss in enumerate(report.epoch_losses, 1):
            print(f"epoch {epoch:3d}  loss {loss:.4f}")
        print(f"pairs used {report.pairs_used}, dropped {report.pairs_dropped} (no bucket)")
        save_checkpoint(model, args.out)
        print(f"checkpoint written: {args.out}")
        return 0

    model = load_checkpoint(args.model)
    tokens = decode_greedy(model, args.context.split(), max_len=args.max_len)
    print(" ".join(tokens))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
