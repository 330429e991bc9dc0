"""Plain-SGD training loop over bucketed batches.

Pairs are assigned to the smallest admitting bucket (reserving one slot for
the eos marker on each side); pairs that fit no bucket are dropped and
counted. Every bucket shares the single parameter set. Gradients are
clipped by global norm before the update, and training aborts with a
diagnostic if the loss goes non-finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .buckets import BucketConfig, bucket_assign, pad_to_bucket
from .model import Seq2SeqModel, loss_and_grads
from .vocab import GO, PAD, Vocabulary


class TrainingDiverged(Exception):
    """Loss went non-finite; learning rate almost certainly too high."""


@dataclass
class TrainConfig:
    learning_rate: float = 0.5
    batch_size: int = 16
    epochs: int = 30
    dropout_keep: float = 0.9
    clip_norm: float = 5.0
    seed: int = 0
    # sampled softmax is a documented production option; desk scale trains
    # with the full softmax and leaves this off
    softmax_sample: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ValueError("dropout_keep must be in (0, 1]")
        if self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass
class Batch:
    ctx_ids: np.ndarray
    ctx_lens: np.ndarray
    tgt_in: np.ndarray
    tgt_out: np.ndarray
    tgt_mask: np.ndarray


@dataclass
class TrainReport:
    epoch_losses: list[float] = field(default_factory=list)
    pairs_used: int = 0
    pairs_dropped: int = 0


def encode_pair(
    vocab: Vocabulary,
    buckets: BucketConfig,
    context: list[str],
    target: list[str],
) -> tuple[int, list[int], int, list[int], list[int], list[int]] | None:
    """Bucket and pad one pair; None when no bucket fits (+1 for eos)."""
    bucket = bucket_assign(buckets, len(context) + 1, len(target) + 1)
    if bucket is None:
        return None
    max_ctx, max_tgt = buckets.sizes[bucket]
    ctx = pad_to_bucket(vocab.encode(context), max_ctx)
    tgt_ids = vocab.encode(target)
    tgt_full = pad_to_bucket(tgt_ids, max_tgt)  # [y..., eos, pads]
    tgt_in = [GO] + tgt_full[:-1]
    mask = [1] * (len(tgt_ids) + 1) + [0] * (max_tgt - len(tgt_ids) - 1)
    return bucket, ctx, len(context) + 1, tgt_in, tgt_full, mask


def make_batches(
    vocab: Vocabulary,
    buckets: BucketConfig,
    pairs: list[tuple[list[str], list[str]]],
    batch_size: int,
    rng: np.random.Generator,
    report: TrainReport | None = None,
) -> list[Batch]:
    by_bucket: dict[int, list] = {}
    dropped = 0
    for context, target in pairs:
        encoded = encode_pair(vocab, buckets, context, target)
        if encoded is None:
            dropped += 1
            continue
        by_bucket.setdefault(encoded[0], []).append(encoded[1:])
    if report is not None:
        report.pairs_dropped = dropped
        report.pairs_used = sum(len(v) for v in by_bucket.values())

    batches: list[Batch] = []
    for bucket in sorted(by_bucket):
        rows = by_bucket[bucket]
        order = rng.permutation(len(rows))
        for start in range(0, len(rows), batch_size):
            chunk = [rows[i] for i in order[start : start + batch_size]]
            ctx = np.array([c[0] for c in chunk], dtype=np.int64)
            lens = np.array([c[1] for c in chunk], dtype=np.int64)
            tin = np.array([c[2] for c in chunk], dtype=np.int64)
            tout = np.array([c[3] for c in chunk], dtype=np.int64)
            mask = np.array([c[4] for c in chunk], dtype=np.int64)
            batches.append(Batch(ctx, lens, tin, tout, mask))
    order = rng.permutation(len(batches))
    return [batches[i] for i in order]


def _dropout_masks(
    model: Seq2SeqModel, keep: float, batch: int, rng: np.random.Generator
) -> dict[str, np.ndarray] | None:
    if keep >= 1.0:
        return None
    cfg = model.config
    masks: dict[str, np.ndarray] = {}
    for layer in range(cfg.layers):
        for name, width in (
            (f"enc{layer}f", cfg.hidden),
            (f"enc{layer}b", cfg.hidden),
            (f"dec{layer}", cfg.dec_width),
        ):
            masks[name] = (rng.random((batch, width)) < keep) / keep
    return masks


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    total = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def train(
    model: Seq2SeqModel,
    pairs: list[tuple[list[str], list[str]]],
    buckets: BucketConfig,
    config: TrainConfig,
) -> TrainReport:
    """SGD over shuffled bucket batches; records per-epoch mean token loss."""
    rng = np.random.default_rng(config.seed)
    report = TrainReport()
    for epoch in range(config.epochs):
        batches = make_batches(
            model.vocab, buckets, pairs, config.batch_size, rng,
            report if epoch == 0 else None,
        )
        loss_sum = 0.0
        token_sum = 0
        for batch in batches:
            masks = _dropout_masks(model, config.dropout_keep, batch.ctx_ids.shape[0], rng)
            loss, tokens, grads = loss_and_grads(
                model,
                batch.ctx_ids,
                batch.ctx_lens,
                batch.tgt_in,
                batch.tgt_out,
                batch.tgt_mask,
                mrec=masks,
            )
            if not math.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}: lower the learning rate"
                )
            loss_sum += loss
            token_sum += tokens
            if tokens == 0:
                continue
            for g in grads.values():
                g /= tokens
            clip_global_norm(grads, config.clip_norm)
            for name, g in grads.items():
                model.params[name] -= config.learning_rate * g
        report.epoch_losses.append(loss_sum / max(token_sum, 1))
    return report
