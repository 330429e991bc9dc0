"""Batching, the SGD loop, and checkpoint round-trips."""

from __future__ import annotations

import json

import numpy as np
import pytest

from reminderbot.nn.buckets import BucketConfig
from reminderbot.nn.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from reminderbot.nn.model import ModelConfig, build_model
from reminderbot.nn.train import (
    TrainConfig,
    TrainingDiverged,
    clip_global_norm,
    encode_pair,
    make_batches,
    train,
)
from reminderbot.nn.vocab import EOS, GO, PAD, build_vocab


def _vocab():
    words = [f"w{i}" for i in range(10)]
    return build_vocab([words], min_freq=1, buffer_capacity=2)


def _pairs(n, rng, ctx_max=8, tgt_max=6):
    out = []
    for _ in range(n):
        lc = int(rng.integers(2, ctx_max))
        lt = int(rng.integers(1, tgt_max))
        out.append((
            [f"w{rng.integers(0, 10)}" for _ in range(lc)],
            [f"w{rng.integers(0, 10)}" for _ in range(lt)],
        ))
    return out


class TestEncodePair:
    def test_layout(self):
        vocab = _vocab()
        buckets = BucketConfig(sizes=((10, 10),))
        enc = encode_pair(vocab, buckets, ["w0", "w1", "w2"], ["w3", "w4"])
        assert enc is not None
        bucket, ctx, ctx_len, tgt_in, tgt_out, mask = enc
        assert bucket == 0
        assert len(ctx) == len(tgt_in) == len(tgt_out) == len(mask) == 10
        assert ctx_len == 4  # three tokens + eos
        assert ctx[3] == EOS and ctx[4] == PAD
        assert tgt_in[0] == GO
        assert tgt_in[1:3] == tgt_out[:2]  # shifted by one
        assert tgt_out[2] == EOS
        assert mask == [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]  # two tokens + eos

    def test_none_when_too_long(self):
        vocab = _vocab()
        buckets = BucketConfig(sizes=((4, 4),))
        assert encode_pair(vocab, buckets, ["w0"] * 4, ["w1"]) is None
        assert encode_pair(vocab, buckets, ["w0"], ["w1"] * 4) is None

    def test_exact_fit_with_eos(self):
        vocab = _vocab()
        buckets = BucketConfig(sizes=((4, 4),))
        enc = encode_pair(vocab, buckets, ["w0"] * 3, ["w1"] * 3)
        assert enc is not None
        _, ctx, ctx_len, _, tgt_out, mask = enc
        assert ctx_len == 4
        assert tgt_out[3] == EOS
        assert mask == [1, 1, 1, 1]


class TestMakeBatches:
    def test_groups_by_bucket_and_counts_drops(self):
        vocab = _vocab()
        buckets = BucketConfig(sizes=((5, 5), (10, 10)))
        pairs = [
            (["w0"] * 3, ["w1"] * 2),   # bucket 0
            (["w0"] * 4, ["w1"] * 3),   # bucket 0
            (["w0"] * 8, ["w1"] * 2),   # bucket 1
            (["w0"] * 20, ["w1"] * 2),  # dropped
        ]
        from reminderbot.nn.train import TrainReport
        report = TrainReport()
        rng = np.random.default_rng(0)
        batches = make_batches(vocab, buckets, pairs, batch_size=16, rng=rng, report=report)
        assert report.pairs_used == 3
        assert report.pairs_dropped == 1
        shapes = sorted(b.ctx_ids.shape for b in batches)
        assert shapes == [(1, 10), (2, 5)]
        for b in batches:
            assert b.ctx_ids.shape[1] == b.ctx_ids.shape[1]
            assert b.tgt_in.shape == b.tgt_out.shape == b.tgt_mask.shape

    def test_batch_size_splits(self):
        vocab = _vocab()
        buckets = BucketConfig(sizes=((10, 10),))
        pairs = [(["w0", "w1"], ["w2"])] * 7
        rng = np.random.default_rng(0)
        batches = make_batches(vocab, buckets, pairs, batch_size=3, rng=rng)
        assert sorted(b.ctx_ids.shape[0] for b in batches) == [1, 3, 3]


class TestClipGlobalNorm:
    def test_scales_when_above(self):
        grads = {"a": np.array([3.0, 4.0])}  # norm 5
        total = clip_global_norm(grads, 1.0)
        assert total == pytest.approx(5.0)
        assert np.linalg.norm(grads["a"]) == pytest.approx(1.0)

    def test_untouched_when_below(self):
        grads = {"a": np.array([0.3, 0.4])}
        clip_global_norm(grads, 1.0)
        assert np.allclose(grads["a"], [0.3, 0.4])

    def test_norm_spans_all_params(self):
        grads = {"a": np.full(4, 2.0), "b": np.full(9, 2.0)}
        total = clip_global_norm(grads, 100.0)
        assert total == pytest.approx(np.sqrt(13 * 4.0))


class TestTrain:
    def test_loss_decreases_on_small_corpus(self):
        vocab = _vocab()
        model = build_model(ModelConfig(layers=1, hidden=8, emb_dim=6, seed=0), vocab)
        pairs = _pairs(24, np.random.default_rng(3))
        report = train(model, pairs, BucketConfig(), TrainConfig(epochs=8, seed=0))
        assert len(report.epoch_losses) == 8
        assert report.epoch_losses[-1] < report.epoch_losses[0]
        assert report.pairs_used == 24
        assert report.pairs_dropped == 0

    def test_same_seed_same_losses(self):
        vocab = _vocab()
        pairs = _pairs(12, np.random.default_rng(4))
        runs = []
        for _ in range(2):
            model = build_model(ModelConfig(layers=1, hidden=6, emb_dim=4, seed=2), vocab)
            report = train(model, pairs, BucketConfig(), TrainConfig(epochs=3, seed=7))
            runs.append(report.epoch_losses)
        assert runs[0] == runs[1]

    def test_diverged_raises(self):
        vocab = _vocab()
        model = build_model(ModelConfig(layers=1, hidden=4, emb_dim=3, seed=0), vocab)
        model.params["out_b"][:] = np.nan
        pairs = _pairs(4, np.random.default_rng(5))
        with pytest.raises(TrainingDiverged, match="learning rate"):
            train(model, pairs, BucketConfig(), TrainConfig(epochs=1, seed=0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(dropout_keep=0.0)
        with pytest.raises(ValueError):
            TrainConfig(dropout_keep=1.5)
        with pytest.raises(ValueError):
            TrainConfig(epochs=0)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        vocab = _vocab()
        model = build_model(ModelConfig(layers=1, hidden=5, emb_dim=4, seed=1), vocab)
        path = tmp_path / "model.npz"
        save_checkpoint(model, path)
        clone = load_checkpoint(path)
        assert clone.config == model.config
        assert clone.vocab.index_to_token == model.vocab.index_to_token
        assert clone.vocab.size_active == model.vocab.size_active
        assert clone.params.keys() == model.params.keys()
        for k in model.params:
            assert np.array_equal(clone.params[k], model.params[k])

    def test_loaded_model_decodes(self, tmp_path):
        from reminderbot.nn.model import decode_greedy
        vocab = _vocab()
        model = build_model(ModelConfig(layers=1, hidden=5, emb_dim=4, seed=1), vocab)
        path = tmp_path / "model.npz"
        save_checkpoint(model, path)
        clone = load_checkpoint(path)
        assert decode_greedy(clone, ["w0", "w1"], max_len=10) == decode_greedy(
            model, ["w0", "w1"], max_len=10
        )

    def test_bad_file_raises(self, tmp_path):
        path = tmp_path / "junk.npz"
        path.write_bytes(b"not an archive")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(CheckpointError):
            load_checkpoint(tmp_path / "absent.npz")

    def test_wrong_format_version_raises(self, tmp_path):
        vocab = _vocab()
        model = build_model(ModelConfig(layers=1, hidden=4, emb_dim=3, seed=1), vocab)
        path = tmp_path / "model.npz"
        save_checkpoint(model, path)
        data = dict(np.load(path, allow_pickle=False))
        meta = json.loads(bytes(data["meta"]).decode())
        meta["format_version"] = 999
        data["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
        np.savez(path, **data)
        with pytest.raises(CheckpointError, match="unsupported"):
            load_checkpoint(path)
