"""Model checkpoints: one .npz with parameters plus a JSON metadata blob.

The metadata carries format version, model config, vocabulary (including
empty buffer slots) and parameter shape headers, so loads can fail loudly on
mismatch instead of mis-reading arrays.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .model import ModelConfig, Seq2SeqModel
from .vocab import Vocabulary

FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(model: Seq2SeqModel, path: str | Path) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "config": asdict(model.config),
        "vocab": model.vocab.to_dict(),
        "shapes": {k: list(v.shape) for k, v in model.params.items()},
    }
    arrays = {f"param_{k}": v for k, v in model.params.items()}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path: str | Path) -> Seq2SeqModel:
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    with archive as data:
        try:
            meta = json.loads(bytes(data["meta"]).decode())
        except (KeyError, ValueError) as exc:
            raise CheckpointError(f"unreadable checkpoint metadata: {exc}") from exc
        if meta.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(
                f"checkpoint format {meta.get('format_version')} unsupported"
            )
        config = ModelConfig(**meta["config"])
        vocab = Vocabulary.from_dict(meta["vocab"])
        params: dict[str, np.ndarray] = {}
        for name, shape in meta["shapes"].items():
            key = f"param_{name}"
            if key not in data:
                raise CheckpointError(f"checkpoint missing parameter {name}")
            arr = data[key]
            if list(arr.shape) != shape:
                raise CheckpointError(
                    f"parameter {name}: shape {list(arr.shape)} != header {shape}"
                )
            params[name] = arr.astype(np.float64)
    return Seq2SeqModel(config=config, vocab=vocab, params=params)
