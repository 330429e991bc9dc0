"""Token vocabulary with a reserved buffer for late additions.

The index space is allocated once at size_total = size_active + buffer
capacity. New tokens (a fresh action tag, say) bind to the next free buffer
slot, so embedding and output matrices never need resizing and no existing
index ever moves. Unassigned buffer rows exist in the parameter matrices
but are masked out of decoding until a token claims them.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PAD, GO, EOS, UNK = 0, 1, 2, 3
RESERVED = ("_pad_", "_go_", "_eos_", "_unk_")

_ACTION_TAG = re.compile(r"^_api_[a-z_]+_$")


class CapacityError(Exception):
    """The vocabulary buffer has no free slots left."""


@dataclass
class Vocabulary:
    token_to_index: dict[str, int] = field(default_factory=dict)
    index_to_token: list[str | None] = field(default_factory=list)
    size_active: int = 0
    size_total: int = 0

    def __len__(self) -> int:
        return self.size_total

    @property
    def buffer_free(self) -> int:
        return self.size_total - self.size_active

    def lookup(self, token: str) -> int:
        return self.token_to_index.get(token, UNK)

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.token_to_index.get(t, UNK) for t in tokens]

    def decode(self, indices: Iterable[int]) -> list[str]:
        out = []
        for i in indices:
            token = self.index_to_token[i]
            out.append(token if token is not None else "_unk_")
        return out

    def to_dict(self) -> dict:
        return {
            "tokens": self.index_to_token,
            "size_active": self.size_active,
            "size_total": self.size_total,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        tokens: list[str | None] = list(d["tokens"])
        mapping = {t: i for i, t in enumerate(tokens) if t is not None}
        return cls(
            token_to_index=mapping,
            index_to_token=tokens,
            size_active=int(d["size_active"]),
            size_total=int(d["size_total"]),
        )


def build_vocab(
    token_stream: Iterable[Sequence[str]],
    min_freq: int = 2,
    buffer_capacity: int = 64,
) -> Vocabulary:
    """Count tokens over sequences and allocate the index space.

    Tokens below min_freq fall to unk, except action tags, which must stay
    addressable no matter how rare: a tag the model cannot emit is a dead
    action. Order of first appearance fixes indices, so builds are
    deterministic for a fixed stream.
    """
    counts: Counter[str] = Counter()
    order: dict[str, int] = {}
    for seq in token_stream:
        for token in seq:
            counts[token] += 1
            if token not in order:
                order[token] = len(order)

    kept = [
        t
        for t in sorted(counts, key=order.__getitem__)
        if t not in RESERVED and (counts[t] >= min_freq or _ACTION_TAG.match(t))
    ]

    index_to_token: list[str | None] = list(RESERVED) + kept
    size_active = len(index_to_token)
    index_to_token.extend([None] * buffer_capacity)
    return Vocabulary(
        token_to_index={t: i for i, t in enumerate(index_to_token) if t is not None},
        index_to_token=index_to_token,
        size_active=size_active,
        size_total=size_active + buffer_capacity,
    )


def vocab_add_buffered(vocabulary: Vocabulary, token: str) -> int:
    """Bind a new token to the next free buffer slot.

    Returns the existing index unchanged for a known token; raises
    CapacityError when the buffer is full. Never moves an existing index.
    """
    existing = vocabulary.token_to_index.get(token)
    if existing is not None:
        return existing
    if vocabulary.buffer_free <= 0:
        raise CapacityError(f"vocabulary buffer exhausted, cannot add {token!r}")
    index = vocabulary.size_active
    vocabulary.token_to_index[token] = index
    vocabulary.index_to_token[index] = token
    vocabulary.size_active += 1
    return index
