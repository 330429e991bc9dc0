"""Length buckets: pairs are padded to a small set of fixed shapes.

One parameter set serves every bucket; bucketing only bounds the unrolled
length, so the loss of a pair must not depend on which admissible bucket it
lands in (masking guarantees this and the tests check it).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .vocab import EOS, PAD

DEFAULT_BUCKETS: tuple[tuple[int, int], ...] = ((10, 10), (20, 15), (40, 25), (160, 40))


@dataclass(frozen=True)
class BucketConfig:
    sizes: tuple[tuple[int, int], ...] = DEFAULT_BUCKETS

    def __post_init__(self) -> None:
        if not self.sizes:
            raise ValueError("at least one bucket required")
        prev = (0, 0)
        for ctx, tgt in self.sizes:
            if ctx <= prev[0] or tgt <= prev[1]:
                raise ValueError("buckets must strictly increase in both coordinates")
            prev = (ctx, tgt)

    @property
    def max_context(self) -> int:
        return self.sizes[-1][0]

    @property
    def max_target(self) -> int:
        return self.sizes[-1][1]


def bucket_assign(buckets: BucketConfig, len_ctx: int, len_tgt: int) -> int | None:
    """Smallest bucket admitting both lengths; None when nothing fits."""
    if len_ctx < 1 or len_tgt < 1:
        raise ValueError("lengths must be positive")
    for i, (max_ctx, max_tgt) in enumerate(buckets.sizes):
        if len_ctx <= max_ctx and len_tgt <= max_tgt:
            return i
    return None


def pad_to_bucket(token_ids: Sequence[int], bucket_len: int) -> list[int]:
    """tokens + eos + pad... to exactly bucket_len."""
    if len(token_ids) > bucket_len - 1:
        raise ValueError(
            f"{len(token_ids)} tokens cannot fit bucket of {bucket_len} with eos"
        )
    out = list(token_ids)
    out.append(EOS)
    out.extend([PAD] * (bucket_len - len(out)))
    return out
