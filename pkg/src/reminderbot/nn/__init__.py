"""Recurrent encoder-decoder with attention, trained from scratch.

Kernel backend selection happens once at import. REMINDERBOT_KERNELS may be
``auto`` (default: compiled extension if built, numpy otherwise), ``python``
or ``cython``; asking for cython without the built extension is an error
rather than a silent slowdown.
"""

from __future__ import annotations

import os

_requested = os.environ.get("REMINDERBOT_KERNELS", "auto")
if _requested not in ("auto", "python", "cython"):
    raise RuntimeError(
        f"REMINDERBOT_KERNELS must be auto, python or cython, got {_requested!r}"
    )

if _requested == "python":
    from . import _kernels_np as kernels
elif _requested == "cython":
    from . import _kernels_cy as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_np as kernels

KERNEL_BACKEND: str = kernels.BACKEND


def get_kernels():
    return kernels


from .buckets import (  # noqa: E402
    DEFAULT_BUCKETS,
    BucketConfig,
    bucket_assign,
    pad_to_bucket,
)
from .vocab import (  # noqa: E402
    EOS,
    GO,
    PAD,
    UNK,
    CapacityError,
    Vocabulary,
    build_vocab,
    vocab_add_buffered,
)

__all__ = [
    "BucketConfig",
    "CapacityError",
    "DEFAULT_BUCKETS",
    "EOS",
    "GO",
    "KERNEL_BACKEND",
    "PAD",
    "UNK",
    "Vocabulary",
    "bucket_assign",
    "build_vocab",
    "get_kernels",
    "kernels",
    "pad_to_bucket",
    "vocab_add_buffered",
]
