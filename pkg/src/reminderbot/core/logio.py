"""Conversation log file I/O.

The on-disk format is JSON lines: one conversation object per line with the
field names used by Conversation.to_dict(). The same files are produced by
the service's structured logging and consumed by the corpus pipeline and the
evaluation harness.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .messages import Conversation


def write_log(path: str | Path, conversations: Iterable[Conversation]) -> int:
    """Write conversations one per line; returns the number written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for conv in conversations:
            fh.write(json.dumps(conv.to_dict(), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_log(path: str | Path) -> Iterator[Conversation]:
    """Yield conversations from a JSON-lines log, skipping blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            yield Conversation.from_dict(json.loads(line))
