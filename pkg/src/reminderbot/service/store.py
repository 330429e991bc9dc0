"""Append-only JSON journal backing the reminder book.

One JSON object per line; state is rebuilt by replaying the file on open.
Appends are flushed and fsynced before returning, so an acknowledged write
survives a crash. A torn trailing line (partial write at crash) is ignored
on replay rather than poisoning the whole store.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Iterator


class JournalError(Exception):
    pass


class Journal:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        # line-buffered append handle held for the journal's lifetime
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: dict[str, Any]) -> None:
        line = json.dumps(record, separators=(",", ":"), sort_keys=True)
        if "\n" in line:
            raise JournalError("record serialized with embedded newline")
        self._fh.write(line + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def replay(self) -> Iterator[dict[str, Any]]:
        if not self.path.exists():
            return
        lines = self.path.read_text(encoding="utf-8").splitlines()
        for i, line in enumerate(lines):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                # a torn final line is expected after a crash; anything
                # torn mid-file means external corruption
                if i == len(lines) - 1:
                    return
                raise JournalError(f"corrupt journal line {i + 1}") from None
            if not isinstance(record, dict):
                raise JournalError(f"journal line {i + 1} is not an object")
            yield record

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "Journal":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
