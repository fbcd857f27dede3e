"""Append-only JSON-lines journals.

Each store persists through one journal file. A record is only
acknowledged after write + flush + fsync, so anything a caller saw
confirmed is on disk even if the process dies the next instant. Replay
is strict except for the final line: a crash can tear the last write,
and a torn tail is dropped; a bad record anywhere else means real
corruption and raises.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path
from typing import Iterator, Union

from .errors import JournalError


class Journal:
    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        """Durably append one record; returns only after fsync."""
        record = dict(record)
        record.setdefault("ts", time.time())
        line = json.dumps(record, ensure_ascii=False, separators=(",", ":"))
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def close(self) -> None:
        with self._lock:
            if not self._fh.closed:
                self._fh.close()

    def truncate(self) -> None:
        """Drop all records (used after their state went into a snapshot)."""
        with self._lock:
            self._fh.close()
            self._fh = open(self.path, "w", encoding="utf-8")
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def __enter__(self) -> "Journal":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def replay(path: Union[str, Path]) -> Iterator[dict]:
    """Yield journal records in order. Missing file yields nothing."""
    path = Path(path)
    if not path.exists():
        return
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    # a trailing newline leaves one empty tail element; a torn write
    # leaves a partial record there instead
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except ValueError as exc:
            if i == len(lines) - 1:
                return  # torn final write, drop it
            raise JournalError(
                f"{path.name}: corrupt record on line {i + 1}"
            ) from exc
        yield record
