"""Small helpers for line-delimited JSON files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator


class JsonLinesError(ValueError):
    """Invalid JSON at a known line of a .jsonl file."""

    def __init__(self, path: str | Path, line_number: int, message: str) -> None:
        super().__init__(f"{path}: line {line_number}: {message}")
        self.line_number = line_number


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def append_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        fh.flush()


def read_jsonl(path: str | Path, tolerate_torn_tail: bool = False) -> Iterator[tuple[int, Any]]:
    """Yield (line_number, record) pairs.

    With tolerate_torn_tail, a JSON error on the final line is swallowed
    (a process killed mid-write leaves a torn last line); errors anywhere
    else raise JsonLinesError with the file line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    for index, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield index, json.loads(line)
        except json.JSONDecodeError as exc:
            if tolerate_torn_tail and index == len(lines):
                return
            raise JsonLinesError(path, index, exc.msg) from exc
