"""Line-delimited JSON reading/writing with line-numbered errors."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterator

from .errors import ParseError


def read_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) for every non-blank line of an NDJSON file.

    Line numbers are 1-based. Blank lines are skipped; anything else that is
    not a JSON object raises ParseError naming the line.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from exc
            if not isinstance(record, dict):
                raise ParseError("record is not a JSON object", line=lineno)
            yield lineno, record


def write_records(path: str | Path, records: Iterator[dict] | list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")


def require(record: dict, field: str, lineno: int) -> Any:
    if field not in record:
        raise ParseError(f"missing field {field!r}", line=lineno)
    return record[field]
