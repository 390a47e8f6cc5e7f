"""Atomic file writes and line-delimited record files."""

import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterator, TypeVar

import torch
from pydantic import BaseModel

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def _temp_path(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    os.close(fd)
    return Path(name)


def atomic_write_text(path: Path, text: str) -> None:
    """Write text via a temp file in the same directory, then rename."""
    tmp = _temp_path(path)
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def atomic_torch_save(obj: Any, path: Path) -> None:
    """torch.save via a temp file in the same directory, then rename."""
    tmp = _temp_path(path)
    try:
        torch.save(obj, tmp)
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def write_new_text(path: Path, text: str) -> None:
    """Write a file that must not exist yet (immutable artifacts like manifests)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "x", encoding="utf-8") as f:
        f.write(text)


def append_record(path: Path, record: BaseModel) -> None:
    """Append one record as a JSON line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as f:
        f.write(record.model_dump_json() + "\n")
        f.flush()


def write_records(path: Path, records: list[BaseModel]) -> None:
    """Write a whole record file atomically."""
    atomic_write_text(path, "".join(r.model_dump_json() + "\n" for r in records))


def iter_records(path: Path, model: type[ModelT]) -> Iterator[ModelT]:
    """Iterate records of one type from a JSON-lines file."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield model.model_validate_json(line)


def write_table(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    """Write a tab-separated table consumable by plotting tools."""
    lines = ["\t".join(header)]
    lines.extend("\t".join(_format_cell(c) for c in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")
    logger.info(f"Wrote table with {len(rows)} rows to {path}")


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
