# packages/ptebd/export.py
from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"


# ------------ Atomic writes ------------
def atomic_write_bytes(path: Union[str, Path], data: bytes) -> Path:
    """Write to a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug("wrote %s (%d bytes)", path, len(data))
    return path


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


# ------------ CSV / JSON ------------
def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float) or hasattr(v, "__float__"):
        return format(float(v), FLOAT_FORMAT)
    return str(v)


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """
    Comma-separated text with a header row; floats printed with 17 significant digits.

    >>> csv_text(["t", "x"], [[0.0, 0.5]])
    't,x\\n0,0.5\\n'
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([format_value(v) for v in row] for row in rows)
    return buf.getvalue()


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def columns_to_rows(columns: Dict[str, List[Any]]) -> List[List[Any]]:
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    return [list(r) for r in zip(*columns.values())]


def write_json(path: Union[str, Path], payload: Dict[str, Any]) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
