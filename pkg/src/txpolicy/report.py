"""Deterministic CSV/JSON writers shared by the CLI subcommands."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence


def fmt(value: Any) -> str:
    """Render a cell: floats with 9 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".9g")
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]], path: str | Path) -> None:
    """Write ``rows`` under ``columns``; ``-`` means standard output."""
    text = render_csv(columns, rows)
    _write(text, path)


def _round(obj):
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(format(obj, ".9g"))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def emit_json(summary: Any, path: str | Path) -> None:
    _write(json.dumps(_round(summary), indent=2, sort_keys=True) + "\n", path)


def _write(text: str, path: str | Path) -> None:
    if str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)
