"""
CSV and gnuplot output for sweep rows.

Rows are plain dicts keyed by column name. Floats are written with twelve
significant digits so reruns with the same seed produce identical files.
"""

import csv
import logging
import sys
from contextlib import contextmanager
from itertools import groupby
from typing import Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


@contextmanager
def _open_output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", newline="", encoding="utf-8") as stream:
        yield stream


def write_csv(path: Optional[str], rows: Iterable[dict], columns: Sequence[str]) -> int:
    """Write header plus rows to ``path`` (stdout when None). Returns the row count."""
    count = 0
    with _open_output(path) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
            count += 1
    logger.debug(f"Wrote {count} rows to {path or 'stdout'}")
    return count


def _gnuplot_field(value) -> str:
    text = format_value(value)
    if text == "":
        return "?"
    if any(ch.isspace() for ch in text):
        return '"' + text.replace('"', "'") + '"'
    return text


def write_gnuplot(path: str, rows: Sequence[dict], columns: Sequence[str],
                  group_by: Optional[str] = None) -> None:
    """Whitespace-separated data block with a ``#`` header; a blank line separates groups."""
    with _open_output(path) as stream:
        stream.write("# " + " ".join(columns) + "\n")
        key = (lambda row: row.get(group_by)) if group_by else (lambda row: None)
        for index, (_, group) in enumerate(groupby(rows, key=key)):
            if index:
                stream.write("\n")
            for row in group:
                stream.write(" ".join(_gnuplot_field(row.get(column)) for column in columns) + "\n")
