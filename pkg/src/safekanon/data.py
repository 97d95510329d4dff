"""Microdata tables: CSV loading and writing with multiset semantics."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

Row = tuple[str, ...]


def is_number(text: str) -> bool:
    try:
        return math.isfinite(float(text))
    except ValueError:
        return False


@dataclass
class Dataset:
    """A header plus a list of rows; duplicates are distinct members.

    Values are kept as the text read from the file. ``kinds`` records which
    columns parsed as numbers in every row.
    """

    columns: tuple[str, ...]
    rows: list[Row] = field(default_factory=list)
    kinds: tuple[str, ...] | None = None

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.rows = [tuple(r) for r in self.rows]
        for i, r in enumerate(self.rows):
            if len(r) != len(self.columns):
                raise ParseError(f"expected {len(self.columns)} fields, got {len(r)}", row=i + 2)
        if self.kinds is None:
            self.kinds = infer_kinds(self.columns, self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def counts(self) -> Counter:
        return Counter(self.rows)


def infer_kinds(columns, rows) -> tuple[str, ...]:
    """Numeric when every cell of a non-empty column parses as a finite number."""
    kinds = []
    for i in range(len(columns)):
        numeric = bool(rows) and all(is_number(r[i]) for r in rows)
        kinds.append(NUMERIC if numeric else CATEGORICAL)
    return tuple(kinds)


def load_dataset(csv_text: str) -> Dataset:
    """Parse CSV text whose first row is the header."""
    records = list(csv.reader(io.StringIO(csv_text)))
    if not records or not any(records[0]):
        raise ParseError("empty input: a header row is required", row=1)
    header, body = records[0], records[1:]
    rows = []
    for lineno, rec in enumerate(body, start=2):
        if not rec:
            # blank line
            continue
        if len(rec) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(rec)}", row=lineno)
        rows.append(tuple(rec))
    return Dataset(tuple(header), rows)


def read_dataset(path: str | Path) -> Dataset:
    return load_dataset(Path(path).read_text(encoding="utf-8"))


def format_rows(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(sorted(rows))
    return buf.getvalue()


def write_dataset(s, path: str | Path) -> None:
    """Write ``s`` (anything with ``columns`` and ``rows()``) as sorted CSV."""
    rows = s.rows() if callable(s.rows) else s.rows
    Path(path).write_text(format_rows(s.columns, rows), encoding="utf-8")
