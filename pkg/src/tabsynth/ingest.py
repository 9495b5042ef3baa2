"""CSV ingestion: typed columns, categorical detection, missing values.

A loaded table keeps every cell as raw text (``None`` for missing) so later
stages can decide how to interpret values; parsing to numbers/epochs happens
on demand.  Type inference is unanimous: a single non-conforming cell demotes
the column to the next weaker type, ending at string.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_CATEGORICAL_THRESHOLD = 10

#: Cell texts treated as missing (compared case-insensitively).
DEFAULT_MISSING_TOKENS = ("", "n/a")

_INT64_MIN = -(2**63)
_INT64_MAX = 2**63 - 1

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class CsvFormatError(ValueError):
    """Malformed input CSV: ragged rows, duplicate headers, missing header."""


class OverrideError(ValueError):
    """An attribute override names a column that does not exist."""


class UntypableColumnError(ValueError):
    """Type inference was asked about a column with no observed values."""


class DataType(Enum):
    INTEGER = "integer"
    FLOAT = "float"
    STRING = "string"
    DATETIME = "datetime"


@dataclass(frozen=True)
class AttributeOverride:
    """User-forced type and/or categorical flag for one attribute."""

    name: str
    data_type: DataType | None = None
    categorical: bool | None = None


@dataclass
class Column:
    name: str
    cells: list[str | None]
    inferred_type: DataType = DataType.STRING
    categorical: bool = False
    distinct_count: int = 0

    def non_missing(self) -> list[str]:
        return [c for c in self.cells if c is not None]

    def missing_mask(self) -> np.ndarray:
        return np.array([c is None for c in self.cells], dtype=bool)

    def numeric_values(self) -> np.ndarray:
        """Parsed non-missing values for integer/float/datetime columns.

        Datetimes become seconds since the Unix epoch so they share the
        numeric histogram path.
        """
        if self.inferred_type is DataType.DATETIME:
            parser = parse_datetime
        elif self.inferred_type in (DataType.INTEGER, DataType.FLOAT):
            parser = parse_float
        else:
            raise TypeError(f"column {self.name!r} of type {self.inferred_type.value} is not numeric")
        vals = []
        for c in self.cells:
            if c is None:
                continue
            v = parser(c)
            if v is None:
                raise ValueError(
                    f"column {self.name!r}: cell {c!r} does not parse as {self.inferred_type.value}"
                )
            vals.append(v)
        return np.asarray(vals, dtype=float)


@dataclass
class Table:
    columns: list[Column] = field(default_factory=list)

    @property
    def row_count(self) -> int:
        return len(self.columns[0].cells) if self.columns else 0

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    def rows(self) -> list[list[str | None]]:
        return [list(r) for r in zip(*(c.cells for c in self.columns))] if self.columns else []

    def write_csv(self, path: str | Path) -> None:
        """RFC-4180 output; missing cells become empty fields."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names)
            for row in self.rows():
                writer.writerow(["" if c is None else c for c in row])

    def to_csv_text(self) -> str:
        import io

        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(self.column_names)
        for row in self.rows():
            writer.writerow(["" if c is None else c for c in row])
        return buf.getvalue()


# --------------------------------------------------------------------------
# Cell parsers
# --------------------------------------------------------------------------


def parse_integer(text: str) -> int | None:
    """Strict signed-decimal integer within int64, else None."""
    s = text.strip()
    if not _INT_RE.match(s):
        return None
    value = int(s)
    if value < _INT64_MIN or value > _INT64_MAX:
        return None
    return value


def parse_float(text: str) -> float | None:
    """Strict decimal/scientific float; rejects inf/nan tokens."""
    s = text.strip()
    if not _FLOAT_RE.match(s):
        return None
    value = float(s)
    if math.isinf(value) or math.isnan(value):
        return None
    return value


def parse_datetime(text: str) -> float | None:
    """ISO-8601 date or date-time to epoch seconds (naive treated as UTC)."""
    s = text.strip()
    if s.endswith("Z") or s.endswith("z"):
        s = s[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(s)
    except ValueError:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def format_datetime(epoch_seconds: float) -> str:
    dt = datetime.fromtimestamp(round(epoch_seconds), tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S")


def format_float(value: float) -> str:
    """Shortest text that round-trips the float exactly."""
    return repr(float(value))


# --------------------------------------------------------------------------
# Inference operations
# --------------------------------------------------------------------------


def infer_type(cells: Sequence[str | None]) -> DataType:
    """Infer the unanimous data type of the non-missing cells.

    Order: integer, float, datetime, string.  Raises
    :class:`UntypableColumnError` when every cell is missing; the caller is
    expected to default such columns to string.
    """
    observed = [c for c in cells if c is not None]
    if not observed:
        raise UntypableColumnError("no non-missing cells to infer from")
    if all(parse_integer(c) is not None for c in observed):
        return DataType.INTEGER
    if all(parse_float(c) is not None for c in observed):
        return DataType.FLOAT
    if all(parse_datetime(c) is not None for c in observed):
        return DataType.DATETIME
    return DataType.STRING


def detect_categorical(cells: Sequence[str | None], threshold: int = DEFAULT_CATEGORICAL_THRESHOLD) -> bool:
    """True when the distinct non-missing value count is at most ``threshold``."""
    if threshold < 1:
        raise ValueError("categorical threshold must be >= 1")
    return len({c for c in cells if c is not None}) <= threshold


def missing_rate(cells: Sequence[str | None]) -> float:
    """Fraction of missing cells, exact, before any noise."""
    if not cells:
        raise ValueError("missing rate of an empty column is undefined")
    return sum(1 for c in cells if c is None) / len(cells)


# --------------------------------------------------------------------------
# CSV loading
# --------------------------------------------------------------------------


def _normalize_cell(text: str, missing_tokens: frozenset[str]) -> str | None:
    return None if text.strip().lower() in missing_tokens else text


def load_csv(
    path: str | Path,
    overrides: Iterable[AttributeOverride] = (),
    *,
    categorical_threshold: int = DEFAULT_CATEGORICAL_THRESHOLD,
    missing_tokens: Sequence[str] = DEFAULT_MISSING_TOKENS,
) -> Table:
    """Load a header-ed UTF-8 CSV into a typed :class:`Table`.

    Overrides are applied after inference and never affect other columns.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return _load_rows(csv.reader(fh), overrides, categorical_threshold, missing_tokens)


def load_csv_text(
    text: str,
    overrides: Iterable[AttributeOverride] = (),
    *,
    categorical_threshold: int = DEFAULT_CATEGORICAL_THRESHOLD,
    missing_tokens: Sequence[str] = DEFAULT_MISSING_TOKENS,
) -> Table:
    """Like :func:`load_csv` but from an in-memory CSV document."""
    import io

    return _load_rows(csv.reader(io.StringIO(text)), overrides, categorical_threshold, missing_tokens)


def _load_rows(
    reader: Iterable[list[str]],
    overrides: Iterable[AttributeOverride],
    categorical_threshold: int,
    missing_tokens: Sequence[str],
) -> Table:
    tokens = frozenset(t.lower() for t in missing_tokens)
    rows = iter(reader)
    try:
        header = next(rows)
    except StopIteration:
        raise CsvFormatError("input has no header row") from None
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise CsvFormatError(f"duplicate header names: {dupes}")
    if not header:
        raise CsvFormatError("header row is empty")

    cells: list[list[str | None]] = [[] for _ in header]
    for line_no, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise CsvFormatError(
                f"row {line_no} has {len(row)} cells, expected {len(header)}"
            )
        for i, cell in enumerate(row):
            cells[i].append(_normalize_cell(cell, tokens))

    columns = [
        _build_column(name, col_cells, categorical_threshold)
        for name, col_cells in zip(header, cells)
    ]
    table = Table(columns)
    return apply_overrides(table, overrides)


def _build_column(name: str, col_cells: list[str | None], threshold: int) -> Column:
    distinct = len({c for c in col_cells if c is not None})
    try:
        inferred = infer_type(col_cells)
    except UntypableColumnError:
        inferred = DataType.STRING
    return Column(
        name=name,
        cells=col_cells,
        inferred_type=inferred,
        categorical=detect_categorical(col_cells, threshold),
        distinct_count=distinct,
    )


def apply_overrides(table: Table, overrides: Iterable[AttributeOverride]) -> Table:
    """Return a table with per-attribute forced types/flags applied."""
    by_name = {c.name: c for c in table.columns}
    for ov in overrides:
        if ov.name not in by_name:
            raise OverrideError(f"override names unknown column {ov.name!r}")
        col = by_name[ov.name]
        if ov.data_type is not None:
            col = replace(col, inferred_type=ov.data_type)
        if ov.categorical is not None:
            col = replace(col, categorical=ov.categorical)
        by_name[ov.name] = col
    return Table([by_name[c.name] for c in table.columns])
