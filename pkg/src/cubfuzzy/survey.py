"""Loading, validating and summarizing respondent-by-item rating matrices."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .cub import FrequencyTable, RatingScale
from .errors import DomainError, ParseError, ValidationError

__all__ = [
    "MISSING",
    "RatingMatrix",
    "ValidationReport",
    "load_csv",
    "read_csv_text",
    "to_csv_text",
    "save_csv",
    "item_frequencies",
]

MISSING = 0
ON_INVALID = ("error", "drop", "coerce")


@dataclass(frozen=True)
class RatingMatrix:
    """Ratings as an ``n x K`` integer array, ``MISSING`` (0) marking gaps."""

    items: tuple[str, ...]
    data: np.ndarray
    scale: RatingScale

    def __post_init__(self):
        items = tuple(str(i) for i in self.items)
        if not items:
            raise DomainError("a rating matrix needs at least one item")
        if len(set(items)) != len(items):
            dup = sorted({i for i in items if items.count(i) > 1})
            raise DomainError(f"duplicate item identifiers: {dup}")
        data = np.asarray(self.data, dtype=np.int64)
        if data.ndim != 2 or data.shape[1] != len(items):
            raise DomainError(f"data must be n x {len(items)}, got shape {data.shape}")
        if data.shape[0] == 0:
            raise DomainError("a rating matrix needs at least one respondent")
        bad = (data != MISSING) & ((data < 1) | (data > self.scale.m))
        if np.any(bad):
            j, k = map(int, np.argwhere(bad)[0])
            raise ValidationError(
                f"rating {data[j, k]} for item {items[k]!r} (row {j}) outside 1..{self.scale.m}",
                issues=[(j, items[k], int(data[j, k]))],
            )
        data.setflags(write=False)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return len(self.items)

    def column(self, item_id: str) -> np.ndarray:
        try:
            k = self.items.index(item_id)
        except ValueError:
            raise DomainError(f"unknown item {item_id!r}") from None
        return self.data[:, k]

    def ratings(self, item_id: str) -> np.ndarray:
        """Non-missing ratings of one item."""
        col = self.column(item_id)
        return col[col != MISSING]

    def complete_rows(self) -> np.ndarray:
        """Listwise deletion: rows with no missing rating."""
        return self.data[np.all(self.data != MISSING, axis=1)]

    def __eq__(self, other):
        if not isinstance(other, RatingMatrix):
            return NotImplemented
        return (
            self.items == other.items
            and self.scale == other.scale
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None


@dataclass
class ValidationReport:
    total_rows: int = 0
    accepted_rows: int = 0
    rejected_rows: int = 0
    missing_cells: int = 0
    coerced_cells: int = 0
    # (line, item, raw value) for every out-of-range cell
    issues: list[tuple[int, str, str]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "total_rows": self.total_rows,
            "accepted_rows": self.accepted_rows,
            "rejected_rows": self.rejected_rows,
            "missing_cells": self.missing_cells,
            "coerced_cells": self.coerced_cells,
            "issues": [list(i) for i in self.issues],
        }

    def summary(self) -> str:
        return (
            f"rows: {self.total_rows} read, {self.accepted_rows} accepted, "
            f"{self.rejected_rows} rejected; missing cells: {self.missing_cells}; "
            f"coerced cells: {self.coerced_cells}"
        )


def read_csv_text(
    text: str,
    scale: RatingScale,
    missing_token: str = "",
    on_invalid: str = "error",
) -> tuple[RatingMatrix, ValidationReport]:
    """Parse CSV text with a header row of item names.

    ``on_invalid`` controls out-of-range ratings: ``"error"`` raises a
    :class:`ValidationError` listing every bad cell, ``"drop"`` rejects the
    row, ``"coerce"`` turns the cell into a missing value.
    """
    if on_invalid not in ON_INVALID:
        raise DomainError(f"on_invalid must be one of {ON_INVALID}, got {on_invalid!r}")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DomainError("empty CSV input: no header row") from None
    items = [h.strip() for h in header]
    if not items or all(not i for i in items):
        raise DomainError("empty CSV header")

    report = ValidationReport()
    rows = []
    token = missing_token.strip()
    for line, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != len(items):
            raise ParseError(
                f"line {line}: expected {len(items)} fields, found {len(raw)}", line=line
            )
        report.total_rows += 1
        row, reject = [], False
        for item, cell in zip(items, raw):
            cell = cell.strip()
            if cell == token:
                row.append(MISSING)
                report.missing_cells += 1
                continue
            try:
                value = int(cell)
            except ValueError:
                try:
                    f = float(cell)
                except ValueError:
                    f = None
                if f is None or not f.is_integer():
                    raise ParseError(
                        f"line {line}, item {item!r}: cannot parse {cell!r} as a rating",
                        line=line,
                    ) from None
                value = int(f)
            if 1 <= value <= scale.m:
                row.append(value)
                continue
            report.issues.append((line, item, cell))
            if on_invalid == "coerce":
                row.append(MISSING)
                report.coerced_cells += 1
            else:
                reject = True
                row.append(MISSING)
        if reject:
            report.rejected_rows += 1
        else:
            rows.append(row)
            report.accepted_rows += 1

    if on_invalid == "error" and report.issues:
        listing = "; ".join(f"line {l} item {i!r} value {v!r}" for l, i, v in report.issues[:20])
        raise ValidationError(
            f"{len(report.issues)} rating(s) outside 1..{scale.m}: {listing}",
            issues=report.issues,
            report=report,
        )
    if report.total_rows == 0:
        raise DomainError("CSV input has a header but no respondent rows")
    if not rows:
        raise ValidationError("every row was rejected", issues=report.issues, report=report)
    data = np.array(rows, dtype=np.int64)
    return RatingMatrix(tuple(items), data, scale), report


def load_csv(
    path: str | os.PathLike,
    scale: RatingScale,
    missing_token: str = "",
    on_invalid: str = "error",
) -> tuple[RatingMatrix, ValidationReport]:
    with open(path, encoding="utf-8-sig", newline="") as fh:
        text = fh.read()
    if not text.strip():
        raise DomainError(f"{os.fspath(path)}: empty file")
    return read_csv_text(text, scale, missing_token, on_invalid)


def to_csv_text(matrix: RatingMatrix, missing_token: str = "") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(matrix.items)
    for row in matrix.data:
        writer.writerow([missing_token if v == MISSING else int(v) for v in row])
    return buf.getvalue()


def save_csv(matrix: RatingMatrix, path: str | os.PathLike, missing_token: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv_text(matrix, missing_token))


def item_frequencies(matrix: RatingMatrix, item_id: str) -> FrequencyTable:
    r = matrix.ratings(item_id)
    if r.size == 0:
        raise DomainError(f"item {item_id!r} has no non-missing ratings")
    return FrequencyTable.from_counts(np.bincount(r - 1, minlength=matrix.scale.m))
