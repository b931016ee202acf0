"""Typed tabular datasets.

File format: line 1 = comma-separated column names, line 2 = column types
(``num`` | ``cat``), remaining lines = rows.  A ``?`` or empty field is a
missing cell.  No quoting: commas are forbidden inside values.
"""

import hashlib
import random
from dataclasses import dataclass

from .errors import DataError

NUM = "num"
CAT = "cat"
MISSING = None

_MISSING_TOKENS = ("?", "")


@dataclass(frozen=True)
class Column:
    name: str
    kind: str


class Table:
    """Immutable table; num cells are floats, cat cells strings, missing None."""

    def __init__(self, schema, rows):
        cols = tuple(c if isinstance(c, Column) else Column(*c) for c in schema)
        names = [c.name for c in cols]
        if len(set(names)) != len(names):
            raise DataError("schema-error", "duplicate column names")
        for c in cols:
            if c.kind not in (NUM, CAT):
                raise DataError("schema-error", f"unknown column kind {c.kind!r}")
        checked = []
        for i, row in enumerate(rows):
            row = tuple(row)
            if len(row) != len(cols):
                raise DataError(
                    "schema-error",
                    f"row {i} has {len(row)} cells, expected {len(cols)}",
                )
            cells = []
            for col, cell in zip(cols, row):
                if cell is MISSING:
                    cells.append(MISSING)
                elif col.kind == NUM:
                    if isinstance(cell, bool) or not isinstance(cell, (int, float)):
                        raise DataError(
                            "type-error", f"row {i}, column {col.name}: not numeric"
                        )
                    cells.append(float(cell))
                else:
                    if not isinstance(cell, str):
                        raise DataError(
                            "type-error", f"row {i}, column {col.name}: not a string"
                        )
                    cells.append(cell)
            checked.append(tuple(cells))
        self.schema = cols
        self.rows = tuple(checked)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def column_names(self):
        return tuple(c.name for c in self.schema)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.schema):
            if c.name == name:
                return i
        raise DataError("unknown-column", f"no column named {name!r}")

    def column_kind(self, name: str) -> str:
        return self.schema[self.column_index(name)].kind

    def column(self, name: str):
        i = self.column_index(name)
        return [row[i] for row in self.rows]

    def __eq__(self, other):
        return (
            isinstance(other, Table)
            and self.schema == other.schema
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.schema, self.rows))

    def __repr__(self):
        return f"Table({len(self.schema)} cols, {self.n_rows} rows)"


def load_table(path) -> Table:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    while lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2:
        raise DataError("parse-error", f"line {len(lines) + 1}: missing header or type row")
    names = [t.strip() for t in lines[0].split(",")]
    kinds = [t.strip() for t in lines[1].split(",")]
    if len(kinds) != len(names):
        raise DataError("parse-error", "line 2: type row width differs from header")
    for k in kinds:
        if k not in (NUM, CAT):
            raise DataError("parse-error", f"line 2: unknown column type {k!r}")
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        tokens = line.split(",")
        if len(tokens) != len(names):
            raise DataError("parse-error", f"line {lineno}: expected {len(names)} fields")
        cells = []
        for name, kind, tok in zip(names, kinds, tokens):
            tok = tok.strip()
            if tok in _MISSING_TOKENS:
                cells.append(MISSING)
            elif kind == NUM:
                try:
                    cells.append(float(tok))
                except ValueError:
                    raise DataError(
                        "type-error", f"line {lineno}, column {name}: {tok!r} is not numeric"
                    ) from None
            else:
                cells.append(tok)
        rows.append(cells)
    return Table(zip(names, kinds), rows)


def write_table(table: Table, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(c.name for c in table.schema) + "\n")
        fh.write(",".join(c.kind for c in table.schema) + "\n")
        for row in table.rows:
            fh.write(",".join(_format_cell(c, cell) for c, cell in zip(table.schema, row)))
            fh.write("\n")


def _format_cell(col: Column, cell) -> str:
    if cell is MISSING:
        return "?"
    if col.kind == NUM:
        return format(cell, ".17g")
    return cell


def horizontal_partition(table: Table, k: int, seed: int):
    """Split rows into k balanced partitions: seeded shuffle then round-robin."""
    if k < 1:
        raise DataError("invalid-k", f"partition count must be >= 1, got {k}")
    order = list(range(table.n_rows))
    random.Random(seed).shuffle(order)
    buckets: list[list] = [[] for _ in range(k)]
    for pos, idx in enumerate(order):
        buckets[pos % k].append(table.rows[idx])
    return [Table(table.schema, rows) for rows in buckets]


def column_stats(table: Table, name: str) -> dict:
    """Summaries over non-missing cells; num moments absent when count is 0."""
    kind = table.column_kind(name)
    values = [v for v in table.column(name) if v is not MISSING]
    missing = table.n_rows - len(values)
    if kind == CAT:
        hist: dict[str, int] = {}
        for v in values:
            hist[v] = hist.get(v, 0) + 1
        return {
            "count": len(values),
            "missing_count": missing,
            "category_histogram": {k: hist[k] for k in sorted(hist)},
        }
    stats = {"count": len(values), "missing_count": missing}
    if values:
        mean = sum(values) / len(values)
        stats["mean"] = mean
        stats["population_variance"] = sum((v - mean) ** 2 for v in values) / len(values)
        stats["min"] = min(values)
        stats["max"] = max(values)
    return stats


def row_multiset_digest(table: Table) -> str:
    """Order-independent digest: equal for tables that are row permutations."""
    schema_bytes = ";".join(f"{c.name}:{c.kind}" for c in table.schema).encode()
    total = 0
    for row in table.rows:
        parts = []
        for col, cell in zip(table.schema, row):
            if cell is MISSING:
                parts.append("?")
            elif col.kind == NUM:
                parts.append("n" + format(cell, ".17g"))
            else:
                parts.append("c" + cell)
        h = hashlib.sha256("\x1f".join(parts).encode()).digest()
        total = (total + int.from_bytes(h, "big")) % (1 << 256)
    final = hashlib.sha256(schema_bytes + total.to_bytes(32, "big")).hexdigest()
    return final
