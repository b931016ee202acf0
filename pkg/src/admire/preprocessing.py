"""Per-site data preparation run before mining.

Every operation here is local: it only ever reads the partition it is given,
so partitions can be preprocessed concurrently without any cross-site traffic.
"""

import math
import random

from .errors import DataError
from .table import CAT, MISSING, NUM, Table, column_stats


def clean_missing(table: Table, policy: str) -> Table:
    """Handle missing cells: drop_row removes them, impute fills them.

    Imputation uses the column mean (num) or modal category with lexicographic
    tie-break (cat), computed on this partition only.  Rows still missing after
    imputation (all-missing columns) are dropped.
    """
    if policy == "drop_row":
        rows = [r for r in table.rows if MISSING not in r]
        return Table(table.schema, rows)
    if policy != "impute":
        raise DataError("unknown-policy", f"unknown missing-cell policy {policy!r}")

    fill = []
    for col in table.schema:
        stats = column_stats(table, col.name)
        if stats["count"] == 0:
            fill.append(MISSING)
        elif col.kind == NUM:
            fill.append(stats["mean"])
        else:
            hist = stats["category_histogram"]
            best = max(hist.values())
            fill.append(min(c for c, n in hist.items() if n == best))
    rows = []
    for row in table.rows:
        cells = [f if c is MISSING else c for c, f in zip(row, fill)]
        if MISSING not in cells:
            rows.append(cells)
    return Table(table.schema, rows)


def zscore(table: Table, columns) -> Table:
    """Standardise the named num columns to mean 0, population variance 1."""
    params = {}
    for name in columns:
        if table.column_kind(name) != NUM:
            raise DataError("non-numeric-column", f"column {name} is not num")
        stats = column_stats(table, name)
        var = stats.get("population_variance", 0.0)
        if stats["count"] == 0 or var <= 0.0:
            raise DataError("constant-column", f"column {name} has zero variance")
        params[table.column_index(name)] = (stats["mean"], math.sqrt(var))
    rows = []
    for row in table.rows:
        cells = list(row)
        for idx, (mean, std) in params.items():
            if cells[idx] is not MISSING:
                cells[idx] = (cells[idx] - mean) / std
        rows.append(cells)
    return Table(table.schema, rows)


def minmax(table: Table, columns) -> Table:
    """Rescale the named num columns to [0, 1]."""
    params = {}
    for name in columns:
        if table.column_kind(name) != NUM:
            raise DataError("non-numeric-column", f"column {name} is not num")
        stats = column_stats(table, name)
        if stats["count"] == 0 or stats["max"] <= stats["min"]:
            raise DataError("constant-column", f"column {name} has max <= min")
        params[table.column_index(name)] = (stats["min"], stats["max"] - stats["min"])
    rows = []
    for row in table.rows:
        cells = list(row)
        for idx, (lo, span) in params.items():
            if cells[idx] is not MISSING:
                cells[idx] = (cells[idx] - lo) / span
        rows.append(cells)
    return Table(table.schema, rows)


def sample(table: Table, fraction: float, seed: int) -> Table:
    """Sample ceil(fraction * n) rows without replacement, seeded."""
    if not 0.0 < fraction <= 1.0:
        raise DataError("invalid-fraction", f"fraction must be in (0, 1], got {fraction}")
    n = table.n_rows
    m = math.ceil(fraction * n)
    picked = random.Random(seed).sample(range(n), m)
    return Table(table.schema, [table.rows[i] for i in picked])
