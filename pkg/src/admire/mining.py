"""Per-site mining: every algorithm emits sufficient statistics.

Each local pass reads exactly one partition and produces counts/sums from
which the global model is reconstructed exactly by the knowledge map, so
distributed runs are verifiably equivalent to centralized ones.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations

from .errors import MiningError
from .table import CAT, MISSING, NUM, Table

GAUSSIAN_VARIANCE_FLOOR = 1e-9
LAPLACE_ALPHA = 1


@dataclass
class CentroidSums:
    """Per-cluster (vector sum, row count, partial SSE) for one partition."""

    sums: list  # k vectors
    counts: list  # k ints
    sse: list  # k floats

    @property
    def k(self) -> int:
        return len(self.sums)


def kmeans_assign_and_sum(partition: Table, centroids) -> CentroidSums:
    """Lloyd assignment over one partition; ties go to the lowest index."""
    if not centroids:
        raise MiningError("dimension-mismatch", "need at least one centroid")
    dim = len(centroids[0])
    if any(len(c) != dim for c in centroids):
        raise MiningError("dimension-mismatch", "centroids differ in dimension")
    if any(c.kind != NUM for c in partition.schema):
        raise MiningError("non-numeric-data", "clustering needs all-num columns")
    if len(partition.schema) != dim:
        raise MiningError(
            "dimension-mismatch",
            f"data has {len(partition.schema)} dims, centroids {dim}",
        )
    k = len(centroids)
    sums = [[0.0] * dim for _ in range(k)]
    counts = [0] * k
    sse = [0.0] * k
    for row in partition.rows:
        if MISSING in row:
            raise MiningError("non-numeric-data", "missing cells not allowed here")
        best, best_d = 0, None
        for ci, cen in enumerate(centroids):
            d = sum((x - c) ** 2 for x, c in zip(row, cen))
            if best_d is None or d < best_d:
                best, best_d = ci, d
        counts[best] += 1
        sse[best] += best_d
        for j, x in enumerate(row):
            sums[best][j] += x
    return CentroidSums(sums=sums, counts=counts, sse=sse)


# --- association rules -------------------------------------------------------
# Itemsets are canonical tuples of item strings in sorted order.


def canonical_itemset(items) -> tuple:
    return tuple(sorted(items))


@dataclass
class ItemsetCounts:
    counts: dict  # itemset tuple -> int
    transaction_count: int


def transactions_from_table(table: Table):
    """One transaction per row: the set of 'column=value' items over cat cells."""
    cat_idx = [(i, c.name) for i, c in enumerate(table.schema) if c.kind == CAT]
    out = []
    for row in table.rows:
        out.append(
            frozenset(f"{name}={row[i]}" for i, name in cat_idx if row[i] is not MISSING)
        )
    return out


def apriori_count(transactions, candidates) -> ItemsetCounts:
    """Support counts of each candidate itemset over one partition."""
    counts = {}
    for cand in candidates:
        cset = set(cand)
        counts[canonical_itemset(cand)] = sum(1 for t in transactions if cset <= t)
    return ItemsetCounts(counts=counts, transaction_count=len(transactions))


def apriori_gen(frequent_k):
    """Standard join + prune candidate generation from frequent k-itemsets."""
    frequent = sorted(canonical_itemset(f) for f in frequent_k)
    if not frequent:
        return []
    size = len(frequent[0])
    if any(len(f) != size for f in frequent):
        raise MiningError("mixed-sizes", "frequent itemsets must share one size")
    fset = set(frequent)
    out = []
    for i, a in enumerate(frequent):
        for b in frequent[i + 1 :]:
            if a[:-1] != b[:-1]:
                break  # sorted order: no later b shares the prefix
            cand = a + (b[-1],)
            if all(
                canonical_itemset(s) in fset for s in combinations(cand, size)
            ):
                out.append(cand)
    return sorted(set(out))


# --- naive Bayes -------------------------------------------------------------


@dataclass
class BayesCounts:
    """Class-conditional counts/sums from one partition (or a merge of them)."""

    label_column: str
    cat_columns: tuple
    num_columns: tuple
    class_counts: dict = field(default_factory=dict)  # class -> int
    # class -> column -> category -> int
    cat_counts: dict = field(default_factory=dict)
    # class -> column -> [sum, sum_sq, count]
    num_stats: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.class_counts.values())


def bayes_fit(partition: Table, label_column: str) -> BayesCounts:
    label_idx = partition.column_index(label_column)
    if partition.schema[label_idx].kind != CAT:
        raise MiningError("missing-label", f"label column {label_column!r} is not cat")
    cat_cols = tuple(
        c.name for c in partition.schema if c.kind == CAT and c.name != label_column
    )
    num_cols = tuple(c.name for c in partition.schema if c.kind == NUM)
    model = BayesCounts(label_column=label_column, cat_columns=cat_cols, num_columns=num_cols)
    cat_idx = [partition.column_index(n) for n in cat_cols]
    num_idx = [partition.column_index(n) for n in num_cols]
    for i, row in enumerate(partition.rows):
        label = row[label_idx]
        if label is MISSING:
            raise MiningError("missing-label", f"row {i} has a missing label")
        model.class_counts[label] = model.class_counts.get(label, 0) + 1
        ccol = model.cat_counts.setdefault(label, {})
        for name, idx in zip(cat_cols, cat_idx):
            if row[idx] is not MISSING:
                hist = ccol.setdefault(name, {})
                hist[row[idx]] = hist.get(row[idx], 0) + 1
        ncol = model.num_stats.setdefault(label, {})
        for name, idx in zip(num_cols, num_idx):
            if row[idx] is not MISSING:
                acc = ncol.setdefault(name, [0.0, 0.0, 0])
                acc[0] += row[idx]
                acc[1] += row[idx] ** 2
                acc[2] += 1
    return model


def _category_vocabulary(model: BayesCounts, column: str):
    vocab = set()
    for per_col in model.cat_counts.values():
        vocab.update(per_col.get(column, {}))
    return sorted(vocab)


def bayes_predict(model: BayesCounts, row: dict):
    """Argmax of log posterior with Laplace-smoothed categorical likelihoods
    and Gaussian numeric likelihoods; ties go to the smallest class name."""
    if not model.class_counts:
        raise MiningError("empty-model", "no classes fitted")
    total = model.total
    scores = {}
    for cls in sorted(model.class_counts):
        n_cls = model.class_counts[cls]
        score = math.log(n_cls / total)
        for col in model.cat_columns:
            value = row.get(col)
            if value is MISSING or value is None:
                continue
            vocab = _category_vocabulary(model, col)
            if not vocab:
                continue
            count = model.cat_counts.get(cls, {}).get(col, {}).get(value, 0)
            score += math.log(
                (count + LAPLACE_ALPHA) / (n_cls + LAPLACE_ALPHA * len(vocab))
            )
        for col in model.num_columns:
            value = row.get(col)
            if value is MISSING or value is None:
                continue
            acc = model.num_stats.get(cls, {}).get(col)
            if not acc or acc[2] == 0:
                continue
            s, sq, c = acc
            mean = s / c
            var = max(sq / c - mean * mean, GAUSSIAN_VARIANCE_FLOOR)
            score += -0.5 * math.log(2.0 * math.pi * var) - (value - mean) ** 2 / (2.0 * var)
        scores[cls] = score
    best = max(scores.values())
    label = min(c for c, s in scores.items() if s == best)
    return label, scores
