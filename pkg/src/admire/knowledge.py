"""Knowledge map: merges local models into global models and records results.

All merges fold sufficient statistics in ascending site-id order, so results
are independent of the order local models arrive and exactly equal (counts) or
equal within float tolerance (sums) to a centralized run on the whole table.
"""

from dataclasses import dataclass
from itertools import combinations

from .errors import IntegrationError
from .jobs import TaskKind
from .mining import (
    BayesCounts,
    CentroidSums,
    ItemsetCounts,
    apriori_count,
    apriori_gen,
    canonical_itemset,
    kmeans_assign_and_sum,
)
from .table import CAT, MISSING, NUM, Table


@dataclass
class ClusteringModel:
    centroids: list  # k vectors
    counts: list  # rows per cluster at the final assignment
    total_sse: float
    iterations: int = 0

    variant = "clustering"


@dataclass(frozen=True)
class Rule:
    antecedent: tuple
    consequent: tuple
    support: float
    confidence: float


@dataclass
class RulesModel:
    frequent: list  # (itemset tuple, support) sorted lexicographically
    rules: list  # Rule, sorted by (antecedent, consequent)
    transaction_count: int

    variant = "rules"


@dataclass
class ClassifierModel:
    counts: BayesCounts

    variant = "classifier"


def merge_kmeans(partials, previous_centroids):
    """Merge per-site centroid sums; empty clusters keep the previous centroid.

    ``partials`` is a list of (site_id, CentroidSums); it is sorted by site id
    before folding so arrival order cannot change the result.
    """
    if not partials:
        raise IntegrationError("shape-mismatch", "no partials to merge")
    ordered = sorted(partials, key=lambda p: p[0])
    k = ordered[0][1].k
    dim = len(previous_centroids[0])
    if len(previous_centroids) != k:
        raise IntegrationError("shape-mismatch", "previous centroids have wrong k")
    for _, part in ordered:
        if part.k != k or any(len(s) != dim for s in part.sums):
            raise IntegrationError("shape-mismatch", "partials disagree on k or dim")
    sums = [[0.0] * dim for _ in range(k)]
    counts = [0] * k
    total_sse = 0.0
    for _, part in ordered:
        for ci in range(k):
            counts[ci] += part.counts[ci]
            total_sse += part.sse[ci]
            for j in range(dim):
                sums[ci][j] += part.sums[ci][j]
    centroids = []
    for ci in range(k):
        if counts[ci] == 0:
            centroids.append(list(previous_centroids[ci]))
        else:
            centroids.append([s / counts[ci] for s in sums[ci]])
    return centroids, total_sse, counts


def first_k_distinct_rows(table: Table, k: int):
    """Default k-means initialization: the first k distinct rows, in order."""
    seen = []
    for row in table.rows:
        vec = list(row)
        if vec not in seen:
            seen.append(vec)
        if len(seen) == k:
            return seen
    raise IntegrationError("bad-k", f"need {k} distinct rows, found {len(seen)}")


def distributed_kmeans(partitions, k, init_centroids, max_iter, tol, history=None):
    """Iterate local assignment + global merge until convergence or max_iter.

    Matches centralized Lloyd's on the concatenated table (same init, same
    lowest-index tie rule).  ``history``, when a list, collects the centroid
    snapshot after every merge.  The reported SSE comes from a final
    assignment pass against the returned centroids.
    """
    total_rows = sum(p.n_rows for p in partitions)
    if total_rows == 0:
        raise IntegrationError("empty-data", "no rows to cluster")
    if k < 1 or len(init_centroids) != k:
        raise IntegrationError("bad-k", f"need k >= 1 and {k} initial centroids")
    if max_iter < 1:
        raise IntegrationError("bad-k", "max_iter must be >= 1")
    centroids = [list(c) for c in init_centroids]
    iterations = 0
    for _ in range(max_iter):
        partials = [
            (site, kmeans_assign_and_sum(part, centroids))
            for site, part in enumerate(partitions)
        ]
        new_centroids, _, _ = merge_kmeans(partials, centroids)
        displacement = max(
            abs(a - b) for cen, prev in zip(new_centroids, centroids) for a, b in zip(cen, prev)
        )
        centroids = new_centroids
        iterations += 1
        if history is not None:
            history.append([list(c) for c in centroids])
        if displacement < tol:
            break
    final_partials = [
        (site, kmeans_assign_and_sum(part, centroids))
        for site, part in enumerate(partitions)
    ]
    _, total_sse, counts = merge_kmeans(final_partials, centroids)
    return ClusteringModel(
        centroids=centroids, counts=counts, total_sse=total_sse, iterations=iterations
    )


def merge_apriori(level_counts) -> ItemsetCounts:
    """Count distribution: sum per-candidate counts over sites (site-id order)."""
    if not level_counts:
        raise IntegrationError("shape-mismatch", "no site counts to merge")
    ordered = sorted(level_counts, key=lambda p: p[0])
    counts: dict = {}
    total = 0
    for _, part in ordered:
        total += part.transaction_count
        for itemset, n in sorted(part.counts.items()):
            counts[itemset] = counts.get(itemset, 0) + n
    return ItemsetCounts(counts=counts, transaction_count=total)


def drive_apriori(transaction_partitions, minsup, minconf) -> RulesModel:
    """Level-wise distributed Apriori plus rule generation.

    Per level each site counts the shared candidate list; global counts are the
    site sums.  Rules X -> Z\\X are kept when confidence >= minconf.
    """
    if not 0.0 < minsup <= 1.0:
        raise IntegrationError("invalid-threshold", f"minsup {minsup} not in (0, 1]")
    if not 0.0 < minconf <= 1.0:
        raise IntegrationError("invalid-threshold", f"minconf {minconf} not in (0, 1]")
    total = sum(len(p) for p in transaction_partitions)
    support: dict = {}
    if total:
        items = sorted({item for part in transaction_partitions for t in part for item in t})
        candidates = [(item,) for item in items]
        while candidates:
            merged = merge_apriori(
                [
                    (site, apriori_count(part, candidates))
                    for site, part in enumerate(transaction_partitions)
                ]
            )
            frequent_k = []
            for cand in candidates:
                sup = merged.counts[cand] / total
                if sup >= minsup:
                    support[cand] = sup
                    frequent_k.append(cand)
            candidates = apriori_gen(frequent_k)
    rules = []
    for itemset, sup in support.items():
        if len(itemset) < 2:
            continue
        for size in range(1, len(itemset)):
            for ante in combinations(itemset, size):
                conf = sup / support[canonical_itemset(ante)]
                if conf >= minconf:
                    cons = canonical_itemset(set(itemset) - set(ante))
                    rules.append(Rule(canonical_itemset(ante), cons, sup, conf))
    rules.sort(key=lambda r: (r.antecedent, r.consequent))
    frequent = sorted(support.items())
    return RulesModel(frequent=frequent, rules=rules, transaction_count=total)


def merge_bayes(partials) -> BayesCounts:
    """Componentwise sums of per-site class-conditional statistics."""
    if not partials:
        raise IntegrationError("schema-mismatch", "no partials to merge")
    ordered = sorted(partials, key=lambda p: p[0])
    first = ordered[0][1]
    merged = BayesCounts(
        label_column=first.label_column,
        cat_columns=first.cat_columns,
        num_columns=first.num_columns,
    )
    for _, part in ordered:
        if (
            part.label_column != merged.label_column
            or part.cat_columns != merged.cat_columns
            or part.num_columns != merged.num_columns
        ):
            raise IntegrationError("schema-mismatch", "partials disagree on columns")
        for cls in sorted(part.class_counts):
            merged.class_counts[cls] = merged.class_counts.get(cls, 0) + part.class_counts[cls]
        for cls in sorted(part.cat_counts):
            dst = merged.cat_counts.setdefault(cls, {})
            for col in sorted(part.cat_counts[cls]):
                hist = dst.setdefault(col, {})
                for cat in sorted(part.cat_counts[cls][col]):
                    hist[cat] = hist.get(cat, 0) + part.cat_counts[cls][col][cat]
        for cls in sorted(part.num_stats):
            dst = merged.num_stats.setdefault(cls, {})
            for col in sorted(part.num_stats[cls]):
                acc = dst.setdefault(col, [0.0, 0.0, 0])
                src = part.num_stats[cls][col]
                acc[0] += src[0]
                acc[1] += src[1]
                acc[2] += src[2]
    return merged


def select_strategy(kind: TaskKind, table: Table, repo, label_column=None):
    """Pick the lexicographically smallest published algorithm whose kind
    matches, after checking the data is shaped for that mining family."""
    if kind == TaskKind.CLUSTERING:
        if any(c.kind != NUM for c in table.schema):
            raise IntegrationError(
                "data-incompatible", "clustering: all columns must be num"
            )
    elif kind == TaskKind.ASSOCIATION_RULES:
        if not any(c.kind == CAT for c in table.schema):
            raise IntegrationError(
                "data-incompatible", "association rules: need at least one cat column"
            )
    elif kind == TaskKind.CLASSIFICATION:
        if label_column is None or label_column not in table.column_names:
            raise IntegrationError("data-incompatible", "classification: no label column")
        if table.column_kind(label_column) != CAT:
            raise IntegrationError("data-incompatible", "classification: label must be cat")
    candidates = repo.query_by_kind(kind)
    if not candidates:
        raise IntegrationError("no-algorithm", f"no algorithm of kind {kind.value}")
    return min(candidates, key=lambda a: a.id)


def emit_knowledge(repo, job_name: str, task_id: str, model, metrics):
    """Record a global model plus metrics in the knowledge repository."""
    return repo.add_knowledge(job_name, task_id, model, metrics)


# --- serialization (knowledge entry / results files) -------------------------


def model_to_dict(model) -> dict:
    if isinstance(model, ClusteringModel):
        return {
            "variant": "clustering",
            "centroids": [list(c) for c in model.centroids],
            "counts": list(model.counts),
            "total_sse": model.total_sse,
            "iterations": model.iterations,
        }
    if isinstance(model, RulesModel):
        return {
            "variant": "rules",
            "transaction_count": model.transaction_count,
            "frequent": [
                {"itemset": list(itemset), "support": sup}
                for itemset, sup in model.frequent
            ],
            "rules": [
                {
                    "antecedent": list(r.antecedent),
                    "consequent": list(r.consequent),
                    "support": r.support,
                    "confidence": r.confidence,
                }
                for r in model.rules
            ],
        }
    if isinstance(model, ClassifierModel):
        c = model.counts
        return {
            "variant": "classifier",
            "label_column": c.label_column,
            "cat_columns": list(c.cat_columns),
            "num_columns": list(c.num_columns),
            "class_counts": dict(c.class_counts),
            "cat_counts": {
                cls: {col: dict(hist) for col, hist in cols.items()}
                for cls, cols in c.cat_counts.items()
            },
            "num_stats": {
                cls: {col: list(acc) for col, acc in cols.items()}
                for cls, cols in c.num_stats.items()
            },
        }
    raise IntegrationError("shape-mismatch", f"unknown model type {type(model).__name__}")


def model_from_dict(d: dict):
    variant = d.get("variant")
    if variant == "clustering":
        return ClusteringModel(
            centroids=[list(map(float, c)) for c in d["centroids"]],
            counts=list(d["counts"]),
            total_sse=float(d["total_sse"]),
            iterations=int(d.get("iterations", 0)),
        )
    if variant == "rules":
        return RulesModel(
            frequent=[
                (tuple(e["itemset"]), float(e["support"])) for e in d["frequent"]
            ],
            rules=[
                Rule(
                    tuple(e["antecedent"]),
                    tuple(e["consequent"]),
                    float(e["support"]),
                    float(e["confidence"]),
                )
                for e in d["rules"]
            ],
            transaction_count=int(d["transaction_count"]),
        )
    if variant == "classifier":
        counts = BayesCounts(
            label_column=d["label_column"],
            cat_columns=tuple(d["cat_columns"]),
            num_columns=tuple(d["num_columns"]),
            class_counts={k: int(v) for k, v in d["class_counts"].items()},
            cat_counts={
                cls: {col: {cat: int(n) for cat, n in hist.items()} for col, hist in cols.items()}
                for cls, cols in d["cat_counts"].items()
            },
            num_stats={
                cls: {col: [float(a[0]), float(a[1]), int(a[2])] for col, a in cols.items()}
                for cls, cols in d["num_stats"].items()
            },
        )
        return ClassifierModel(counts=counts)
    raise IntegrationError("shape-mismatch", f"unknown model variant {variant!r}")
