"""Interpretation and evaluation of global models.

Metrics plus a deterministic line-oriented text rendering; every ordering is
total, so rendering the same model twice yields identical bytes.
"""

from .errors import EvaluationError
from .knowledge import ClassifierModel, ClusteringModel, RulesModel
from .mining import MISSING
from .table import NUM, Table


def accuracy(predictions, truth) -> float:
    if len(predictions) != len(truth):
        raise EvaluationError("length-mismatch", "prediction/truth lengths differ")
    if not predictions:
        raise EvaluationError("empty-input", "nothing to score")
    return sum(1 for p, t in zip(predictions, truth) if p == t) / len(predictions)


def confusion_matrix(predictions, truth) -> dict:
    """Nested dict: matrix[true_label][predicted_label] = count."""
    if len(predictions) != len(truth):
        raise EvaluationError("length-mismatch", "prediction/truth lengths differ")
    matrix: dict = {}
    for p, t in zip(predictions, truth):
        row = matrix.setdefault(t, {})
        row[p] = row.get(p, 0) + 1
    return matrix


def clustering_sse(model: ClusteringModel, data: Table) -> float:
    """Sum of squared distances to the nearest centroid (lowest-index ties)."""
    if any(c.kind != NUM for c in data.schema):
        raise EvaluationError("dimension-mismatch", "data must be all-num")
    dim = len(model.centroids[0]) if model.centroids else 0
    if len(data.schema) != dim:
        raise EvaluationError(
            "dimension-mismatch", f"data has {len(data.schema)} dims, model {dim}"
        )
    total = 0.0
    for row in data.rows:
        if MISSING in row:
            raise EvaluationError("dimension-mismatch", "missing cells not allowed")
        best = None
        for cen in model.centroids:
            d = sum((x - c) ** 2 for x, c in zip(row, cen))
            if best is None or d < best:
                best = d
        total += best
    return total


def _f(x) -> str:
    return format(float(x), ".6f")


def render_model(model) -> str:
    if isinstance(model, ClusteringModel):
        lines = [
            f"clustering: k={len(model.centroids)} total_sse={_f(model.total_sse)}"
            f" iterations={model.iterations}"
        ]
        for i, (cen, count) in enumerate(zip(model.centroids, model.counts)):
            coords = ", ".join(_f(c) for c in cen)
            lines.append(f"centroid {i}: ({coords}) count={count}")
        return "\n".join(lines) + "\n"
    if isinstance(model, RulesModel):
        lines = [
            f"rules: {len(model.rules)} over {model.transaction_count} transactions"
            f" ({len(model.frequent)} frequent itemsets)"
        ]
        ordered = sorted(
            model.rules,
            key=lambda r: (-r.confidence, -r.support, r.antecedent, r.consequent),
        )
        for r in ordered:
            lines.append(
                "{%s} => {%s} support=%s confidence=%s"
                % (",".join(r.antecedent), ",".join(r.consequent), _f(r.support), _f(r.confidence))
            )
        return "\n".join(lines) + "\n"
    if isinstance(model, ClassifierModel):
        counts = model.counts
        total = counts.total
        lines = [f"classifier: label={counts.label_column} examples={total}"]
        for cls in sorted(counts.class_counts):
            lines.append(
                f"prior {cls}: {_f(counts.class_counts[cls] / total)}"
                f" count={counts.class_counts[cls]}"
            )
        for cls in sorted(counts.cat_counts):
            for col in sorted(counts.cat_counts[cls]):
                for cat in sorted(counts.cat_counts[cls][col]):
                    lines.append(
                        f"count {cls} {col}={cat}: {counts.cat_counts[cls][col][cat]}"
                    )
        for cls in sorted(counts.num_stats):
            for col in sorted(counts.num_stats[cls]):
                s, sq, c = counts.num_stats[cls][col]
                mean = s / c if c else 0.0
                lines.append(f"gaussian {cls} {col}: mean={_f(mean)} n={c}")
        return "\n".join(lines) + "\n"
    raise EvaluationError("dimension-mismatch", f"unknown model {type(model).__name__}")
