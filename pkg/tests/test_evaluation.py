import random

import pytest

from admire.errors import EvaluationError
from admire.evaluation import accuracy, clustering_sse, confusion_matrix, render_model
from admire.knowledge import ClassifierModel, ClusteringModel, Rule, RulesModel
from admire.mining import bayes_fit
from admire.table import CAT, NUM, Table
from helpers import random_num_table


class TestAccuracy:
    def test_hand_fraction(self):
        assert accuracy(["a", "b", "c", "d"], ["a", "b", "x", "y"]) == 0.5

    def test_perfect_and_zero(self):
        assert accuracy(["a"], ["a"]) == 1.0
        assert accuracy(["a"], ["b"]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(EvaluationError) as err:
            accuracy(["a"], [])
        assert err.value.code == "length-mismatch"

    def test_empty_input(self):
        with pytest.raises(EvaluationError) as err:
            accuracy([], [])
        assert err.value.code == "empty-input"


class TestConfusionMatrix:
    def test_hand_counts(self):
        got = confusion_matrix(["a", "a", "b"], ["a", "b", "b"])
        assert got == {"a": {"a": 1}, "b": {"a": 1, "b": 1}}

    def test_diagonal_sum_matches_accuracy(self):
        rng = random.Random(19)
        labels = ["x", "y", "z"]
        preds = [rng.choice(labels) for _ in range(50)]
        truth = [rng.choice(labels) for _ in range(50)]
        matrix = confusion_matrix(preds, truth)
        diagonal = sum(matrix.get(c, {}).get(c, 0) for c in labels)
        assert diagonal / 50 == accuracy(preds, truth)


class TestClusteringSse:
    def model(self):
        return ClusteringModel(
            centroids=[[0.0, 0.0], [10.0, 10.0]], counts=[1, 1],
            total_sse=0.0, iterations=1,
        )

    def test_hand_value(self):
        t = Table([("x", NUM), ("y", NUM)], [[1.0, 0.0], [10.0, 11.0]])
        # 1^2 to first centroid plus 1^2 to second
        assert clustering_sse(self.model(), t) == 2.0

    def test_points_on_centroids_score_zero(self):
        t = Table([("x", NUM), ("y", NUM)], [[0.0, 0.0], [10.0, 10.0]])
        assert clustering_sse(self.model(), t) == 0.0

    def test_matches_per_row_min_oracle(self):
        rng = random.Random(43)
        t = random_num_table(rng, 30, 2)
        model = ClusteringModel(
            centroids=[[rng.uniform(-5, 5), rng.uniform(-5, 5)] for _ in range(3)],
            counts=[10, 10, 10], total_sse=0.0, iterations=1,
        )
        expected = sum(
            min(sum((a - b) ** 2 for a, b in zip(row, c)) for c in model.centroids)
            for row in t.rows
        )
        assert clustering_sse(model, t) == pytest.approx(expected)

    def test_dimension_mismatch(self):
        t = Table([("x", NUM)], [[1.0]])
        with pytest.raises(EvaluationError) as err:
            clustering_sse(self.model(), t)
        assert err.value.code == "dimension-mismatch"

    def test_cat_column_rejected(self):
        t = Table([("x", CAT), ("y", CAT)], [["a", "b"]])
        with pytest.raises(EvaluationError):
            clustering_sse(self.model(), t)


class TestRenderModel:
    def test_clustering_layout(self):
        model = ClusteringModel(
            centroids=[[0.5, 0.5], [9.5, 9.5]], counts=[2, 2],
            total_sse=2.0, iterations=3,
        )
        text = render_model(model)
        lines = text.splitlines()
        assert lines[0] == "clustering: k=2 total_sse=2.000000 iterations=3"
        assert lines[1] == "centroid 0: (0.500000, 0.500000) count=2"
        assert lines[2] == "centroid 1: (9.500000, 9.500000) count=2"
        assert text.endswith("\n")

    def test_rules_sorted_by_confidence_then_support(self):
        model = RulesModel(
            frequent={("A",): 0.8, ("B",): 0.5, ("A", "B"): 0.4},
            rules=(
                Rule(("A",), ("B",), support=0.4, confidence=0.5),
                Rule(("B",), ("A",), support=0.4, confidence=0.8),
            ),
            transaction_count=10,
        )
        lines = render_model(model).splitlines()
        assert lines[0] == "rules: 2 over 10 transactions (3 frequent itemsets)"
        assert lines[1].startswith("{B} => {A}")
        assert lines[2].startswith("{A} => {B}")

    def test_classifier_lines(self):
        t = Table([("f", CAT), ("y", CAT)], [["a", "+"], ["a", "+"], ["b", "-"]])
        text = render_model(ClassifierModel(bayes_fit(t, "y")))
        lines = text.splitlines()
        assert lines[0] == "classifier: label=y examples=3"
        assert "prior +: 0.666667 count=2" in lines
        assert "count + f=a: 2" in lines

    def test_rendering_is_stable(self):
        model = ClusteringModel(
            centroids=[[1.0 / 3.0]], counts=[3], total_sse=0.1, iterations=2
        )
        assert render_model(model) == render_model(model)

    def test_unknown_model_rejected(self):
        with pytest.raises(EvaluationError):
            render_model(object())
