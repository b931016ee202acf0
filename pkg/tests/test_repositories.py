import pytest

from admire.errors import RepositoryError
from admire.jobs import JobSpec, TaskKind, TaskSpec, build_schema
from admire.knowledge import ClusteringModel
from admire.repositories import (
    AlgorithmDescriptor,
    DatasetDescriptor,
    NodeDescriptor,
    Repository,
)
from admire.table import NUM, Table, write_table


@pytest.fixture
def table_file(tmp_path):
    path = tmp_path / "data.csv"
    write_table(Table([("x", NUM), ("y", NUM)], [[1.0, 2.0], [3.0, 4.0]]), path)
    return path


def dataset(table_file, dataset_id="ds", rows=2):
    return DatasetDescriptor(
        id=dataset_id,
        uri=str(table_file),
        row_count=rows,
        columns=(("x", NUM), ("y", NUM)),
    )


class TestPublishDataset:
    def test_publish_and_get(self, table_file):
        repo = Repository()
        repo.publish_dataset(dataset(table_file))
        assert repo.has_dataset("ds")
        assert repo.get_dataset("ds").row_count == 2

    def test_duplicate_id(self, table_file):
        repo = Repository()
        repo.publish_dataset(dataset(table_file))
        with pytest.raises(RepositoryError) as err:
            repo.publish_dataset(dataset(table_file))
        assert err.value.code == "duplicate-id"

    def test_missing_file(self, tmp_path):
        repo = Repository()
        with pytest.raises(RepositoryError) as err:
            repo.publish_dataset(dataset(tmp_path / "absent.csv"))
        assert err.value.code == "unreadable-table"

    def test_declared_columns_must_match_file(self, table_file):
        repo = Repository()
        bad = DatasetDescriptor(
            id="ds", uri=str(table_file), row_count=2, columns=(("x", NUM),)
        )
        with pytest.raises(RepositoryError) as err:
            repo.publish_dataset(bad)
        assert err.value.code == "unreadable-table"

    def test_declared_row_count_must_match_file(self, table_file):
        repo = Repository()
        with pytest.raises(RepositoryError) as err:
            repo.publish_dataset(dataset(table_file, rows=5))
        assert err.value.code == "unreadable-table"

    def test_unknown_dataset(self):
        with pytest.raises(RepositoryError) as err:
            Repository().get_dataset("ghost")
        assert err.value.code == "unknown-id"


class TestPublishResource:
    def test_algorithm(self):
        repo = Repository()
        repo.publish_resource(AlgorithmDescriptor(id="km", kind=TaskKind.CLUSTERING))
        assert repo.find_algorithm("km").kind == TaskKind.CLUSTERING
        assert repo.find_algorithm("missing") is None

    def test_algorithm_kind_must_be_runnable(self):
        repo = Repository()
        with pytest.raises(RepositoryError) as err:
            repo.publish_resource(
                AlgorithmDescriptor(id="ev", kind=TaskKind.EVALUATION)
            )
        assert err.value.code == "invalid-kind"

    def test_duplicate_algorithm(self):
        repo = Repository()
        repo.publish_resource(AlgorithmDescriptor(id="km", kind=TaskKind.CLUSTERING))
        with pytest.raises(RepositoryError) as err:
            repo.publish_resource(AlgorithmDescriptor(id="km", kind=TaskKind.CLUSTERING))
        assert err.value.code == "duplicate-id"

    def test_node(self):
        repo = Repository()
        repo.publish_resource(NodeDescriptor(id="n1", capacity=2))
        assert repo.get_node("n1").capacity == 2

    def test_node_invalid_capacity(self):
        with pytest.raises(RepositoryError) as err:
            Repository().publish_resource(NodeDescriptor(id="n1", capacity=0))
        assert err.value.code == "invalid-capacity"

    def test_publish_order_recorded(self):
        repo = Repository()
        repo.publish_resource(AlgorithmDescriptor(id="a", kind=TaskKind.CLUSTERING))
        repo.publish_resource(NodeDescriptor(id="n"))
        assert repo.find_algorithm("a").published_at < repo.get_node("n").published_at


class TestQueries:
    def test_query_by_kind_sorted(self):
        repo = Repository()
        for aid in ("z-algo", "a-algo"):
            repo.publish_resource(AlgorithmDescriptor(id=aid, kind=TaskKind.CLUSTERING))
        repo.publish_resource(AlgorithmDescriptor(id="other", kind=TaskKind.CLASSIFICATION))
        assert [a.id for a in repo.query_by_kind(TaskKind.CLUSTERING)] == [
            "a-algo",
            "z-algo",
        ]

    def test_match_nodes_by_capability(self):
        repo = Repository()
        repo.publish_resource(NodeDescriptor(id="n1", capabilities=frozenset({"cpu"})))
        repo.publish_resource(
            NodeDescriptor(id="n2", capabilities=frozenset({"cpu", "gpu"}))
        )
        assert [n.id for n in repo.match_nodes({"gpu"}, 2)] == ["n2"]

    def test_match_nodes_orders_by_load_then_id(self):
        repo = Repository()
        for nid in ("n1", "n2", "n3"):
            repo.publish_resource(NodeDescriptor(id=nid))
        got = repo.match_nodes(set(), 3, load={"n1": 5, "n2": 0, "n3": 0})
        assert [n.id for n in got] == ["n2", "n3", "n1"]

    def test_match_nodes_no_match(self):
        repo = Repository()
        repo.publish_resource(NodeDescriptor(id="n1"))
        with pytest.raises(RepositoryError) as err:
            repo.match_nodes({"quantum"}, 1)
        assert err.value.code == "no-matching-node"

    def test_match_nodes_invalid_count(self):
        with pytest.raises(RepositoryError) as err:
            Repository().match_nodes(set(), 0)
        assert err.value.code == "invalid-count"


def simple_schema(name="job1"):
    job = JobSpec(
        name=name,
        seed=0,
        tasks=(
            TaskSpec(id="a", kind=TaskKind.CLUSTERING, depends_on=()),
            TaskSpec(id="b", kind=TaskKind.EVALUATION, depends_on=("a",)),
        ),
    )
    return build_schema(job)


class TestSchemas:
    def test_store_and_load(self):
        repo = Repository()
        schema = simple_schema()
        assert repo.store_schema(schema) == "job1"
        assert repo.load_schema("job1") == schema

    def test_unknown_schema(self):
        with pytest.raises(RepositoryError) as err:
            Repository().load_schema("nope")
        assert err.value.code == "unknown-schema"


class TestKnowledge:
    def model(self):
        return ClusteringModel(
            centroids=[[1.0, 2.0]], counts=[3], total_sse=0.5, iterations=4
        )

    def test_add_and_get(self):
        repo = Repository()
        repo.add_knowledge("j", "t", self.model(), {"sse": 0.5})
        entry = repo.get_knowledge("j", "t")
        assert entry.model == self.model()
        assert entry.metrics == {"sse": 0.5}

    def test_duplicate_entry(self):
        repo = Repository()
        repo.add_knowledge("j", "t", self.model(), {})
        with pytest.raises(RepositoryError) as err:
            repo.add_knowledge("j", "t", self.model(), {})
        assert err.value.code == "duplicate-entry"

    def test_unknown_entry(self):
        with pytest.raises(RepositoryError) as err:
            Repository().get_knowledge("j", "t")
        assert err.value.code == "unknown-id"


class TestPersistence:
    def build(self, table_file):
        repo = Repository()
        repo.publish_dataset(dataset(table_file))
        repo.publish_resource(AlgorithmDescriptor(id="km", kind=TaskKind.CLUSTERING))
        repo.publish_resource(
            NodeDescriptor(id="n1", capabilities=frozenset({"cpu"}), capacity=2)
        )
        repo.store_schema(simple_schema())
        repo.add_knowledge(
            "job1",
            "a",
            ClusteringModel(centroids=[[0.0]], counts=[2], total_sse=1.0, iterations=3),
            {"sse": 1.0},
        )
        return repo

    def test_round_trip(self, tmp_path, table_file):
        repo = self.build(table_file)
        out = tmp_path / "repo"
        repo.persist(out)
        back = Repository.restore(out)
        assert back.datasets == repo.datasets
        assert back.algorithms == repo.algorithms
        assert back.nodes == repo.nodes
        assert back.schemas == repo.schemas
        assert back.knowledge == repo.knowledge

    def test_persisted_bytes_stable(self, tmp_path, table_file):
        repo = self.build(table_file)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        repo.persist(out1)
        repo.persist(out2)
        assert (out1 / "datasets.json").read_bytes() == (out2 / "datasets.json").read_bytes()
        assert (out1 / "nodes.json").read_bytes() == (out2 / "nodes.json").read_bytes()

    def test_sequence_survives_restore(self, tmp_path, table_file):
        repo = self.build(table_file)
        out = tmp_path / "repo"
        repo.persist(out)
        back = Repository.restore(out)
        back.publish_resource(NodeDescriptor(id="n2"))
        published = {d.published_at for d in back.datasets.values()}
        published |= {a.published_at for a in back.algorithms.values()}
        published |= {n.published_at for n in back.nodes.values()}
        assert len(published) == 4  # new node got a fresh sequence number

    def test_restore_missing_directory(self, tmp_path):
        with pytest.raises(RepositoryError) as err:
            Repository.restore(tmp_path / "nothing")
        assert err.value.code == "io-error"

    def test_restore_corrupt_file(self, tmp_path, table_file):
        repo = self.build(table_file)
        out = tmp_path / "repo"
        repo.persist(out)
        (out / "algorithms.json").write_text("{ not json")
        with pytest.raises(RepositoryError) as err:
            Repository.restore(out)
        assert err.value.code == "corrupt-repository"
