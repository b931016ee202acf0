"""Metadata catalog: datasets, algorithms, nodes, schemas, mined knowledge.

A repository is an in-memory catalog persisted as one directory of canonical
JSON files (``datasets.json``, ``algorithms.json``, ``nodes.json``,
``schemas/<id>.json``, ``knowledge/<job>_<task>.json``), so state is
inspectable and diff-able.  Publishes are ordered by a monotonic sequence
number rather than wall-clock time.
"""

import os
from dataclasses import dataclass, field, replace

from . import jsonio
from .errors import RepositoryError
from .jobs import (
    ALGORITHM_KINDS,
    ExecutionSchema,
    TaskKind,
    schema_from_dict,
    schema_to_dict,
)
from .knowledge import model_from_dict, model_to_dict
from .table import load_table


@dataclass(frozen=True)
class DatasetDescriptor:
    id: str
    uri: str
    row_count: int
    columns: tuple  # ((name, kind), ...)
    owner_node: str = "local"
    published_at: int = 0


@dataclass(frozen=True)
class AlgorithmDescriptor:
    id: str
    kind: TaskKind
    param_schema: tuple = ()  # ((name, type, default), ...)
    description: str = ""
    published_at: int = 0


@dataclass(frozen=True)
class NodeDescriptor:
    id: str
    capabilities: frozenset = frozenset()
    capacity: int = 1
    datasets_hosted: frozenset = frozenset()
    published_at: int = 0


@dataclass(frozen=True)
class KnowledgeEntry:
    job_name: str
    task_id: str
    model: object
    metrics: dict = field(default_factory=dict)
    created_at: int = 0


class Repository:
    def __init__(self):
        self.datasets: dict[str, DatasetDescriptor] = {}
        self.algorithms: dict[str, AlgorithmDescriptor] = {}
        self.nodes: dict[str, NodeDescriptor] = {}
        self.schemas: dict[str, ExecutionSchema] = {}
        self.knowledge: dict[tuple, KnowledgeEntry] = {}
        self._sequence = 0

    def _next_seq(self) -> int:
        self._sequence += 1
        return self._sequence

    # -- publishing -----------------------------------------------------------

    def publish_dataset(self, descriptor: DatasetDescriptor) -> str:
        if descriptor.id in self.datasets:
            raise RepositoryError("duplicate-id", f"dataset {descriptor.id!r} exists")
        try:
            table = load_table(descriptor.uri)
        except Exception as exc:  # missing file or any parse/type problem
            raise RepositoryError(
                "unreadable-table", f"dataset {descriptor.id!r}: {exc}"
            ) from exc
        actual = tuple((c.name, c.kind) for c in table.schema)
        if tuple(tuple(c) for c in descriptor.columns) != actual:
            raise RepositoryError(
                "unreadable-table",
                f"dataset {descriptor.id!r}: declared columns differ from file",
            )
        if descriptor.row_count != table.n_rows:
            raise RepositoryError(
                "unreadable-table",
                f"dataset {descriptor.id!r}: declared row_count differs from file",
            )
        stored = replace(descriptor, published_at=self._next_seq())
        self.datasets[descriptor.id] = stored
        return descriptor.id

    def publish_resource(self, descriptor) -> str:
        if isinstance(descriptor, AlgorithmDescriptor):
            if descriptor.kind not in ALGORITHM_KINDS:
                raise RepositoryError(
                    "invalid-kind",
                    f"algorithm kind must be mining or preprocessing, got {descriptor.kind.value}",
                )
            if descriptor.id in self.algorithms:
                raise RepositoryError("duplicate-id", f"algorithm {descriptor.id!r} exists")
            self.algorithms[descriptor.id] = replace(
                descriptor, published_at=self._next_seq()
            )
        elif isinstance(descriptor, NodeDescriptor):
            if descriptor.capacity < 1:
                raise RepositoryError("invalid-capacity", "node capacity must be >= 1")
            if descriptor.id in self.nodes:
                raise RepositoryError("duplicate-id", f"node {descriptor.id!r} exists")
            self.nodes[descriptor.id] = replace(descriptor, published_at=self._next_seq())
        else:
            raise RepositoryError(
                "invalid-kind", f"cannot publish {type(descriptor).__name__}"
            )
        return descriptor.id

    # -- queries --------------------------------------------------------------

    def has_dataset(self, dataset_id: str) -> bool:
        return dataset_id in self.datasets

    def get_dataset(self, dataset_id: str) -> DatasetDescriptor:
        try:
            return self.datasets[dataset_id]
        except KeyError:
            raise RepositoryError("unknown-id", f"no dataset {dataset_id!r}") from None

    def find_algorithm(self, algorithm_id: str):
        return self.algorithms.get(algorithm_id)

    def get_node(self, node_id: str) -> NodeDescriptor:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise RepositoryError("unknown-id", f"no node {node_id!r}") from None

    def query_by_kind(self, kind: TaskKind):
        return sorted(
            (a for a in self.algorithms.values() if a.kind == kind),
            key=lambda a: a.id,
        )

    def match_nodes(self, required, count: int, load=None):
        """Up to ``count`` nodes whose capabilities cover ``required``, ordered
        by (ascending current load, ascending id)."""
        if count < 1:
            raise RepositoryError("invalid-count", "count must be >= 1")
        required = set(required)
        load = load or {}
        matching = [
            n for n in self.nodes.values() if required <= set(n.capabilities)
        ]
        if not matching:
            raise RepositoryError("no-matching-node", f"no node offers {sorted(required)}")
        matching.sort(key=lambda n: (load.get(n.id, 0), n.id))
        return matching[:count]

    # -- schemas --------------------------------------------------------------

    def store_schema(self, schema: ExecutionSchema) -> str:
        schema_id = schema.job.name
        self.schemas[schema_id] = schema
        return schema_id

    def load_schema(self, schema_id: str) -> ExecutionSchema:
        try:
            return self.schemas[schema_id]
        except KeyError:
            raise RepositoryError("unknown-schema", f"no schema {schema_id!r}") from None

    # -- knowledge ------------------------------------------------------------

    def add_knowledge(self, job_name: str, task_id: str, model, metrics) -> KnowledgeEntry:
        key = (job_name, task_id)
        if key in self.knowledge:
            raise RepositoryError(
                "duplicate-entry", f"knowledge for {job_name}/{task_id} exists"
            )
        entry = KnowledgeEntry(
            job_name=job_name,
            task_id=task_id,
            model=model,
            metrics=dict(metrics),
            created_at=self._next_seq(),
        )
        self.knowledge[key] = entry
        return entry

    def get_knowledge(self, job_name: str, task_id: str) -> KnowledgeEntry:
        try:
            return self.knowledge[(job_name, task_id)]
        except KeyError:
            raise RepositoryError(
                "unknown-id", f"no knowledge for {job_name}/{task_id}"
            ) from None

    # -- persistence ----------------------------------------------------------

    def persist(self, directory) -> None:
        try:
            os.makedirs(directory, exist_ok=True)
            os.makedirs(os.path.join(directory, "schemas"), exist_ok=True)
            os.makedirs(os.path.join(directory, "knowledge"), exist_ok=True)
            jsonio.write_file(
                os.path.join(directory, "datasets.json"),
                {
                    "sequence": self._sequence,
                    "entries": [_dataset_to_dict(d) for _, d in sorted(self.datasets.items())],
                },
            )
            jsonio.write_file(
                os.path.join(directory, "algorithms.json"),
                {"entries": [_algorithm_to_dict(a) for _, a in sorted(self.algorithms.items())]},
            )
            jsonio.write_file(
                os.path.join(directory, "nodes.json"),
                {"entries": [_node_to_dict(n) for _, n in sorted(self.nodes.items())]},
            )
            for schema_id, schema in sorted(self.schemas.items()):
                jsonio.write_file(
                    os.path.join(directory, "schemas", f"{schema_id}.json"),
                    schema_to_dict(schema),
                )
            for (job_name, task_id), entry in sorted(self.knowledge.items()):
                jsonio.write_file(
                    os.path.join(directory, "knowledge", f"{job_name}_{task_id}.json"),
                    _knowledge_to_dict(entry),
                )
        except OSError as exc:
            raise RepositoryError("io-error", str(exc)) from exc

    @classmethod
    def restore(cls, directory) -> "Repository":
        repo = cls()
        try:
            datasets = jsonio.read_file(os.path.join(directory, "datasets.json"))
            algorithms = jsonio.read_file(os.path.join(directory, "algorithms.json"))
            nodes = jsonio.read_file(os.path.join(directory, "nodes.json"))
            for d in datasets["entries"]:
                desc = _dataset_from_dict(d)
                repo.datasets[desc.id] = desc
            for d in algorithms["entries"]:
                desc = _algorithm_from_dict(d)
                repo.algorithms[desc.id] = desc
            for d in nodes["entries"]:
                node = _node_from_dict(d)
                repo.nodes[node.id] = node
            schema_dir = os.path.join(directory, "schemas")
            if os.path.isdir(schema_dir):
                for name in sorted(os.listdir(schema_dir)):
                    if name.endswith(".json"):
                        schema = schema_from_dict(
                            jsonio.read_file(os.path.join(schema_dir, name))
                        )
                        repo.schemas[name[:-5]] = schema
            knowledge_dir = os.path.join(directory, "knowledge")
            if os.path.isdir(knowledge_dir):
                for name in sorted(os.listdir(knowledge_dir)):
                    if name.endswith(".json"):
                        entry = _knowledge_from_dict(
                            jsonio.read_file(os.path.join(knowledge_dir, name))
                        )
                        repo.knowledge[(entry.job_name, entry.task_id)] = entry
            repo._sequence = max(
                [datasets.get("sequence", 0)]
                + [d.published_at for d in repo.datasets.values()]
                + [a.published_at for a in repo.algorithms.values()]
                + [n.published_at for n in repo.nodes.values()]
                + [e.created_at for e in repo.knowledge.values()]
            )
        except FileNotFoundError as exc:
            raise RepositoryError("io-error", str(exc)) from exc
        except RepositoryError:
            raise
        except Exception as exc:  # malformed JSON, missing keys, bad values
            raise RepositoryError("corrupt-repository", str(exc)) from exc
        return repo


def _dataset_to_dict(d: DatasetDescriptor) -> dict:
    return {
        "id": d.id,
        "uri": d.uri,
        "row_count": d.row_count,
        "columns": [list(c) for c in d.columns],
        "owner_node": d.owner_node,
        "published_at": d.published_at,
    }


def _dataset_from_dict(d: dict) -> DatasetDescriptor:
    return DatasetDescriptor(
        id=d["id"],
        uri=d["uri"],
        row_count=int(d["row_count"]),
        columns=tuple((c[0], c[1]) for c in d["columns"]),
        owner_node=d["owner_node"],
        published_at=int(d["published_at"]),
    )


def _algorithm_to_dict(a: AlgorithmDescriptor) -> dict:
    return {
        "id": a.id,
        "kind": a.kind.value,
        "param_schema": [list(p) for p in a.param_schema],
        "description": a.description,
        "published_at": a.published_at,
    }


def _algorithm_from_dict(d: dict) -> AlgorithmDescriptor:
    return AlgorithmDescriptor(
        id=d["id"],
        kind=TaskKind(d["kind"]),
        param_schema=tuple(tuple(p) for p in d["param_schema"]),
        description=d["description"],
        published_at=int(d["published_at"]),
    )


def _node_to_dict(n: NodeDescriptor) -> dict:
    return {
        "id": n.id,
        "capabilities": sorted(n.capabilities),
        "capacity": n.capacity,
        "datasets_hosted": sorted(n.datasets_hosted),
        "published_at": n.published_at,
    }


def _node_from_dict(d: dict) -> NodeDescriptor:
    return NodeDescriptor(
        id=d["id"],
        capabilities=frozenset(d["capabilities"]),
        capacity=int(d["capacity"]),
        datasets_hosted=frozenset(d["datasets_hosted"]),
        published_at=int(d["published_at"]),
    )


def _knowledge_to_dict(e: KnowledgeEntry) -> dict:
    return {
        "job_name": e.job_name,
        "task_id": e.task_id,
        "model": model_to_dict(e.model),
        "metrics": dict(e.metrics),
        "created_at": e.created_at,
    }


def _knowledge_from_dict(d: dict) -> KnowledgeEntry:
    return KnowledgeEntry(
        job_name=d["job_name"],
        task_id=d["task_id"],
        model=model_from_dict(d["model"]),
        metrics=dict(d["metrics"]),
        created_at=int(d["created_at"]),
    )
