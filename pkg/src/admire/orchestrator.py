"""Task management: allocation, stage-ordered dispatch, synchronization.

Reads an execution schema, discovers capable nodes over the grid, dispatches
each stage's tasks concurrently (list scheduling, id tie-break), barriers
between stages, and records mined knowledge.  Given the same (job seed,
topology, repository state) the whole run is deterministic, event log
included.
"""

import hashlib
import os
from dataclasses import dataclass, field

from . import jsonio
from .errors import AdmireError, GridError, MiningError, TaskFailure
from .evaluation import accuracy, clustering_sse, render_model
from .grid import RESOURCE, SimGrid
from .jobs import ExecutionSchema, MINING_KINDS, TaskKind, TaskSpec
from .knowledge import (
    ClassifierModel,
    ClusteringModel,
    RulesModel,
    distributed_kmeans,
    drive_apriori,
    emit_knowledge,
    first_k_distinct_rows,
    merge_bayes,
    select_strategy,
)
from .mining import bayes_fit, bayes_predict, transactions_from_table
from .preprocessing import clean_missing, minmax, sample, zscore
from .table import MISSING, NUM, Table, horizontal_partition, load_table


@dataclass(frozen=True)
class ExecutionEvent:
    tick: int
    task_id: str
    phase: str  # allocated | dispatched | completed | failed
    node: str
    detail: str = ""


@dataclass
class JobResult:
    job_name: str
    seed: int
    status: str  # ok | partial-failure
    makespan: int
    task_status: dict  # task id -> completed | failed | skipped
    task_nodes: dict  # task id -> node id
    metrics: dict  # task id -> metric dict
    knowledge_refs: list  # (job, task) pairs
    events: list = field(default_factory=list)


@dataclass
class ExecConfig:
    partitions: int = 2
    results_dir: str | None = None


def derive_seed(base: int, tag: str) -> int:
    digest = hashlib.sha256(f"{base}:{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def allocate(repo, schema: ExecutionSchema, grid: SimGrid) -> dict:
    """Map every task to a discovered node covering its capability needs,
    balancing by (ascending assigned-count, ascending id) and respecting node
    capacity within each stage when possible."""
    coordinator = min(grid.topology.nodes)
    ttl = len(grid.topology.nodes)
    total_load: dict[str, int] = {}
    assignment: dict[str, str] = {}
    for stage in schema.stages:
        stage_load: dict[str, int] = {}
        for task_id in stage:
            task = schema.task(task_id)
            found = grid.discover(
                coordinator,
                kind=RESOURCE,
                capabilities=task.required_capabilities,
                ttl=ttl,
            )
            candidates = {
                e.payload.get("node_id", e.home_node): int(e.payload.get("capacity", 1))
                for e in found
            }
            if not candidates:
                raise GridError("no-matching-node", f"task {task_id!r}")
            node = min(
                sorted(candidates),
                key=lambda n: (
                    0 if stage_load.get(n, 0) < candidates[n] else 1,
                    total_load.get(n, 0),
                    n,
                ),
            )
            assignment[task_id] = node
            stage_load[node] = stage_load.get(node, 0) + 1
            total_load[node] = total_load.get(node, 0) + 1
    return assignment


def execute_job(repo, schema: ExecutionSchema, grid: SimGrid, config: ExecConfig) -> JobResult:
    job = schema.job
    allocation = allocate(repo, schema, grid)
    coordinator = min(grid.topology.nodes)
    for node in grid.topology.nodes:
        grid.set_executor(node, lambda work: (work(), 1))

    start = grid.clock
    events = [
        ExecutionEvent(start, tid, "allocated", allocation[tid])
        for tid in schema.topological_order
    ]
    outputs: dict = {}
    status: dict = {}
    metrics: dict = {}
    knowledge_refs: list = []
    max_completion = start

    for stage in schema.stages:
        pending = []
        for task_id in stage:
            task = schema.task(task_id)
            if any(status.get(d) in ("failed", "skipped") for d in task.depends_on):
                status[task_id] = "skipped"
                continue
            node = allocation[task_id]
            try:
                inputs = _resolve_inputs(repo, task, outputs, grid, node)
            except AdmireError as exc:
                status[task_id] = "failed"
                events.append(ExecutionEvent(grid.clock, task_id, "failed", node, str(exc)))
                continue
            work = _make_work(repo, job, task, inputs, config)
            pending.append((task, grid.submit_task(coordinator, node, work)))
        for task, correlation in pending:
            info = grid.submission_info(correlation)
            events.append(
                ExecutionEvent(info.dispatch_tick, task.id, "dispatched", info.node)
            )
            try:
                output, task_metrics = grid.await_result(correlation)
            except TaskFailure as exc:
                status[task.id] = "failed"
                events.append(
                    ExecutionEvent(info.completion_tick, task.id, "failed", info.node, str(exc))
                )
                continue
            status[task.id] = "completed"
            outputs[task.id] = output
            metrics[task.id] = task_metrics
            events.append(
                ExecutionEvent(info.completion_tick, task.id, "completed", info.node)
            )
            max_completion = max(max_completion, info.completion_tick)
            if task.kind in MINING_KINDS:
                emit_knowledge(repo, job.name, task.id, output, task_metrics)
                knowledge_refs.append((job.name, task.id))

    overall = "ok" if all(s == "completed" for s in status.values()) else "partial-failure"
    result = JobResult(
        job_name=job.name,
        seed=job.seed,
        status=overall,
        makespan=max_completion - start,
        task_status=status,
        task_nodes={tid: allocation[tid] for tid in schema.topological_order},
        metrics=metrics,
        knowledge_refs=knowledge_refs,
        events=events,
    )
    if config.results_dir:
        _write_results(repo, result, config.results_dir)
    return result


def monitor(result: JobResult):
    """Execution events in nondecreasing tick order (stable within a tick)."""
    return sorted(result.events, key=lambda e: e.tick)


# --- task bodies -------------------------------------------------------------


def _resolve_inputs(repo, task: TaskSpec, outputs: dict, grid: SimGrid, node: str):
    """Materialize each input: an upstream task's output or a published table.

    Remote tables are replicated to the executing node first, so the mining
    task reads a local replica.
    """
    resolved = []
    for ref in task.inputs:
        if ref in outputs:
            resolved.append(outputs[ref])
            continue
        descriptor = repo.get_dataset(ref)
        owner = descriptor.owner_node
        if owner in grid.hosted and ref in grid.hosted[owner] and ref not in grid.hosted[node]:
            grid.transfer_dataset(ref, owner, node)
        resolved.append(load_table(descriptor.uri))
    return resolved


def _make_work(repo, job, task: TaskSpec, inputs, config: ExecConfig):
    def work():
        return _run_task(repo, job, task, inputs, config)

    return work


def _single_table(task: TaskSpec, inputs):
    for value in inputs:
        if isinstance(value, Table):
            return value
    raise MiningError("missing-input", f"task {task.id!r} needs a table input")


def _table_or_partitions(task: TaskSpec, inputs, config, seed):
    """Partition list for a mining task: upstream partitions when given, else
    a fresh seeded split of the input table; plus the concatenated table."""
    for value in inputs:
        if isinstance(value, list) and value and all(isinstance(t, Table) for t in value):
            return value, _concat(value)
    table = _single_table(task, inputs)
    k = min(max(1, config.partitions), max(1, table.n_rows))
    return horizontal_partition(table, k, seed), table


def _concat(partitions):
    rows = [row for part in partitions for row in part.rows]
    return Table(partitions[0].schema, rows)


def _run_task(repo, job, task: TaskSpec, inputs, config: ExecConfig):
    seed = derive_seed(job.seed, task.id)
    kind = task.kind
    if kind == TaskKind.PREPROCESSING:
        return _run_preprocessing(task, inputs, seed)
    if kind == TaskKind.DATA_DISTRIBUTION:
        table = _single_table(task, inputs)
        k = int(task.params.get("partitions", config.partitions))
        parts = horizontal_partition(table, k, seed)
        return parts, {"partitions": k, "rows": table.n_rows}
    if kind == TaskKind.CLUSTERING:
        return _run_clustering(repo, task, inputs, config, seed)
    if kind == TaskKind.ASSOCIATION_RULES:
        return _run_association(repo, task, inputs, config, seed)
    if kind == TaskKind.CLASSIFICATION:
        return _run_classification(repo, task, inputs, config, seed)
    if kind == TaskKind.EVALUATION:
        return _run_evaluation(task, inputs)
    raise MiningError("unknown-kind", f"task {task.id!r} has kind {kind}")


def _run_preprocessing(task: TaskSpec, inputs, seed):
    op = task.algorithm
    params = task.params

    def apply(table: Table) -> Table:
        if op == "clean_missing":
            return clean_missing(table, params.get("policy", "impute"))
        if op == "zscore":
            return zscore(table, _num_columns(table, params))
        if op == "minmax":
            return minmax(table, _num_columns(table, params))
        if op == "sample":
            return sample(table, float(params.get("fraction", 1.0)), seed)
        raise MiningError("unknown-operation", f"no preprocessing op {op!r}")

    value = inputs[0] if inputs else None
    if isinstance(value, list):
        out = [apply(t) for t in value]
        return out, {"rows": sum(t.n_rows for t in out)}
    table = _single_table(task, inputs)
    out = apply(table)
    return out, {"rows": out.n_rows}


def _num_columns(table: Table, params):
    if "columns" in params:
        return list(params["columns"])
    return [c.name for c in table.schema if c.kind == NUM]


def _run_clustering(repo, task: TaskSpec, inputs, config, seed):
    parts, full = _table_or_partitions(task, inputs, config, seed)
    if not task.algorithm:
        select_strategy(TaskKind.CLUSTERING, full, repo)
    k = int(task.params.get("k", 0))
    init = task.params.get("init")
    if init is None:
        init = first_k_distinct_rows(full, k) if k >= 1 else []
    max_iter = int(task.params.get("max_iter", 20))
    tol = float(task.params.get("tol", 0.0))
    model = distributed_kmeans(parts, k, init, max_iter, tol)
    return model, {
        "sse": model.total_sse,
        "iterations": model.iterations,
        "rows": full.n_rows,
        "sites": len(parts),
    }


def _run_association(repo, task: TaskSpec, inputs, config, seed):
    parts, full = _table_or_partitions(task, inputs, config, seed)
    if not task.algorithm:
        select_strategy(TaskKind.ASSOCIATION_RULES, full, repo)
    minsup = float(task.params.get("minsup", 0.1))
    minconf = float(task.params.get("minconf", 0.5))
    model = drive_apriori([transactions_from_table(p) for p in parts], minsup, minconf)
    return model, {
        "frequent_itemsets": len(model.frequent),
        "rules": len(model.rules),
        "transactions": model.transaction_count,
        "sites": len(parts),
    }


def _run_classification(repo, task: TaskSpec, inputs, config, seed):
    parts, full = _table_or_partitions(task, inputs, config, seed)
    label = task.params.get("label")
    if not label:
        raise MiningError("missing-label", f"task {task.id!r} needs a 'label' param")
    if not task.algorithm:
        select_strategy(TaskKind.CLASSIFICATION, full, repo, label_column=label)
    partials = [(site, bayes_fit(part, label)) for site, part in enumerate(parts)]
    model = ClassifierModel(merge_bayes(partials))
    predictions = [
        bayes_predict(model.counts, _feature_dict(full, row, label))[0]
        for row in full.rows
    ]
    truth = full.column(label)
    return model, {
        "training_accuracy": accuracy(predictions, truth),
        "rows": full.n_rows,
        "sites": len(parts),
    }


def _feature_dict(table: Table, row, label: str) -> dict:
    return {
        c.name: cell
        for c, cell in zip(table.schema, row)
        if c.name != label and cell is not MISSING
    }


def _run_evaluation(task: TaskSpec, inputs):
    model = None
    table = None
    for value in inputs:
        if isinstance(value, (ClusteringModel, RulesModel, ClassifierModel)):
            model = value
        elif isinstance(value, Table):
            table = value
    if model is None:
        raise MiningError("missing-input", f"task {task.id!r} needs a model input")
    if isinstance(model, ClusteringModel):
        if table is None:
            raise MiningError("missing-input", "clustering evaluation needs a table")
        result = {"sse": clustering_sse(model, table)}
    elif isinstance(model, ClassifierModel):
        if table is None:
            raise MiningError("missing-input", "classifier evaluation needs a table")
        label = model.counts.label_column
        predictions = [
            bayes_predict(model.counts, _feature_dict(table, row, label))[0]
            for row in table.rows
        ]
        result = {"accuracy": accuracy(predictions, table.column(label))}
    else:
        result = {
            "rules": len(model.rules),
            "frequent_itemsets": len(model.frequent),
        }
    return result, result


# --- result files ------------------------------------------------------------


def result_to_dict(result: JobResult) -> dict:
    return {
        "job": result.job_name,
        "seed": result.seed,
        "status": result.status,
        "makespan": result.makespan,
        "tasks": {
            tid: {
                "status": result.task_status.get(tid, "skipped"),
                "node": result.task_nodes.get(tid, ""),
                "metrics": result.metrics.get(tid, {}),
            }
            for tid in result.task_nodes
        },
        "knowledge": [{"job": j, "task": t} for j, t in result.knowledge_refs],
    }


def event_to_dict(event: ExecutionEvent) -> dict:
    return {
        "tick": event.tick,
        "task": event.task_id,
        "phase": event.phase,
        "node": event.node,
        "detail": event.detail,
    }


def _write_results(repo, result: JobResult, results_dir) -> None:
    job_dir = os.path.join(results_dir, result.job_name)
    os.makedirs(job_dir, exist_ok=True)
    jsonio.write_file(os.path.join(job_dir, "result.json"), result_to_dict(result))
    with open(os.path.join(job_dir, "events.jsonl"), "w", encoding="utf-8") as fh:
        for event in monitor(result):
            fh.write(jsonio.dumps(event_to_dict(event)))
            fh.write("\n")
    for job_name, task_id in result.knowledge_refs:
        entry = repo.get_knowledge(job_name, task_id)
        with open(os.path.join(job_dir, f"{task_id}.txt"), "w", encoding="utf-8") as fh:
            fh.write(render_model(entry.model))
