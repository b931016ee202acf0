"""Mining jobs as task DAGs and their stage-partitioned execution schemas.

A job is a set of typed tasks with dependency edges.  The execution schema
groups tasks into stages by longest-path depth, so every stage contains only
pairwise-independent tasks that can run concurrently.  All tie-breaks are by
ascending task id, making schema construction deterministic.
"""

from dataclasses import dataclass, field
from enum import Enum

from .errors import JobError


class TaskKind(str, Enum):
    PREPROCESSING = "preprocessing"
    DATA_DISTRIBUTION = "data_distribution"
    CLUSTERING = "clustering"
    ASSOCIATION_RULES = "association_rules"
    CLASSIFICATION = "classification"
    EVALUATION = "evaluation"


MINING_KINDS = frozenset(
    {TaskKind.CLUSTERING, TaskKind.ASSOCIATION_RULES, TaskKind.CLASSIFICATION}
)
# Kinds an algorithm descriptor may carry (mining or preprocessing).
ALGORITHM_KINDS = MINING_KINDS | {TaskKind.PREPROCESSING}


@dataclass(frozen=True)
class TaskSpec:
    id: str
    kind: TaskKind
    algorithm: str = ""
    params: dict = field(default_factory=dict)
    inputs: tuple = ()
    depends_on: tuple = ()
    required_capabilities: tuple = ()


@dataclass(frozen=True)
class JobSpec:
    name: str
    seed: int
    tasks: tuple


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self):
        return sorted({v.code for v in self.violations})


@dataclass(frozen=True)
class ExecutionSchema:
    job: JobSpec
    stages: tuple  # tuple of tuples of task ids
    topological_order: tuple

    def task(self, task_id: str) -> TaskSpec:
        for t in self.job.tasks:
            if t.id == task_id:
                return t
        raise JobError("unknown-task", f"no task {task_id!r} in schema")

    def stage_index(self, task_id: str) -> int:
        for i, stage in enumerate(self.stages):
            if task_id in stage:
                return i
        raise JobError("unknown-task", f"no task {task_id!r} in schema")


def task_from_dict(d: dict) -> TaskSpec:
    try:
        kind = TaskKind(d["kind"])
    except ValueError:
        raise JobError("unknown-kind", f"unknown task kind {d.get('kind')!r}") from None
    except KeyError:
        raise JobError("parse-error", "task missing 'kind'") from None
    if not d.get("id"):
        raise JobError("parse-error", "task missing nonempty 'id'")
    return TaskSpec(
        id=d["id"],
        kind=kind,
        algorithm=d.get("algorithm", ""),
        params=dict(d.get("params", {})),
        inputs=tuple(d.get("inputs", ())),
        depends_on=tuple(d.get("depends_on", ())),
        required_capabilities=tuple(d.get("required_capabilities", ())),
    )


def task_to_dict(t: TaskSpec) -> dict:
    return {
        "id": t.id,
        "kind": t.kind.value,
        "algorithm": t.algorithm,
        "params": dict(t.params),
        "inputs": list(t.inputs),
        "depends_on": list(t.depends_on),
        "required_capabilities": list(t.required_capabilities),
    }


def job_from_dict(d: dict) -> JobSpec:
    if not isinstance(d.get("name"), str) or not d["name"]:
        raise JobError("parse-error", "job missing nonempty 'name'")
    seed = d.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise JobError("parse-error", "job 'seed' must be an unsigned integer")
    tasks = tuple(task_from_dict(td) for td in d.get("tasks", ()))
    return JobSpec(name=d["name"], seed=seed, tasks=tasks)


def job_to_dict(job: JobSpec) -> dict:
    return {
        "name": job.name,
        "seed": job.seed,
        "tasks": [task_to_dict(t) for t in job.tasks],
    }


def _edges(job: JobSpec):
    """preds/succs maps keyed by task id; dangling references are skipped."""
    ids = {t.id for t in job.tasks}
    preds = {t.id: sorted(set(d for d in t.depends_on if d in ids)) for t in job.tasks}
    succs: dict[str, list] = {t.id: [] for t in job.tasks}
    for t in job.tasks:
        for d in preds[t.id]:
            succs[d].append(t.id)
    for lst in succs.values():
        lst.sort()
    return preds, succs


def _find_cycle_members(job: JobSpec):
    """Task ids that sit on or behind a cycle (Kahn leftovers), sorted."""
    preds, succs = _edges(job)
    indeg = {tid: len(ps) for tid, ps in preds.items()}
    queue = sorted(tid for tid, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        tid = queue.pop(0)
        seen += 1
        for s in succs[tid]:
            indeg[s] -= 1
            if indeg[s] == 0:
                queue.append(s)
        queue.sort()
    return sorted(tid for tid, d in indeg.items() if d > 0)


def validate_job(job: JobSpec, repos) -> ValidationReport:
    """Coherence check; violations are data, not exceptions.

    ``repos`` needs ``has_dataset(id)`` and ``find_algorithm(id)`` (returning a
    descriptor with a ``kind`` or None).
    """
    violations = []
    seen_ids = set()
    for t in job.tasks:
        if t.id in seen_ids:
            violations.append(Violation("duplicate-task-id", t.id, "task id repeated"))
        seen_ids.add(t.id)
    ids = {t.id for t in job.tasks}
    for t in job.tasks:
        for dep in t.depends_on:
            if dep not in ids:
                violations.append(
                    Violation("dangling-dependency", t.id, f"{t.id}->{dep} not in job")
                )
        for ref in t.inputs:
            if ref not in ids and not repos.has_dataset(ref):
                violations.append(
                    Violation("unknown-dataset", t.id, f"input {ref!r} unknown")
                )
        if t.kind in ALGORITHM_KINDS:
            if t.algorithm:
                algo = repos.find_algorithm(t.algorithm)
                if algo is None:
                    violations.append(
                        Violation("unknown-algorithm", t.id, f"algorithm {t.algorithm!r}")
                    )
                elif algo.kind != t.kind:
                    violations.append(
                        Violation(
                            "kind-mismatch",
                            t.id,
                            f"task kind {t.kind.value} vs algorithm kind {algo.kind.value}",
                        )
                    )
            elif t.kind == TaskKind.PREPROCESSING:
                # Mining tasks may leave the algorithm blank (strategy-selected
                # at run time); preprocessing must name the published operation.
                violations.append(
                    Violation("missing-algorithm", t.id, "preprocessing task needs one")
                )
    cycle = _find_cycle_members(job)
    if cycle:
        violations.append(Violation("cycle", ",".join(cycle), "dependency cycle"))
    return ValidationReport(tuple(violations))


def build_schema(job: JobSpec) -> ExecutionSchema:
    """Stage-partition the job: stages are longest-path-depth level sets."""
    ids = [t.id for t in job.tasks]
    if len(set(ids)) != len(ids):
        raise JobError("duplicate-task-id", "task ids must be unique")
    if _find_cycle_members(job):
        raise JobError("cycle-detected", "job dependency graph has a cycle")
    preds, succs = _edges(job)
    depth: dict[str, int] = {}

    def depth_of(tid: str) -> int:
        if tid not in depth:
            ps = preds[tid]
            depth[tid] = 0 if not ps else 1 + max(depth_of(p) for p in ps)
        return depth[tid]

    for tid in ids:
        depth_of(tid)
    n_stages = max(depth.values(), default=-1) + 1
    stages = [sorted(tid for tid in ids if depth[tid] == i) for i in range(n_stages)]
    topo = [tid for stage in stages for tid in stage]
    return ExecutionSchema(job=job, stages=tuple(map(tuple, stages)), topological_order=tuple(topo))


def _reaches(schema: ExecutionSchema, src: str, dst: str) -> bool:
    _, succs = _edges(schema.job)
    frontier = [src]
    seen = {src}
    while frontier:
        tid = frontier.pop()
        for s in succs[tid]:
            if s == dst:
                return True
            if s not in seen:
                seen.add(s)
                frontier.append(s)
    return False


def detect_independent(schema: ExecutionSchema, t1: str, t2: str) -> bool:
    """True iff neither task reaches the other in the DAG."""
    known = set(schema.topological_order)
    for tid in (t1, t2):
        if tid not in known:
            raise JobError("unknown-task", f"no task {tid!r} in schema")
    if t1 == t2:
        return False
    return not _reaches(schema, t1, t2) and not _reaches(schema, t2, t1)


def critical_path_length(schema: ExecutionSchema, durations: dict) -> int:
    """Maximum total duration over all source-to-sink paths."""
    for tid in schema.topological_order:
        if tid not in durations:
            raise JobError("missing-duration", f"no duration for task {tid!r}")
        if durations[tid] < 0:
            raise JobError("missing-duration", f"negative duration for task {tid!r}")
    preds, _ = _edges(schema.job)
    best: dict[str, float] = {}
    for tid in schema.topological_order:
        incoming = max((best[p] for p in preds[tid]), default=0)
        best[tid] = durations[tid] + incoming
    return max(best.values(), default=0)


def schema_to_dict(schema: ExecutionSchema) -> dict:
    return {
        "job": job_to_dict(schema.job),
        "stages": [list(s) for s in schema.stages],
        "topological_order": list(schema.topological_order),
    }


def schema_from_dict(d: dict) -> ExecutionSchema:
    return ExecutionSchema(
        job=job_from_dict(d["job"]),
        stages=tuple(tuple(s) for s in d["stages"]),
        topological_order=tuple(d["topological_order"]),
    )
