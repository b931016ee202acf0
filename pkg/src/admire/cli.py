"""Command-line surface: publish resources, submit jobs, inspect results.

Jobs are declarative JSON files; a submission validates the job against the
catalog, stores the execution schema, runs it on the simulated grid and writes
``results/<job>/``.  Exit codes: 0 success, 1 validation/job errors, 2 system
errors.  A repository lock file serializes concurrent invocations.
"""

import dataclasses
import json
import os
import sys

import click
from filelock import FileLock

from . import jsonio
from .errors import AdmireError
from .grid import DATA, RESOURCE, Entity, SimGrid, Topology
from .jobs import TaskKind, build_schema, job_from_dict, validate_job
from .orchestrator import ExecConfig, execute_job
from .repositories import (
    AlgorithmDescriptor,
    DatasetDescriptor,
    NodeDescriptor,
    Repository,
)
from .table import load_table

_KIND_CHOICES = [k.value for k in TaskKind]


def _load_repo(repo_dir: str) -> Repository:
    if os.path.exists(os.path.join(repo_dir, "datasets.json")):
        return Repository.restore(repo_dir)
    return Repository()


def _lock(repo_dir: str) -> FileLock:
    os.makedirs(repo_dir, exist_ok=True)
    return FileLock(os.path.join(repo_dir, ".lock"))


@click.group()
@click.option(
    "--repo",
    "repo_dir",
    envvar="ADMIRE_REPO",
    required=True,
    type=click.Path(),
    help="Repository directory (or set ADMIRE_REPO).",
)
@click.pass_context
def cli(ctx, repo_dir):
    """Distributed data mining over a simulated data grid."""
    ctx.obj = repo_dir


@cli.command("publish-dataset")
@click.argument("table_file", type=click.Path(exists=True))
@click.option("--id", "dataset_id", required=True)
@click.option("--node", "node_id", default="local", show_default=True)
@click.pass_obj
def publish_dataset(repo_dir, table_file, dataset_id, node_id):
    """Publish a table file into the dataset repository."""
    with _lock(repo_dir):
        repo = _load_repo(repo_dir)
        table = load_table(table_file)
        descriptor = DatasetDescriptor(
            id=dataset_id,
            uri=os.path.abspath(table_file),
            row_count=table.n_rows,
            columns=tuple((c.name, c.kind) for c in table.schema),
            owner_node=node_id,
        )
        repo.publish_dataset(descriptor)
        repo.persist(repo_dir)
    click.echo(f"published dataset {dataset_id} ({table.n_rows} rows)")


@cli.command("publish-algorithm")
@click.option("--id", "algorithm_id", required=True)
@click.option("--kind", required=True, type=click.Choice(_KIND_CHOICES))
@click.option("--description", default="")
@click.pass_obj
def publish_algorithm(repo_dir, algorithm_id, kind, description):
    """Publish a mining or preprocessing algorithm descriptor."""
    with _lock(repo_dir):
        repo = _load_repo(repo_dir)
        repo.publish_resource(
            AlgorithmDescriptor(
                id=algorithm_id, kind=TaskKind(kind), description=description
            )
        )
        repo.persist(repo_dir)
    click.echo(f"published algorithm {algorithm_id} ({kind})")


@cli.command("publish-node")
@click.option("--id", "node_id", required=True)
@click.option("--capabilities", default="", help="Comma-separated capability list.")
@click.option("--capacity", default=1, show_default=True, type=int)
@click.pass_obj
def publish_node(repo_dir, node_id, capabilities, capacity):
    """Publish a computing node descriptor."""
    caps = frozenset(c.strip() for c in capabilities.split(",") if c.strip())
    with _lock(repo_dir):
        repo = _load_repo(repo_dir)
        repo.publish_resource(
            NodeDescriptor(id=node_id, capabilities=caps, capacity=capacity)
        )
        repo.persist(repo_dir)
    click.echo(f"published node {node_id} (capacity {capacity})")


@cli.group("repo")
def repo_group():
    """Inspect the repository."""


@repo_group.command("list")
@click.option("--kind", type=click.Choice(["datasets", "algorithms", "nodes"]))
@click.pass_obj
def repo_list(repo_dir, kind):
    """List published descriptors."""
    repo = _load_repo(repo_dir)
    if kind in (None, "datasets"):
        for d in sorted(repo.datasets.values(), key=lambda d: d.id):
            click.echo(f"dataset {d.id} rows={d.row_count} owner={d.owner_node}")
    if kind in (None, "algorithms"):
        for a in sorted(repo.algorithms.values(), key=lambda a: a.id):
            click.echo(f"algorithm {a.id} kind={a.kind.value}")
    if kind in (None, "nodes"):
        for n in sorted(repo.nodes.values(), key=lambda n: n.id):
            caps = ",".join(sorted(n.capabilities))
            click.echo(f"node {n.id} capacity={n.capacity} capabilities={caps}")


@cli.command("submit")
@click.argument("job_file", type=click.Path(exists=True))
@click.option("--topology", "topology_file", type=click.Path(exists=True))
@click.option("--seed", type=int, help="Override the job file's seed.")
@click.option("--partitions", default=2, show_default=True, type=int)
@click.pass_context
def submit(ctx, job_file, topology_file, seed, partitions):
    """Validate, schedule and execute a job file."""
    repo_dir = ctx.obj
    with _lock(repo_dir):
        repo = _load_repo(repo_dir)
        with open(job_file, encoding="utf-8") as fh:
            job = job_from_dict(json.load(fh))
        if seed is not None:
            job = dataclasses.replace(job, seed=seed)
        report = validate_job(job, repo)
        if not report.ok:
            for v in report.violations:
                click.echo(f"violation: {v.code} {v.subject}: {v.detail}", err=True)
            ctx.exit(1)
        schema = build_schema(job)
        grid = _build_grid(repo, topology_file)
        repo.store_schema(schema)
        config = ExecConfig(
            partitions=partitions, results_dir=os.path.join(repo_dir, "results")
        )
        result = execute_job(repo, schema, grid, config)
        repo.persist(repo_dir)
    click.echo(f"job {result.job_name}: {result.status} makespan={result.makespan}")
    for task_id in sorted(result.task_status):
        node = result.task_nodes.get(task_id, "")
        click.echo(f"task {task_id}: {result.task_status[task_id]} node={node}")
    if result.status != "ok":
        ctx.exit(1)


def _build_grid(repo: Repository, topology_file) -> SimGrid:
    if topology_file:
        topology = Topology.from_dict(jsonio.read_file(topology_file))
    else:
        if not repo.nodes:
            raise AdmireError("no-nodes", "publish nodes or pass --topology")
        topology = Topology.complete(repo.nodes, latency=1)
    grid = SimGrid(topology)
    for node_id in sorted(repo.nodes):
        if node_id not in topology.nodes:
            continue
        node = repo.nodes[node_id]
        grid.register_entity(
            Entity(
                id=f"resource:{node_id}",
                kind=RESOURCE,
                payload={
                    "node_id": node_id,
                    "capabilities": sorted(node.capabilities),
                    "capacity": node.capacity,
                },
                home_node=node_id,
            )
        )
    default_home = min(topology.nodes)
    for dataset_id in sorted(repo.datasets):
        d = repo.datasets[dataset_id]
        home = d.owner_node if d.owner_node in topology.nodes else default_home
        grid.register_entity(
            Entity(
                id=f"data:{dataset_id}",
                kind=DATA,
                payload={"dataset_id": dataset_id, "row_count": d.row_count},
                home_node=home,
            )
        )
    return grid


@cli.command("results")
@click.argument("job_name")
@click.option("--task", "task_id")
@click.pass_obj
def results(repo_dir, job_name, task_id):
    """Show a finished job's result summary or one task's rendered report."""
    job_dir = os.path.join(repo_dir, "results", job_name)
    if task_id:
        path = os.path.join(job_dir, f"{task_id}.txt")
        if not os.path.exists(path):
            raise AdmireError("unknown-task", f"no report for {job_name}/{task_id}")
        with open(path, encoding="utf-8") as fh:
            click.echo(fh.read(), nl=False)
        return
    path = os.path.join(job_dir, "result.json")
    if not os.path.exists(path):
        raise AdmireError("unknown-job", f"no results for {job_name!r}")
    data = jsonio.read_file(path)
    click.echo(f"job {data['job']}: {data['status']} makespan={data['makespan']}")
    for tid in sorted(data["tasks"]):
        info = data["tasks"][tid]
        click.echo(f"task {tid}: {info['status']} node={info['node']}")


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, standalone_mode=False)
        # ctx.exit(code) surfaces here as a plain return value
        if isinstance(rv, int):
            return rv
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return 1
    except AdmireError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"system error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
