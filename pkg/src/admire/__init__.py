"""Distributed data mining framework over a simulated P2P data grid.

Users publish datasets, algorithms and nodes into metadata repositories,
submit multi-task jobs as dependency graphs, and the framework partitions
data across sites, mines locally and merges local models into a global model
that is verifiably equivalent to centralized mining.
"""

__version__ = "0.1.0"

from .errors import AdmireError
from .jobs import JobSpec, TaskKind, TaskSpec, build_schema, validate_job
from .repositories import Repository
from .table import Table, load_table

__all__ = [
    "AdmireError",
    "JobSpec",
    "Repository",
    "Table",
    "TaskKind",
    "TaskSpec",
    "build_schema",
    "load_table",
    "validate_job",
    "__version__",
]
