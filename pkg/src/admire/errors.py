"""Exception hierarchy shared across the framework.

Every error carries a stable ``code`` string (e.g. ``duplicate-id``,
``cycle-detected``) so callers and the CLI can report machine-readable
reasons without parsing messages.
"""


class AdmireError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class DataError(AdmireError):
    """Table parsing, typing and partitioning problems."""


class JobError(AdmireError):
    """Job graph problems (cycles, unknown tasks, missing durations)."""


class RepositoryError(AdmireError):
    """Catalog problems (duplicate ids, unknown entries, corrupt files)."""


class MiningError(AdmireError):
    """Local mining precondition violations."""


class IntegrationError(AdmireError):
    """Model merge / strategy selection problems."""


class CodecError(AdmireError):
    """Wire frame encode/decode failures."""


class GridError(AdmireError):
    """Simulated grid failures (unknown nodes, unreachable peers)."""


class TaskFailure(GridError):
    """A task raised on its executor node; propagated to the submitter."""

    def __init__(self, message: str):
        super().__init__("task-failure", message)


class EvaluationError(AdmireError):
    """Metric computation precondition violations."""
