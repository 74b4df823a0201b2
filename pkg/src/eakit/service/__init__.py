"""HTTP review service and its file-backed, event-sourced store."""

from .app import create_app
from .store import (
    DecisionRecord,
    FileStore,
    RevisionConflict,
    StoredArgument,
    UnknownArgument,
    apply_decision,
    replay_decisions,
)

__all__ = [
    "DecisionRecord",
    "FileStore",
    "RevisionConflict",
    "StoredArgument",
    "UnknownArgument",
    "apply_decision",
    "create_app",
    "replay_decisions",
]
