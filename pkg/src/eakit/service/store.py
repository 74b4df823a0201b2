"""File-backed store for arguments under expert review.

One JSON file per argument in a data directory, written atomically
(write to a temp file, then rename). A stored argument carries both its
revision-1 form and the append-only decision log, so the current argument
is reproducible by replay; the store persists the current form too and
the test suite holds the two together.

All mutations to one argument are serialized behind a per-argument lock;
reads hand out immutable snapshots and take no lock beyond the map
lookup. Revisions increment by exactly one per successful mutation, which
is what the optimistic-concurrency header in the HTTP layer compares
against.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Mapping

from ..model import EaArgument
from ..llm.generation import (
    CandidateStatus,
    DefeaterCandidate,
    graft_candidate,
)


class UnknownArgument(KeyError):
    """No stored argument with that id."""


class RevisionConflict(RuntimeError):
    """An If-Match style revision check failed."""

    def __init__(self, current_revision: int) -> None:
        super().__init__(f"revision conflict; current revision is {current_revision}")
        self.current_revision = current_revision


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class DecisionRecord:
    """One append-only log entry: what the expert did with a candidate."""

    candidate_id: str
    action: str  # Accept | Refine | Reject
    editor_text: str | None
    timestamp: str

    def to_json_dict(self) -> dict[str, Any]:
        entry: dict[str, Any] = {
            "candidate_id": self.candidate_id,
            "action": self.action,
        }
        if self.editor_text is not None:
            entry["editor_text"] = self.editor_text
        entry["timestamp"] = self.timestamp
        return entry

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "DecisionRecord":
        return cls(
            candidate_id=data["candidate_id"],
            action=data["action"],
            editor_text=data.get("editor_text"),
            timestamp=data["timestamp"],
        )


@dataclass(frozen=True)
class StoredArgument:
    """Snapshot of one argument under review."""

    argument_id: str
    revision: int
    initial_argument: EaArgument
    argument: EaArgument
    candidates: tuple[DefeaterCandidate, ...] = ()
    decision_log: tuple[DecisionRecord, ...] = ()

    def candidate(self, candidate_id: str) -> DefeaterCandidate:
        for candidate in self.candidates:
            if candidate.id == candidate_id:
                return candidate
        raise UnknownArgument(
            f"no candidate {candidate_id!r} on argument {self.argument_id!r}"
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "argument_id": self.argument_id,
            "revision": self.revision,
            "initial_argument": self.initial_argument.to_json_dict(),
            "argument": self.argument.to_json_dict(),
            "candidates": [c.to_json_dict() for c in self.candidates],
            "decision_log": [d.to_json_dict() for d in self.decision_log],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "StoredArgument":
        return cls(
            argument_id=data["argument_id"],
            revision=int(data["revision"]),
            initial_argument=EaArgument.from_json_dict(data["initial_argument"]),
            argument=EaArgument.from_json_dict(data["argument"]),
            candidates=tuple(
                DefeaterCandidate.from_json_dict(c) for c in data.get("candidates", [])
            ),
            decision_log=tuple(
                DecisionRecord.from_json_dict(d) for d in data.get("decision_log", [])
            ),
        )


def replay_decisions(
    initial: EaArgument,
    candidates: tuple[DefeaterCandidate, ...],
    log: tuple[DecisionRecord, ...],
) -> EaArgument:
    """Rebuild the current argument from revision 1 plus the decision log.

    Accepts graft the candidate's proposed text; refines graft the
    recorded editor text; rejects change nothing.
    """
    by_id = {candidate.id: candidate for candidate in candidates}
    argument = initial
    for record in log:
        if record.action == "Reject":
            continue
        candidate = by_id[record.candidate_id]
        text = record.editor_text if record.action == "Refine" else candidate.text
        argument = graft_candidate(argument, candidate, text_override=text)
    return argument


class FileStore:
    """Directory of ``<argument_id>.json`` files with per-id write locks."""

    def __init__(self, data_dir: str | Path) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, argument_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(argument_id, threading.Lock())

    def _path(self, argument_id: str) -> Path:
        return self.data_dir / f"{argument_id}.json"

    def _write(self, stored: StoredArgument) -> None:
        payload = json.dumps(stored.to_json_dict(), indent=2, ensure_ascii=False)
        fd, temp_name = tempfile.mkstemp(
            dir=self.data_dir, prefix=".tmp-", suffix=".json"
        )
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload + "\n")
            os.replace(temp_name, self._path(stored.argument_id))
        except BaseException:
            try:
                os.unlink(temp_name)
            except FileNotFoundError:
                pass
            raise

    def new_argument_id(self) -> str:
        return uuid.uuid4().hex[:12]

    def create(self, argument: EaArgument, argument_id: str | None = None) -> StoredArgument:
        argument_id = argument_id or self.new_argument_id()
        stored = StoredArgument(
            argument_id=argument_id,
            revision=1,
            initial_argument=argument,
            argument=argument,
        )
        with self._lock_for(argument_id):
            if self._path(argument_id).exists():
                raise FileExistsError(f"argument {argument_id!r} already exists")
            self._write(stored)
        return stored

    def get(self, argument_id: str) -> StoredArgument:
        path = self._path(argument_id)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise UnknownArgument(argument_id) from None
        return StoredArgument.from_json_dict(data)

    def list_ids(self) -> list[str]:
        return sorted(
            path.stem
            for path in self.data_dir.glob("*.json")
            if not path.name.startswith(".")
        )

    def mutate(
        self,
        argument_id: str,
        fn: Callable[[StoredArgument], StoredArgument],
        expected_revision: int | None = None,
    ) -> StoredArgument:
        """Apply ``fn`` under the argument's writer lock and persist.

        ``fn`` receives the current snapshot and returns the next one;
        the store enforces the revision bump. With ``expected_revision``
        set, a mismatch raises :class:`RevisionConflict` before ``fn``
        runs (optimistic concurrency: exactly one writer wins per
        revision).
        """
        with self._lock_for(argument_id):
            current = self.get(argument_id)
            if (
                expected_revision is not None
                and current.revision != expected_revision
            ):
                raise RevisionConflict(current.revision)
            updated = fn(current)
            updated = replace(updated, revision=current.revision + 1)
            self._write(updated)
            return updated


def append_candidates(
    stored: StoredArgument, new_candidates: list[DefeaterCandidate]
) -> StoredArgument:
    return replace(stored, candidates=stored.candidates + tuple(new_candidates))


def apply_decision(
    stored: StoredArgument,
    candidate_id: str,
    action: str,
    edited_text: str | None = None,
) -> StoredArgument:
    """Pure state transition for one decision (no validation here).

    The HTTP layer checks lifecycle and semantics before calling this;
    replay uses the same grafting path, so log and state cannot drift.
    """
    candidate = stored.candidate(candidate_id)
    record = DecisionRecord(
        candidate_id=candidate_id,
        action=action,
        editor_text=edited_text if action == "Refine" else None,
        timestamp=_utc_now(),
    )
    if action == "Accept":
        new_candidate = replace(candidate, status=CandidateStatus.ACCEPTED)
        argument = graft_candidate(stored.argument, candidate)
    elif action == "Refine":
        assert edited_text is not None
        new_candidate = replace(
            candidate, status=CandidateStatus.REFINED, refined_text=edited_text
        )
        argument = graft_candidate(stored.argument, candidate, text_override=edited_text)
    elif action == "Reject":
        new_candidate = replace(candidate, status=CandidateStatus.REJECTED)
        argument = stored.argument
    else:
        raise ValueError(f"unknown action {action!r}")

    candidates = tuple(
        new_candidate if c.id == candidate_id else c for c in stored.candidates
    )
    return replace(
        stored,
        argument=argument,
        candidates=candidates,
        decision_log=stored.decision_log + (record,),
    )
