"""Proficiency sessions: ask every bank question, record a transcript.

Each question runs in its own fresh conversation: the shipped system
prompt plus the question as the sole user message. Isolation keeps one
answer from leaking into the next and makes the request stream a pure
function of (bank, settings), so two runs against the same canned
provider produce byte-identical transcripts apart from timestamps.

The system prompt ships as a fixture whose SHA-256 is pinned here; the
loader refuses to run with an edited prompt, because a silent one-word
change would invalidate every recorded transcript.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .bank import QuestionItem, demo_answers
from .providers import CannedProvider, ChatProvider, PromptRequest, ProviderError

#: Pinned digest of ``data/system_prompt.txt``.
SYSTEM_PROMPT_SHA256 = (
    "99273ab178114e8aa7cc905bf5401d54c3bcc71a6ced3c0f168416d82125136f"
)


@lru_cache(maxsize=1)
def system_prompt() -> str:
    """The shipped system prompt, integrity-checked against its digest."""
    raw = (
        resources.files("eakit.llm")
        .joinpath("data", "system_prompt.txt")
        .read_bytes()
    )
    digest = hashlib.sha256(raw).hexdigest()
    if digest != SYSTEM_PROMPT_SHA256:
        raise RuntimeError(
            "system prompt fixture does not match its pinned digest "
            f"({digest} != {SYSTEM_PROMPT_SHA256})"
        )
    return raw.decode("utf-8").rstrip("\n")


@dataclass(frozen=True)
class SessionSettings:
    """Request pinning shared by every call in a session.

    The seed and temperature defaults are this project's choice: seed 42
    and temperature 0 give the most reproducible responses a
    chat-completion API offers.
    """

    seed: int = 42
    temperature: float = 0.0
    model: str = "gpt-4-turbo"


@dataclass(frozen=True)
class TranscriptEntry:
    question_id: str
    request: PromptRequest
    response_text: str
    timestamp: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "question_id": self.question_id,
            "request": self.request.to_json_dict(),
            "response_text": self.response_text,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "TranscriptEntry":
        return cls(
            question_id=data["question_id"],
            request=PromptRequest.from_json_dict(data["request"]),
            response_text=data["response_text"],
            timestamp=data["timestamp"],
        )


@dataclass(frozen=True)
class Transcript:
    """Ordered record of one session: one entry per bank question."""

    entries: tuple[TranscriptEntry, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict[str, Any]:
        return {"entries": [entry.to_json_dict() for entry in self.entries]}

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "Transcript":
        return cls(
            tuple(TranscriptEntry.from_json_dict(e) for e in data.get("entries", []))
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        return cls.from_json_dict(
            json.loads(Path(path).read_text(encoding="utf-8"))
        )


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def proficiency_request(
    question: QuestionItem, settings: SessionSettings
) -> PromptRequest:
    """The exact request one bank question produces under ``settings``."""
    return PromptRequest(
        system=system_prompt(),
        user=question.text,
        seed=settings.seed,
        temperature=settings.temperature,
        model=settings.model,
    )


def run_proficiency_session(
    bank: Sequence[QuestionItem],
    provider: ChatProvider,
    settings: SessionSettings | None = None,
) -> Transcript:
    """Ask every question in bank order, each in a fresh conversation.

    Provider failures propagate as :class:`ProviderError` carrying the id
    of the question that failed.
    """
    if not bank:
        raise ValueError("question bank is empty")
    settings = settings or SessionSettings()
    entries: list[TranscriptEntry] = []
    for question in bank:
        request = proficiency_request(question, settings)
        try:
            response_text = provider.complete(request)
        except ProviderError as exc:
            raise ProviderError(
                f"question {question.id}: {exc}", question_id=question.id
            ) from exc
        entries.append(
            TranscriptEntry(question.id, request, response_text, _utc_now())
        )
    return Transcript(tuple(entries))


def offline_demo_provider() -> CannedProvider:
    """A provider that answers everything deterministically and offline.

    Bank questions get the shipped demo answers (matched on the user
    prompt, so the mapping survives any seed or model setting). Defeater
    and mitigation prompts are answered by a tiny synthesizer that reads
    the instructions back out of the prompt; anything else gets a fixed
    placeholder. Useful for demos, CI and the CLI's ``canned`` mode.
    """
    from .generation import synthesize_demo_response

    by_text = {question_textify(k): v for k, v in demo_answers().items()}

    def fallback(request: PromptRequest) -> str:
        if request.user in by_text:
            return by_text[request.user]
        return synthesize_demo_response(request)

    return CannedProvider(fallback=fallback)


@lru_cache(maxsize=1)
def _bank_text_by_id() -> dict[str, str]:
    from .bank import default_question_bank

    return {item.id: item.text for item in default_question_bank()}


def question_textify(question_id: str) -> str:
    """Map a default-bank question id to its text (for demo answers)."""
    return _bank_text_by_id().get(question_id, question_id)
