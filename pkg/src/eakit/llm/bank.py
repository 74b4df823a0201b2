"""Proficiency question bank: 22 questions probing notation knowledge.

Eight questions cover structural rules (which elements connect to which),
seven cover semantic rules (what the text of each element must look
like), and seven ask the model to generate elements, defeaters above all.
Three of the questions are the published samples and carry ``Paper``
provenance; the rest were authored from the notation's rulebook and carry
``Authored`` provenance.

A bank file declares its per-category counts up front so a truncated or
hand-edited file fails loudly rather than silently shifting averages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Mapping


class QuestionCategory(Enum):
    STRUCTURAL = "Structural"
    SEMANTIC = "Semantic"
    GENERATION = "Generation"

    @property
    def count_key(self) -> str:
        return self.value.lower()


class Provenance(Enum):
    PAPER = "Paper"
    AUTHORED = "Authored"


@dataclass(frozen=True)
class QuestionItem:
    id: str
    category: QuestionCategory
    text: str
    provenance: Provenance


class BadFormat(ValueError):
    """Bank document does not match the bank schema."""


class CountMismatch(ValueError):
    """Declared per-category counts disagree with the questions present."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise BadFormat(message)


def load_question_bank(source: str | Path | Mapping[str, Any]) -> list[QuestionItem]:
    """Load and check a bank from a JSON file path or a parsed mapping."""
    if isinstance(source, Mapping):
        document: Any = source
    else:
        try:
            document = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise BadFormat(f"bank is not valid JSON: {exc}") from exc

    _require(isinstance(document, Mapping), "bank must be a JSON object")
    declared = document.get("declared_counts")
    _require(
        isinstance(declared, Mapping),
        "bank must declare per-category counts under 'declared_counts'",
    )
    raw_questions = document.get("questions")
    _require(isinstance(raw_questions, list), "bank must hold a 'questions' list")

    items: list[QuestionItem] = []
    seen_ids: set[str] = set()
    for index, entry in enumerate(raw_questions):
        _require(isinstance(entry, Mapping), f"question #{index + 1} must be an object")
        for key in ("id", "category", "text", "provenance"):
            _require(key in entry, f"question #{index + 1} is missing {key!r}")
        try:
            category = QuestionCategory(entry["category"])
        except ValueError:
            raise BadFormat(
                f"question {entry['id']!r} has unknown category "
                f"{entry['category']!r}"
            ) from None
        try:
            provenance = Provenance(entry["provenance"])
        except ValueError:
            raise BadFormat(
                f"question {entry['id']!r} has unknown provenance "
                f"{entry['provenance']!r}"
            ) from None
        question_id = str(entry["id"])
        text = str(entry["text"])
        _require(bool(text.strip()), f"question {question_id!r} has empty text")
        _require(
            question_id not in seen_ids, f"duplicate question id {question_id!r}"
        )
        seen_ids.add(question_id)
        items.append(QuestionItem(question_id, category, text, provenance))

    for category in QuestionCategory:
        declared_count = declared.get(category.count_key)
        _require(
            isinstance(declared_count, int),
            f"declared_counts must give an integer for {category.count_key!r}",
        )
        actual = sum(1 for item in items if item.category is category)
        if actual != declared_count:
            raise CountMismatch(
                f"bank declares {declared_count} {category.count_key} "
                f"questions but contains {actual}"
            )
    return items


def _data_text(name: str) -> str:
    return (
        resources.files("eakit.llm").joinpath("data", name).read_text(encoding="utf-8")
    )


def default_question_bank() -> list[QuestionItem]:
    """The bank shipped with the package: 22 questions, split 8/7/7."""
    return load_question_bank(json.loads(_data_text("question_bank.json")))


def demo_answers() -> dict[str, str]:
    """Offline demo answers keyed by question id (for the canned provider)."""
    return json.loads(_data_text("canned_answers.json"))
