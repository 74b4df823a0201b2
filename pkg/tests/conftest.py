"""Shared fixtures and generators for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from eakit.model import (
    AlreadyTerminated,
    CycleIntroduced,
    DuplicateEdge,
    EaArgument,
    ElementKind,
    IllegalAttachment,
    SelfEdge,
    TerminatorKind,
    new_argument,
)

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"
GOLDEN = FIXTURES / "golden"

REACTOR_TEXT = (CORPUS / "c06_reactor.ea").read_text(encoding="utf-8")

# Word pool for generated element text; includes characters that stress the
# prose grammar (brackets, arrows, '#', '!') without being line-initial.
_WORDS = (
    "pump",
    "valve",
    "sensor",
    "halts",
    "pressure",
    "limit",
    "showing",
    "test",
    "report",
    "margin",
    "Unless",
    "But",
    "if",
    "then",
    "#5",
    "a->b",
    "x]",
    "ok!",
    "50ms",
)


def random_argument(rng: random.Random, max_elements: int = 12) -> EaArgument:
    """A structurally valid argument built through the guarded operations.

    Kinds, texts, edges and terminators are random; guard rejections
    (cycle, duplicate, illegal terminator) are simply skipped, so the
    result is always a well-formed argument.
    """
    argument = new_argument()
    count = rng.randint(0, max_elements)
    ids: list[str] = []
    for index in range(count):
        kind = rng.choice(list(ElementKind))
        element_id = (
            f"N{index}" if rng.random() < 0.5 else f"n{index}.x_{index}"
        )
        text = " ".join(
            rng.choice(_WORDS) for _ in range(rng.randint(1, 6))
        )
        argument = argument.add_element(element_id, kind, text)
        ids.append(element_id)
    if ids:
        for _ in range(rng.randint(0, 2 * len(ids))):
            parent, child = rng.choice(ids), rng.choice(ids)
            try:
                argument = argument.connect(parent, child)
            except (SelfEdge, DuplicateEdge, CycleIntroduced):
                pass
        for element_id in ids:
            if rng.random() < 0.3:
                terminator = rng.choice(list(TerminatorKind))
                try:
                    argument = argument.attach_terminator(element_id, terminator)
                except (IllegalAttachment, AlreadyTerminated):
                    pass
    return argument


@pytest.fixture
def reactor_text() -> str:
    return REACTOR_TEXT


@pytest.fixture
def reactor_argument() -> EaArgument:
    from eakit.prose import parse

    return parse(REACTOR_TEXT).unwrap()
