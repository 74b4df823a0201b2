"""Rule engine: structural and semantic diagnostics plus defeater coverage.

Diagnostic catalog:

    S001  error    edge joins two element kinds that may not be adjacent
    S002  error    terminator attached to an element kind that cannot carry it
    S003  warning  element with no edges at all in a multi-element argument
    M001  warning  rebutting defeater text does not begin with "Unless"
    M002  warning  undercutting defeater text does not begin with "Unless"
    M003  warning  undermining defeater text does not begin with "But"
    M004  warning  evidence text lacks the word "showing"
    M005  warning  claim text is not a bare predicate
    M006  warning  inference rule text lacks an implication marker

Adjacency is undirected: an edge is legal when the unordered pair of its
endpoint kinds appears in :data:`LEGAL_ADJACENCY`. The table takes the
permissive reading of the notation's connection rules -- a pair is legal
if either kind's rule lists the other -- which admits, for example,
evidence-to-evidence edges. Strategy, whose connections the core rules
leave unstated, may neighbour claims and any defeater kind; that entry is
an extension of ours, flagged in the project README.

Prefix checks look at the first word only, case-sensitively, after
stripping leading whitespace and quotation marks. Claim "predicate"
checking (M005) is a heuristic: a claim must not open like a defeater or
end in a question mark. Structural findings are errors; semantic ones are
warnings, since a semantically sloppy argument still has a usable shape.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable

from .model import (
    DEFEATER_KINDS,
    EaArgument,
    ElementKind,
    TerminatorKind,
    terminator_legal,
)

__all__ = [
    "Severity",
    "Diagnostic",
    "CoverageReport",
    "PreconditionViolated",
    "LEGAL_ADJACENCY",
    "adjacency_legal",
    "required_prefix",
    "check_text",
    "validate",
    "coverage",
    "rule_sentences",
]


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True)
class Diagnostic:
    """One coded finding against an element or edge."""

    code: str
    severity: Severity
    subject: str
    message: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "subject": self.subject,
            "message": self.message,
        }

    def __str__(self) -> str:
        return f"{self.code} {self.severity.value.lower()} {self.subject}: {self.message}"


class PreconditionViolated(ValueError):
    """Coverage requested on an argument with structural errors."""


def _pair(a: ElementKind, b: ElementKind) -> frozenset[ElementKind]:
    return frozenset((a, b))


#: Unordered kind pairs that may share an edge.
LEGAL_ADJACENCY: frozenset[frozenset[ElementKind]] = frozenset(
    {
        _pair(ElementKind.CLAIM, ElementKind.CONTEXT),
        _pair(ElementKind.CLAIM, ElementKind.REBUTTING_DEFEATER),
        _pair(ElementKind.EVIDENCE, ElementKind.REBUTTING_DEFEATER),
        _pair(ElementKind.EVIDENCE, ElementKind.UNDERMINING_DEFEATER),
        _pair(ElementKind.EVIDENCE, ElementKind.UNDERCUTTING_DEFEATER),
        _pair(ElementKind.EVIDENCE, ElementKind.INFERENCE_RULE),
        _pair(ElementKind.EVIDENCE, ElementKind.EVIDENCE),
        _pair(ElementKind.INFERENCE_RULE, ElementKind.REBUTTING_DEFEATER),
        _pair(ElementKind.INFERENCE_RULE, ElementKind.UNDERMINING_DEFEATER),
        _pair(ElementKind.INFERENCE_RULE, ElementKind.UNDERCUTTING_DEFEATER),
        _pair(ElementKind.INFERENCE_RULE, ElementKind.CLAIM),
        _pair(ElementKind.STRATEGY, ElementKind.CLAIM),
        _pair(ElementKind.STRATEGY, ElementKind.REBUTTING_DEFEATER),
        _pair(ElementKind.STRATEGY, ElementKind.UNDERMINING_DEFEATER),
        _pair(ElementKind.STRATEGY, ElementKind.UNDERCUTTING_DEFEATER),
    }
)


def adjacency_legal(a: ElementKind, b: ElementKind) -> bool:
    """True when elements of kinds ``a`` and ``b`` may share an edge."""
    return _pair(a, b) in LEGAL_ADJACENCY


_PREFIXES: dict[ElementKind, tuple[str, str]] = {
    ElementKind.REBUTTING_DEFEATER: ("Unless", "M001"),
    ElementKind.UNDERCUTTING_DEFEATER: ("Unless", "M002"),
    ElementKind.UNDERMINING_DEFEATER: ("But", "M003"),
}

_QUOTES = "\"'“”‘’"
_WS_AND_QUOTES = _QUOTES + " \t\r\n"


def required_prefix(kind: ElementKind) -> str | None:
    """The word a defeater of this kind must open with, if any."""
    entry = _PREFIXES.get(kind)
    return entry[0] if entry else None


def _strip_lead(text: str) -> str:
    return text.lstrip(_WS_AND_QUOTES)


def _opens_with(text: str, word: str) -> bool:
    return re.match(rf"{word}\b", _strip_lead(text)) is not None


_SHOWING_RE = re.compile(r"\bshowing\b")
_IF_THEN_RE = re.compile(r"\bif\b.*\bthen\b", re.IGNORECASE)
_IMPLIES_RE = re.compile(r"\bimplies\b", re.IGNORECASE)


def _has_implication(text: str) -> bool:
    return (
        _IF_THEN_RE.search(text) is not None
        or _IMPLIES_RE.search(text) is not None
        or "→" in text
    )


def check_text(kind: ElementKind, text: str, subject: str = "") -> list[Diagnostic]:
    """Semantic diagnostics (M-codes) for one element's text.

    Pure function of ``(kind, text)``; ``subject`` only labels the
    findings. Context and Strategy carry no semantic rule.
    """
    findings: list[Diagnostic] = []
    prefix_entry = _PREFIXES.get(kind)
    if prefix_entry is not None:
        word, code = prefix_entry
        if not _opens_with(text, word):
            article = "a" if kind is ElementKind.REBUTTING_DEFEATER else "an"
            findings.append(
                Diagnostic(
                    code,
                    Severity.WARNING,
                    subject,
                    f'{article} {_KIND_PHRASE[kind]} must begin with "{word}"',
                )
            )
    elif kind is ElementKind.EVIDENCE:
        if _SHOWING_RE.search(text) is None:
            findings.append(
                Diagnostic(
                    "M004",
                    Severity.WARNING,
                    subject,
                    'evidence is written as "[noun phrase] showing P"; '
                    'the word "showing" is missing',
                )
            )
    elif kind is ElementKind.CLAIM:
        if (
            _opens_with(text, "Unless")
            or _opens_with(text, "But")
            or text.rstrip(_WS_AND_QUOTES).endswith("?")
        ):
            findings.append(
                Diagnostic(
                    "M005",
                    Severity.WARNING,
                    subject,
                    "a claim is a plain true-or-false predicate; it must not "
                    "open like a defeater or end in a question mark",
                )
            )
    elif kind is ElementKind.INFERENCE_RULE:
        if not _has_implication(text):
            findings.append(
                Diagnostic(
                    "M006",
                    Severity.WARNING,
                    subject,
                    'an inference rule links premise to conclusion; expected '
                    '"if ... then ...", "implies" or an arrow',
                )
            )
    return findings


_KIND_PHRASE: dict[ElementKind, str] = {
    ElementKind.CLAIM: "claim",
    ElementKind.EVIDENCE: "evidence",
    ElementKind.CONTEXT: "context",
    ElementKind.INFERENCE_RULE: "inference rule",
    ElementKind.STRATEGY: "strategy",
    ElementKind.REBUTTING_DEFEATER: "rebutting defeater",
    ElementKind.UNDERMINING_DEFEATER: "undermining defeater",
    ElementKind.UNDERCUTTING_DEFEATER: "undercutting defeater",
}


def validate(argument: EaArgument) -> list[Diagnostic]:
    """Every rule violation in the argument.

    Pure and idempotent; an empty list means fully compliant. Findings are
    ordered by code, then subject, so output is deterministic.
    """
    findings: list[Diagnostic] = []

    for parent, child in argument.edges:
        parent_kind = argument.element(parent).kind
        child_kind = argument.element(child).kind
        if not adjacency_legal(parent_kind, child_kind):
            findings.append(
                Diagnostic(
                    "S001",
                    Severity.ERROR,
                    f"{parent}->{child}",
                    f"a {_KIND_PHRASE[parent_kind]} may not be connected to "
                    f"a {_KIND_PHRASE[child_kind]}",
                )
            )

    for element in argument:
        if element.terminator is not None and not terminator_legal(
            element.kind, element.terminator
        ):
            findings.append(
                Diagnostic(
                    "S002",
                    Severity.ERROR,
                    element.id,
                    f"terminator {element.terminator.value} may not be "
                    f"attached to a {_KIND_PHRASE[element.kind]}",
                )
            )

    if argument.element_count > 1:
        connected = {endpoint for edge in argument.edges for endpoint in edge}
        for element in argument:
            if element.id not in connected:
                findings.append(
                    Diagnostic(
                        "S003",
                        Severity.WARNING,
                        element.id,
                        f"{_KIND_PHRASE[element.kind]} {element.id!r} is not "
                        "connected to the rest of the argument",
                    )
                )

    for element in argument:
        findings.extend(check_text(element.kind, element.text, subject=element.id))

    findings.sort(key=lambda d: (d.code, d.subject))
    return findings


@dataclass(frozen=True)
class CoverageReport:
    """Which elements still lack a challenge, and which challenges stand.

    A defeater counts as resolved when it carries a terminator or has at
    least one child sub-argument. ``resolution_ratio`` is resolved over
    total defeaters, and 1.0 for an argument with no defeaters at all.
    """

    uncovered_claims: tuple[str, ...]
    uncovered_evidence: tuple[str, ...]
    uncovered_rules: tuple[str, ...]
    unresolved_defeaters: tuple[str, ...]
    resolution_ratio: float

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "uncovered_claims": list(self.uncovered_claims),
            "uncovered_evidence": list(self.uncovered_evidence),
            "uncovered_rules": list(self.uncovered_rules),
            "unresolved_defeaters": list(self.unresolved_defeaters),
            "resolution_ratio": self.resolution_ratio,
        }


def coverage(argument: EaArgument) -> CoverageReport:
    """Defeater-coverage analysis over a structurally sound argument.

    Raises :class:`PreconditionViolated` when :func:`validate` reports any
    error-severity finding; warnings do not block coverage.
    """
    errors = [d for d in validate(argument) if d.severity is Severity.ERROR]
    if errors:
        raise PreconditionViolated(
            "coverage requires a structurally sound argument; found "
            + ", ".join(sorted({d.code for d in errors}))
        )

    child_kinds: dict[str, set[ElementKind]] = defaultdict(set)
    child_counts: dict[str, int] = defaultdict(int)
    for parent, child in argument.edges:
        child_kinds[parent].add(argument.element(child).kind)
        child_counts[parent] += 1

    def uncovered(kind: ElementKind, challenger: ElementKind) -> tuple[str, ...]:
        return tuple(
            sorted(
                element.id
                for element in argument
                if element.kind is kind and challenger not in child_kinds[element.id]
            )
        )

    defeaters = [element for element in argument if element.is_defeater()]
    unresolved = tuple(
        sorted(
            element.id
            for element in defeaters
            if element.terminator is None and child_counts[element.id] == 0
        )
    )
    total = len(defeaters)
    ratio = 1.0 if total == 0 else (total - len(unresolved)) / total

    return CoverageReport(
        uncovered_claims=uncovered(
            ElementKind.CLAIM, ElementKind.REBUTTING_DEFEATER
        ),
        uncovered_evidence=uncovered(
            ElementKind.EVIDENCE, ElementKind.UNDERMINING_DEFEATER
        ),
        uncovered_rules=uncovered(
            ElementKind.INFERENCE_RULE, ElementKind.UNDERCUTTING_DEFEATER
        ),
        unresolved_defeaters=unresolved,
        resolution_ratio=ratio,
    )


#: The notation's rulebook rendered as predicate-form sentences, one per
#: rule: seven element rules, then the two terminator rules. Prompt
#: builders embed these to ground generation in explicit rules instead of
#: the model's implicit knowledge.
_RULE_SENTENCES: tuple[str, ...] = (
    'IF an element is a claim THEN its text is a predicate (a statement that '
    "is true or false) AND it may connect to a context or a rebutting defeater.",
    'IF an element is evidence THEN its text has the form "[noun phrase] '
    'showing P" AND it may connect to a rebutting defeater, an undermining '
    "defeater, an undercutting defeater, an inference rule, or other evidence.",
    "IF an element is a context THEN it gives additional information about a "
    "fundamental element, is optional, AND it connects to a claim.",
    'IF an element is an inference rule THEN its text is a predicate of the '
    'form "if P then Q" in which exactly one of P and Q is an eliminated '
    "defeater AND it may connect to a rebutting defeater, an undermining "
    "defeater, an undercutting defeater, a claim, or evidence.",
    'IF an element is an undercutting defeater THEN its text begins with '
    '"Unless", it expresses a doubt about the validity of an inference rule, '
    "AND it attaches to an inference rule.",
    'IF an element is an undermining defeater THEN its text begins with '
    '"But", it challenges the validity of the data comprising evidence, AND '
    "it attaches to evidence.",
    'IF an element is a rebutting defeater THEN its text begins with '
    '"Unless" AND it attaches to a claim.',
    'IF a terminator is "Assumed OK" THEN it asserts that some defeater is '
    "assumed to be false AND it attaches to a rebutting defeater, an "
    "undermining defeater, an undercutting defeater, a claim, or evidence.",
    'IF a terminator is "Is OK" THEN it marks an inference rule as a '
    "tautology with no possible undercutting defeater AND it attaches to an "
    "inference rule, a claim, or evidence.",
)


def rule_sentences() -> tuple[str, ...]:
    """The static rule library, one sentence per notation rule."""
    return _RULE_SENTENCES


def diagnostics_to_json_lines(findings: Iterable[Diagnostic]) -> str:
    """Serialize findings as JSON lines, one finding per line."""
    import json

    return "".join(
        json.dumps(finding.to_json_dict(), ensure_ascii=False) + "\n"
        for finding in findings
    )
