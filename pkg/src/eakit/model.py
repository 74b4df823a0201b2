"""Typed graph model for eliminative-argumentation assurance cases.

An argument is a directed acyclic graph of typed elements -- claims,
evidence, contexts, inference rules, strategies, and the three defeater
kinds -- each optionally carrying a terminator annotation. Edges run from
the supported element to the element that supports or challenges it, so a
rebutting defeater appears as a child of the claim it attacks.

Construction goes through guarded operations (:meth:`EaArgument.add_element`,
:meth:`EaArgument.connect`, :meth:`EaArgument.attach_terminator`) that keep
every reachable instance well-formed: unique identifiers, non-empty text,
no dangling or duplicate edges, no self-edges, no cycles, and terminators
only on element kinds that may carry them.

Arguments are immutable values. Every operation returns a new argument
sharing untouched state with the old one, so instances can be handed
across threads freely; serialisation order (elements, then edges) follows
insertion order, which keeps downstream output byte-stable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Mapping


class ElementKind(Enum):
    """The eight element kinds an argument graph may contain."""

    CLAIM = "Claim"
    EVIDENCE = "Evidence"
    CONTEXT = "Context"
    INFERENCE_RULE = "InferenceRule"
    STRATEGY = "Strategy"
    REBUTTING_DEFEATER = "RebuttingDefeater"
    UNDERMINING_DEFEATER = "UnderminingDefeater"
    UNDERCUTTING_DEFEATER = "UndercuttingDefeater"

    @classmethod
    def from_name(cls, name: str) -> "ElementKind":
        try:
            return cls(name)
        except ValueError:
            raise BadKindName(f"unknown element kind {name!r}") from None


class TerminatorKind(Enum):
    """Leaf annotations that end a branch of the argument."""

    ASSUMED_OK = "AssumedOk"
    IS_OK = "IsOk"

    @classmethod
    def from_name(cls, name: str) -> "TerminatorKind":
        try:
            return cls(name)
        except ValueError:
            raise BadKindName(f"unknown terminator kind {name!r}") from None


#: The three element kinds that challenge other elements.
DEFEATER_KINDS = frozenset(
    {
        ElementKind.REBUTTING_DEFEATER,
        ElementKind.UNDERMINING_DEFEATER,
        ElementKind.UNDERCUTTING_DEFEATER,
    }
)

#: Which element kind each defeater kind attacks.
DEFEATER_TARGETS: Mapping[ElementKind, ElementKind] = {
    ElementKind.REBUTTING_DEFEATER: ElementKind.CLAIM,
    ElementKind.UNDERMINING_DEFEATER: ElementKind.EVIDENCE,
    ElementKind.UNDERCUTTING_DEFEATER: ElementKind.INFERENCE_RULE,
}

#: Element kinds each terminator may be attached to.
TERMINATOR_ATTACHMENT: Mapping[TerminatorKind, frozenset[ElementKind]] = {
    TerminatorKind.ASSUMED_OK: frozenset(
        {
            ElementKind.REBUTTING_DEFEATER,
            ElementKind.UNDERMINING_DEFEATER,
            ElementKind.UNDERCUTTING_DEFEATER,
            ElementKind.CLAIM,
            ElementKind.EVIDENCE,
        }
    ),
    TerminatorKind.IS_OK: frozenset(
        {
            ElementKind.INFERENCE_RULE,
            ElementKind.CLAIM,
            ElementKind.EVIDENCE,
        }
    ),
}


def terminator_legal(kind: ElementKind, terminator: TerminatorKind) -> bool:
    """True when ``terminator`` may be attached to an element of ``kind``."""
    return kind in TERMINATOR_ATTACHMENT[terminator]


class EaModelError(ValueError):
    """Base class for violations of the argument-graph invariants."""


class BadKindName(EaModelError):
    """A kind or terminator name outside the fixed vocabulary."""


class BadIdentifier(EaModelError):
    """Element id does not match ``letter (letter|digit|'.'|'_')*``."""


class EmptyText(EaModelError):
    """Element text is empty after whitespace normalisation."""


class DuplicateId(EaModelError):
    """Element id already present in the argument."""


class UnknownId(EaModelError):
    """Referenced element id does not exist."""


class DuplicateEdge(EaModelError):
    """Edge already present."""


class SelfEdge(EaModelError):
    """Edge endpoints are the same element."""


class CycleIntroduced(EaModelError):
    """Adding the edge would make the argument cyclic."""


class IllegalAttachment(EaModelError):
    """Terminator not permitted on the element's kind."""


class AlreadyTerminated(EaModelError):
    """Element already carries a terminator."""


_ID_RE = re.compile(r"[A-Za-z][A-Za-z0-9._]*\Z")
_CONTROL_WS = re.compile(r"[ ]*[\t\r\n][ \t\r\n]*")


def valid_identifier(identifier: str) -> bool:
    """Check an id against the identifier grammar."""
    return bool(_ID_RE.match(identifier))


def normalize_text(text: str) -> str:
    """Collapse control whitespace to spaces and trim the ends.

    Element text is single-line prose; tabs and line breaks have no meaning
    in it and would break the canonical text serialisation, so they are
    replaced by single spaces at construction time.
    """
    return _CONTROL_WS.sub(" ", text).strip()


@dataclass(frozen=True)
class EaElement:
    """One node of the argument graph.

    ``text`` is normalised on construction (see :func:`normalize_text`).
    Terminator legality for the element's kind is enforced by
    :meth:`EaArgument.attach_terminator` rather than here, so the rule
    engine can still diagnose hand-built graphs that skip the guarded
    operations.
    """

    id: str
    kind: ElementKind
    text: str
    terminator: TerminatorKind | None = None

    def __post_init__(self) -> None:
        if not valid_identifier(self.id):
            raise BadIdentifier(
                f"bad element id {self.id!r}: expected a letter followed by "
                "letters, digits, '.' or '_'"
            )
        normalized = normalize_text(self.text)
        if not normalized:
            raise EmptyText(f"element {self.id!r} has empty text")
        object.__setattr__(self, "text", normalized)

    def is_defeater(self) -> bool:
        return self.kind in DEFEATER_KINDS


@dataclass(frozen=True, eq=False)
class EaArgument:
    """An immutable assurance argument: elements plus parent->child edges.

    ``elements`` preserves insertion order; ``edges`` preserves the order
    in which connections were made. Equality is structural: same elements
    and the same edge *set* (edge insertion order is a serialisation
    detail, not part of the argument's identity).
    """

    elements: Mapping[str, EaElement] = field(default_factory=dict)
    edges: tuple[tuple[str, str], ...] = ()

    # -- queries ---------------------------------------------------------

    def __contains__(self, element_id: str) -> bool:
        return element_id in self.elements

    def __iter__(self) -> Iterator[EaElement]:
        return iter(self.elements.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EaArgument):
            return NotImplemented
        return dict(self.elements) == dict(other.elements) and frozenset(
            self.edges
        ) == frozenset(other.edges)

    @property
    def element_count(self) -> int:
        return len(self.elements)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def element(self, element_id: str) -> EaElement:
        try:
            return self.elements[element_id]
        except KeyError:
            raise UnknownId(f"no element with id {element_id!r}") from None

    def has_edge(self, parent: str, child: str) -> bool:
        return (parent, child) in set(self.edges)

    def children(self, element_id: str) -> list[EaElement]:
        """Elements this one is supported or challenged by, in edge order."""
        self.element(element_id)
        return [self.elements[c] for (p, c) in self.edges if p == element_id]

    def parents(self, element_id: str) -> list[EaElement]:
        self.element(element_id)
        return [self.elements[p] for (p, c) in self.edges if c == element_id]

    def _reachable(self, start: str, goal: str) -> bool:
        """Directed reachability along parent->child edges."""
        if start == goal:
            return True
        pending = [start]
        seen = {start}
        forward: dict[str, list[str]] = {}
        for parent, child in self.edges:
            forward.setdefault(parent, []).append(child)
        while pending:
            node = pending.pop()
            for nxt in forward.get(node, ()):
                if nxt == goal:
                    return True
                if nxt not in seen:
                    seen.add(nxt)
                    pending.append(nxt)
        return False

    # -- guarded construction -------------------------------------------

    def add_element(self, element_id: str, kind: ElementKind, text: str) -> "EaArgument":
        """Return a new argument with one more element.

        Raises :class:`DuplicateId`, :class:`BadIdentifier` or
        :class:`EmptyText`.
        """
        if element_id in self.elements:
            raise DuplicateId(f"element id {element_id!r} already used")
        element = EaElement(element_id, kind, text)
        elements = dict(self.elements)
        elements[element_id] = element
        return EaArgument(elements, self.edges)

    def connect(self, parent: str, child: str) -> "EaArgument":
        """Return a new argument with the edge ``parent -> child``.

        Raises :class:`UnknownId`, :class:`SelfEdge`, :class:`DuplicateEdge`
        or :class:`CycleIntroduced`. Which kind pairs make a *legal* edge is
        the rule engine's concern, not the model's.
        """
        self.element(parent)
        self.element(child)
        if parent == child:
            raise SelfEdge(f"self edge on {parent!r}")
        if self.has_edge(parent, child):
            raise DuplicateEdge(f"edge {parent!r} -> {child!r} already present")
        if self._reachable(child, parent):
            raise CycleIntroduced(
                f"edge {parent!r} -> {child!r} would create a cycle"
            )
        return EaArgument(self.elements, self.edges + ((parent, child),))

    def attach_terminator(self, element_id: str, terminator: TerminatorKind) -> "EaArgument":
        """Return a new argument with a terminator on one element.

        Raises :class:`UnknownId`, :class:`AlreadyTerminated` or
        :class:`IllegalAttachment` (AssumedOk fits defeaters, claims and
        evidence; IsOk fits inference rules, claims and evidence).
        """
        element = self.element(element_id)
        if element.terminator is not None:
            raise AlreadyTerminated(
                f"element {element_id!r} already carries a terminator"
            )
        if not terminator_legal(element.kind, terminator):
            raise IllegalAttachment(
                f"terminator {terminator.value} may not be attached to "
                f"{element.kind.value} {element_id!r}"
            )
        elements = dict(self.elements)
        elements[element_id] = EaElement(
            element.id, element.kind, element.text, terminator
        )
        return EaArgument(elements, self.edges)

    # -- wire format -----------------------------------------------------

    def to_json_dict(self) -> dict[str, Any]:
        """JSON wire form: elements (insertion order), then edges."""
        element_dicts: list[dict[str, Any]] = []
        for element in self.elements.values():
            entry: dict[str, Any] = {
                "id": element.id,
                "kind": element.kind.value,
                "text": element.text,
            }
            if element.terminator is not None:
                entry["terminator"] = element.terminator.value
            element_dicts.append(entry)
        return {
            "elements": element_dicts,
            "edges": [[parent, child] for parent, child in self.edges],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, ensure_ascii=False)

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "EaArgument":
        """Rebuild through the guarded operations, so invariants re-apply."""
        argument = cls()
        for entry in data.get("elements", []):
            argument = argument.add_element(
                entry["id"],
                ElementKind.from_name(entry["kind"]),
                entry["text"],
            )
        for parent, child in data.get("edges", []):
            argument = argument.connect(parent, child)
        for entry in data.get("elements", []):
            terminator = entry.get("terminator")
            if terminator is not None:
                argument = argument.attach_terminator(
                    entry["id"], TerminatorKind.from_name(terminator)
                )
        return argument

    @classmethod
    def from_json(cls, text: str) -> "EaArgument":
        return cls.from_json_dict(json.loads(text))


def new_argument() -> EaArgument:
    """An empty argument: zero elements, zero edges."""
    return EaArgument()
