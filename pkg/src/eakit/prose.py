"""Structured-prose text format: parser and canonical serializer.

This is the normative file format for arguments (suggested extension
``.ea``). One construct per line:

    ID [Kind]: TEXT           element declaration
    PARENT -> CHILD           edge
    ID ! AssumedOK            terminator (or ``ID ! IsOK``)
    # anything                comment, whole line only

``Kind`` is one of Claim, Evidence, Context, InferenceRule, Strategy,
Rebutting, Undermining, Undercutting (the short defeater names map onto
the full element kinds). Blank lines are ignored. Edges and terminators
may reference elements declared later in the document; the parser reads
all element lines first.

Parsing is total: it never raises on malformed input and reports every
recoverable error with a 1-based line and column, not just the first.
Output is UTF-8 with LF newlines, no tabs and no trailing whitespace
(CRLF is accepted on input), so serialized documents are byte-stable and
``parse(serialize(a))`` reproduces ``a`` exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .model import (
    AlreadyTerminated,
    BadIdentifier,
    CycleIntroduced,
    DuplicateEdge,
    DuplicateId as ModelDuplicateId,
    EaArgument,
    ElementKind,
    EmptyText,
    IllegalAttachment,
    SelfEdge,
    TerminatorKind,
    UnknownId,
    new_argument,
)

#: Kind names used in text form, mapped to the model kinds.
KIND_NAMES: dict[str, ElementKind] = {
    "Claim": ElementKind.CLAIM,
    "Evidence": ElementKind.EVIDENCE,
    "Context": ElementKind.CONTEXT,
    "InferenceRule": ElementKind.INFERENCE_RULE,
    "Strategy": ElementKind.STRATEGY,
    "Rebutting": ElementKind.REBUTTING_DEFEATER,
    "Undermining": ElementKind.UNDERMINING_DEFEATER,
    "Undercutting": ElementKind.UNDERCUTTING_DEFEATER,
}

KIND_TO_NAME: dict[ElementKind, str] = {kind: name for name, kind in KIND_NAMES.items()}

TERMINATOR_NAMES: dict[str, TerminatorKind] = {
    "AssumedOK": TerminatorKind.ASSUMED_OK,
    "IsOK": TerminatorKind.IS_OK,
}

TERMINATOR_TO_NAME: dict[TerminatorKind, str] = {
    terminator: name for name, terminator in TERMINATOR_NAMES.items()
}


class ParseErrorCode(Enum):
    BAD_KIND = "BadKind"
    BAD_ID = "BadId"
    MISSING_COLON = "MissingColon"
    BAD_EDGE = "BadEdge"
    BAD_TERMINATOR = "BadTerminator"
    DUPLICATE_ID = "DuplicateId"
    UNKNOWN_REF = "UnknownRef"


@dataclass(frozen=True)
class ParseError:
    """One recoverable problem in a prose document."""

    line: int
    column: int
    code: ParseErrorCode
    message: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "line": self.line,
            "column": self.column,
            "code": self.code.value,
            "message": self.message,
        }

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.code.value}: {self.message}"


@dataclass(frozen=True)
class ParseResult:
    """Either a valid argument or at least one error, never both."""

    argument: EaArgument | None
    errors: tuple[ParseError, ...]

    @property
    def ok(self) -> bool:
        return self.argument is not None

    def unwrap(self) -> EaArgument:
        """The argument, or ``ValueError`` summarising the errors."""
        if self.argument is None:
            summary = "; ".join(str(error) for error in self.errors)
            raise ValueError(f"document did not parse: {summary}")
        return self.argument


_NODE_RE = re.compile(
    r"^(?P<indent>\s*)(?P<id>[^\s\[\]]+)\s*\[(?P<kind>[^\]]*)\](?P<rest>.*)$"
)
_NODE_START_RE = re.compile(r"^\s*[^\s\[\]]+\s*\[")
_REST_RE = re.compile(r"^\s*:\s?(?P<text>.*)$")
_EDGE_RE = re.compile(r"^(?P<indent>\s*)(?P<parent>\S+)\s*->\s*(?P<child>\S+)\s*$")
_TERM_RE = re.compile(r"^(?P<indent>\s*)(?P<id>\S+)\s*!\s*(?P<name>\S+)\s*$")


def _clamp_column(line_text: str, column: int) -> int:
    return max(1, min(column, max(1, len(line_text))))


class _Parser:
    """Single-use parser state: collects errors while building via ops."""

    def __init__(self, base: EaArgument) -> None:
        self.argument = base
        self.errors: list[ParseError] = []

    def error(self, line_no: int, line_text: str, column: int, code: ParseErrorCode, message: str) -> None:
        self.errors.append(
            ParseError(line_no, _clamp_column(line_text, column), code, message)
        )

    def run(self, text: str) -> ParseResult:
        lines = text.split("\n")
        edge_lines: list[tuple[int, str]] = []
        terminator_lines: list[tuple[int, str]] = []

        for index, raw in enumerate(lines, start=1):
            line = raw.rstrip("\r")
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if _NODE_START_RE.match(line):
                self._node_line(index, line)
            elif "->" in line:
                edge_lines.append((index, line))
            elif "!" in line:
                terminator_lines.append((index, line))
            elif ":" in line:
                self.error(
                    index,
                    line,
                    line.index(":") + 1,
                    ParseErrorCode.BAD_KIND,
                    "element line is missing its '[Kind]' before ':'",
                )
            else:
                self.error(
                    index,
                    line,
                    1,
                    ParseErrorCode.MISSING_COLON,
                    "unrecognized line; expected 'ID [Kind]: TEXT', "
                    "'PARENT -> CHILD' or 'ID ! TERMINATOR'",
                )

        for index, line in edge_lines:
            self._edge_line(index, line)
        for index, line in terminator_lines:
            self._terminator_line(index, line)

        if self.errors:
            return ParseResult(None, tuple(self.errors))
        return ParseResult(self.argument, ())

    def _node_line(self, line_no: int, line: str) -> None:
        match = _NODE_RE.match(line)
        if match is None:
            self.error(
                line_no,
                line,
                line.index("[") + 1,
                ParseErrorCode.BAD_KIND,
                "unterminated '[Kind]' bracket",
            )
            return
        id_column = len(match.group("indent")) + 1
        kind_column = match.start("kind") + 1
        element_id = match.group("id")
        kind_name = match.group("kind").strip()

        kind = KIND_NAMES.get(kind_name)
        if kind is None:
            self.error(
                line_no,
                line,
                kind_column,
                ParseErrorCode.BAD_KIND,
                f"unknown kind {kind_name!r}; expected one of "
                + ", ".join(KIND_NAMES),
            )
            return

        rest = match.group("rest")
        rest_match = _REST_RE.match(rest)
        if rest_match is None:
            self.error(
                line_no,
                line,
                match.end("kind") + 2,
                ParseErrorCode.MISSING_COLON,
                "expected ':' after '[Kind]'",
            )
            return
        text = rest_match.group("text")

        try:
            self.argument = self.argument.add_element(element_id, kind, text)
        except ModelDuplicateId:
            self.error(
                line_no,
                line,
                id_column,
                ParseErrorCode.DUPLICATE_ID,
                f"element id {element_id!r} declared more than once",
            )
        except BadIdentifier:
            self.error(
                line_no,
                line,
                id_column,
                ParseErrorCode.BAD_ID,
                f"bad element id {element_id!r}: expected a letter followed "
                "by letters, digits, '.' or '_'",
            )
        except EmptyText:
            colon_column = len(line) - len(rest) + rest.index(":") + 1
            self.error(
                line_no,
                line,
                colon_column,
                ParseErrorCode.MISSING_COLON,
                "element line has no text after ':'",
            )

    def _edge_line(self, line_no: int, line: str) -> None:
        match = _EDGE_RE.match(line)
        if match is None:
            self.error(
                line_no,
                line,
                1,
                ParseErrorCode.BAD_EDGE,
                "malformed edge line; expected 'PARENT -> CHILD'",
            )
            return
        parent = match.group("parent")
        child = match.group("child")
        try:
            self.argument = self.argument.connect(parent, child)
        except UnknownId:
            missing = parent if parent not in self.argument else child
            column = (
                match.start("parent") + 1
                if missing == parent
                else match.start("child") + 1
            )
            self.error(
                line_no,
                line,
                column,
                ParseErrorCode.UNKNOWN_REF,
                f"edge references undeclared element {missing!r}",
            )
        except SelfEdge:
            self.error(
                line_no, line, 1, ParseErrorCode.BAD_EDGE, f"self edge on {parent!r}"
            )
        except DuplicateEdge:
            self.error(
                line_no,
                line,
                1,
                ParseErrorCode.BAD_EDGE,
                f"duplicate edge {parent!r} -> {child!r}",
            )
        except CycleIntroduced:
            self.error(
                line_no,
                line,
                1,
                ParseErrorCode.BAD_EDGE,
                f"edge {parent!r} -> {child!r} would create a cycle",
            )

    def _terminator_line(self, line_no: int, line: str) -> None:
        match = _TERM_RE.match(line)
        if match is None:
            self.error(
                line_no,
                line,
                1,
                ParseErrorCode.BAD_TERMINATOR,
                "malformed terminator line; expected 'ID ! AssumedOK' or 'ID ! IsOK'",
            )
            return
        element_id = match.group("id")
        name = match.group("name")
        terminator = TERMINATOR_NAMES.get(name)
        if terminator is None:
            self.error(
                line_no,
                line,
                match.start("name") + 1,
                ParseErrorCode.BAD_TERMINATOR,
                f"unknown terminator {name!r}; expected AssumedOK or IsOK",
            )
            return
        try:
            self.argument = self.argument.attach_terminator(element_id, terminator)
        except UnknownId:
            self.error(
                line_no,
                line,
                match.start("id") + 1,
                ParseErrorCode.UNKNOWN_REF,
                f"terminator references undeclared element {element_id!r}",
            )
        except IllegalAttachment as exc:
            self.error(
                line_no,
                line,
                match.start("name") + 1,
                ParseErrorCode.BAD_TERMINATOR,
                str(exc),
            )
        except AlreadyTerminated:
            self.error(
                line_no,
                line,
                match.start("id") + 1,
                ParseErrorCode.BAD_TERMINATOR,
                f"element {element_id!r} already carries a terminator",
            )


def parse(text: str) -> ParseResult:
    """Parse a whole document. Empty input yields an empty argument."""
    return _Parser(new_argument()).run(text)


def apply_fragment(base: EaArgument, fragment: str) -> ParseResult:
    """Parse a fragment in the context of an existing argument.

    Fragment lines may declare new elements and may reference elements
    that already exist in ``base`` (for edges and terminators). On success
    the result holds ``base`` plus the fragment's additions; ``base``
    itself is never modified.
    """
    return _Parser(base).run(fragment)


def serialize(argument: EaArgument) -> str:
    """Canonical text form: elements, then edges, then terminators.

    All three groups appear in insertion order. The output of an empty
    argument is the empty string; otherwise every line, including the
    last, ends with LF.
    """
    lines: list[str] = []
    for element in argument.elements.values():
        lines.append(
            f"{element.id} [{KIND_TO_NAME[element.kind]}]: {element.text}"
        )
    for parent, child in argument.edges:
        lines.append(f"{parent} -> {child}")
    for element in argument.elements.values():
        if element.terminator is not None:
            lines.append(
                f"{element.id} ! {TERMINATOR_TO_NAME[element.terminator]}"
            )
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
