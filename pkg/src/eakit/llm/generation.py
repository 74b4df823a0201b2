"""Defeater generation and mitigation: prompt building, response parsing,
candidate lifecycle and graft checking.

Prompts are pure functions of their inputs. A defeater prompt always
carries the serialized argument, the target element, the lexical prefix
the defeater kind demands and the number of candidates wanted; optionally
it embeds the notation's rule library (one predicate-form sentence per
rule) and a chain-of-thought instruction asking the model to state its
reasoning before each candidate. Grounding generation in explicit rules
rather than the model's implicit knowledge is what keeps hallucinated
structure out of the answers.

Responses come back as numbered lists. Items that violate the kind's
prefix rule are kept -- flagged in the candidate's rationale -- because
the reviewing expert, not the parser, decides their fate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping

from ..model import (
    DEFEATER_KINDS,
    DEFEATER_TARGETS,
    EaArgument,
    ElementKind,
    UnknownId,
)
from ..prose import apply_fragment, serialize
from ..rules import Severity, check_text, rule_sentences, validate
from .providers import ChatProvider, PromptRequest
from .session import SessionSettings

#: System prompt for generation and mitigation calls. The proficiency
#: prompt caps answers at a few lines, which would strangle multi-candidate
#: output, so these calls use their own orientation.
GENERATION_SYSTEM_PROMPT = (
    "You are an assistant that helps identify and mitigate defeaters in "
    "assurance cases written in the Eliminative Argumentation notation. "
    "Follow the requested output format exactly."
)

_KIND_WORDS: Mapping[ElementKind, str] = {
    ElementKind.REBUTTING_DEFEATER: "rebutting",
    ElementKind.UNDERMINING_DEFEATER: "undermining",
    ElementKind.UNDERCUTTING_DEFEATER: "undercutting",
}

_KIND_ABBREV: Mapping[ElementKind, str] = {
    ElementKind.REBUTTING_DEFEATER: "R",
    ElementKind.UNDERMINING_DEFEATER: "UM",
    ElementKind.UNDERCUTTING_DEFEATER: "UC",
}

_PREFIX_WORDS: Mapping[ElementKind, str] = {
    ElementKind.REBUTTING_DEFEATER: "Unless",
    ElementKind.UNDERCUTTING_DEFEATER: "Unless",
    ElementKind.UNDERMINING_DEFEATER: "But",
}


def candidate_id_prefix(target: str, kind: ElementKind) -> str:
    """Id stem for candidates against one target: ``C1.R``, ``E2.UM``, ..."""
    return f"{target}.{_KIND_ABBREV[kind]}"


class KindMismatch(ValueError):
    """Defeater kind does not fit the target element's kind."""


class NotADefeater(ValueError):
    """The referenced element is not one of the three defeater kinds."""


class EmptyResponse(ValueError):
    """The provider returned nothing to parse."""


def defeater_kind_from_name(name: str) -> ElementKind:
    """Resolve 'rebutting' / 'undermining' / 'undercutting' (or the full
    element-kind names) to the corresponding defeater kind."""
    lowered = name.strip().lower()
    for kind, word in _KIND_WORDS.items():
        if lowered in (word, kind.value.lower()):
            return kind
    raise KindMismatch(
        f"{name!r} is not a defeater kind; expected rebutting, undermining "
        "or undercutting"
    )


class CandidateStatus(Enum):
    PROPOSED = "Proposed"
    ACCEPTED = "Accepted"
    REFINED = "Refined"
    REJECTED = "Rejected"


@dataclass(frozen=True)
class DefeaterCandidate:
    """One model-proposed defeater and its review state."""

    id: str
    target_element: str
    kind: ElementKind
    text: str
    rationale: str = ""
    status: CandidateStatus = CandidateStatus.PROPOSED
    refined_text: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in DEFEATER_KINDS:
            raise NotADefeater(
                f"candidate kind must be a defeater kind, got {self.kind.value}"
            )
        if self.status is CandidateStatus.REFINED:
            if self.refined_text is None:
                raise ValueError("a refined candidate must carry refined_text")
        elif self.refined_text is not None:
            raise ValueError(
                f"refined_text is only valid on refined candidates, not "
                f"{self.status.value}"
            )

    def final_text(self) -> str:
        """The text a graft would use: refined if refined, else proposed."""
        return self.refined_text if self.refined_text is not None else self.text

    def to_json_dict(self) -> dict[str, Any]:
        entry: dict[str, Any] = {
            "id": self.id,
            "target_element": self.target_element,
            "kind": self.kind.value,
            "text": self.text,
            "rationale": self.rationale,
            "status": self.status.value,
        }
        if self.refined_text is not None:
            entry["refined_text"] = self.refined_text
        return entry

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "DefeaterCandidate":
        return cls(
            id=data["id"],
            target_element=data["target_element"],
            kind=ElementKind(data["kind"]),
            text=data["text"],
            rationale=data.get("rationale", ""),
            status=CandidateStatus(data.get("status", "Proposed")),
            refined_text=data.get("refined_text"),
        )


@dataclass(frozen=True)
class GenerationOptions:
    chain_of_thought: bool = True
    rule_library: bool = True
    n_candidates: int = 3


_GRAMMAR_NOTE = (
    "The argument below is written in a structured prose notation: "
    '"ID [Kind]: text" declares an element, "PARENT -> CHILD" declares a '
    'connection, and "ID ! AssumedOK" or "ID ! IsOK" marks a terminator.'
)


def build_defeater_prompt(
    argument: EaArgument,
    target: str,
    kind: ElementKind,
    options: GenerationOptions | None = None,
    settings: SessionSettings | None = None,
) -> PromptRequest:
    """Compose the request asking for defeater candidates against one element.

    ``kind`` must be the defeater kind that attacks the target's element
    kind: rebutting for claims, undermining for evidence, undercutting for
    inference rules.
    """
    options = options or GenerationOptions()
    settings = settings or SessionSettings()
    if kind not in DEFEATER_KINDS:
        raise KindMismatch(f"{kind.value} is not a defeater kind")
    element = argument.element(target)
    expected_target = DEFEATER_TARGETS[kind]
    if element.kind is not expected_target:
        raise KindMismatch(
            f"a {_KIND_WORDS[kind]} defeater targets a "
            f"{expected_target.value}, but {target!r} is a {element.kind.value}"
        )

    word = _KIND_WORDS[kind]
    prefix = _PREFIX_WORDS[kind]
    sections = [
        _GRAMMAR_NOTE,
        "Argument under review:\n" + serialize(argument).rstrip("\n"),
        f"Target element: {target}\n{target} [{element.kind.value}]: {element.text}",
    ]
    if options.rule_library:
        numbered = "\n".join(
            f"{index}. {sentence}"
            for index, sentence in enumerate(rule_sentences(), start=1)
        )
        sections.append("Rules of the notation:\n" + numbered)
    if options.chain_of_thought:
        sections.append(
            "Before each candidate, state in one or two sentences the "
            "reasoning that exposes the doubt, then give the candidate on "
            "its own numbered line."
        )
    sections.append(
        f"Task: propose exactly {options.n_candidates} candidate {word} "
        f"defeaters that challenge the target element. Return them as a "
        f'numbered list (1., 2., ...); each defeater must begin with "{prefix}".'
    )
    return PromptRequest(
        system=GENERATION_SYSTEM_PROMPT,
        user="\n\n".join(sections),
        seed=settings.seed,
        temperature=settings.temperature,
        model=settings.model,
    )


_ITEM_RE = re.compile(r"^\s*\d+[.)]\s+(?P<text>.+?)\s*$")


def parse_defeater_response(
    text: str,
    kind: ElementKind,
    target: str,
    first_index: int = 1,
) -> list[DefeaterCandidate]:
    """Extract numbered-list items as proposed candidates.

    Lines between items are treated as the model's reasoning for the next
    item. Items that break the kind's prefix rule are kept, with the lint
    finding appended to their rationale. Raises :class:`EmptyResponse` on
    blank input; a response with no numbered items yields an empty list.
    """
    if kind not in DEFEATER_KINDS:
        raise NotADefeater(f"{kind.value} is not a defeater kind")
    if not text.strip():
        raise EmptyResponse("provider returned an empty response")

    candidates: list[DefeaterCandidate] = []
    reasoning: list[str] = []
    id_prefix = candidate_id_prefix(target, kind)
    index = first_index
    for raw_line in text.splitlines():
        match = _ITEM_RE.match(raw_line)
        if match is None:
            if raw_line.strip():
                reasoning.append(raw_line.strip())
            continue
        candidate_text = match.group("text")
        rationale_parts = ["\n".join(reasoning)] if reasoning else []
        for finding in check_text(kind, candidate_text):
            rationale_parts.append(f"[lint {finding.code}] {finding.message}")
        candidates.append(
            DefeaterCandidate(
                id=f"{id_prefix}{index}",
                target_element=target,
                kind=kind,
                text=candidate_text,
                rationale="\n".join(rationale_parts),
            )
        )
        reasoning = []
        index += 1
    return candidates


def graft_candidate(
    argument: EaArgument,
    candidate: DefeaterCandidate,
    text_override: str | None = None,
) -> EaArgument:
    """Attach a candidate to its target as a new defeater element.

    The new element takes the candidate's id; the edge runs from the
    target to it. Model guards apply (unique id, known target, acyclic).
    """
    text = text_override if text_override is not None else candidate.final_text()
    grafted = argument.add_element(candidate.id, candidate.kind, text)
    return grafted.connect(candidate.target_element, candidate.id)


def new_structural_findings(
    before: EaArgument, after: EaArgument
) -> list[str]:
    """S-code findings present after a graft but not before."""
    old = {
        (d.code, d.subject)
        for d in validate(before)
        if d.code.startswith("S")
    }
    return sorted(
        f"{code} {subject}"
        for code, subject in {
            (d.code, d.subject)
            for d in validate(after)
            if d.code.startswith("S")
        }
        - old
    )


@dataclass(frozen=True)
class MitigationResult:
    """Outcome of one mitigation call.

    ``patch`` is an ea-prose fragment that grafts cleanly, or the empty
    string with ``note`` explaining why the model's proposal was refused;
    ``grafted`` holds the patched argument when the graft succeeded.
    """

    narrative: str
    patch: str
    note: str | None = None
    grafted: EaArgument | None = field(default=None, compare=False)

    def to_json_dict(self) -> dict[str, Any]:
        entry: dict[str, Any] = {"narrative": self.narrative, "patch": self.patch}
        if self.note is not None:
            entry["note"] = self.note
        return entry


def build_mitigation_prompt(
    argument: EaArgument,
    defeater: str,
    settings: SessionSettings | None = None,
) -> PromptRequest:
    """Compose the request asking how to resolve one defeater."""
    settings = settings or SessionSettings()
    element = argument.element(defeater)
    if element.kind not in DEFEATER_KINDS:
        raise NotADefeater(f"{defeater!r} is a {element.kind.value}, not a defeater")
    sections = [
        _GRAMMAR_NOTE,
        "Argument under review:\n" + serialize(argument).rstrip("\n"),
        f"Defeater to mitigate: {defeater}\n"
        f"{defeater} [{element.kind.value}]: {element.text}",
        "Explain briefly how to eliminate this doubt, then give a patch: a "
        "fenced code block (```) containing only new element lines, edge "
        "lines from existing elements to new ones, or a terminator line "
        "for the defeater. The patch must leave the argument well-formed "
        f"and must resolve {defeater}.",
    ]
    return PromptRequest(
        system=GENERATION_SYSTEM_PROMPT,
        user="\n\n".join(sections),
        seed=settings.seed,
        temperature=settings.temperature,
        model=settings.model,
    )


_FENCE_RE = re.compile(r"```[^\n]*\n(?P<body>.*?)```", re.DOTALL)


def generate_mitigation(
    argument: EaArgument,
    defeater: str,
    provider: ChatProvider,
    settings: SessionSettings | None = None,
) -> MitigationResult:
    """Ask the provider to resolve a defeater and vet its patch.

    A patch is accepted only when its fragment parses against the argument
    and the graft introduces no new structural (S-code) findings;
    otherwise the narrative comes back with an empty patch and a
    ``GraftRejected`` note. Raises :class:`~eakit.model.UnknownId` or
    :class:`NotADefeater` for a bad defeater reference and propagates
    provider failures.
    """
    request = build_mitigation_prompt(argument, defeater, settings)
    response = provider.complete(request)

    fence = _FENCE_RE.search(response)
    narrative = _FENCE_RE.sub("", response).strip()
    if fence is None:
        return MitigationResult(
            narrative=narrative,
            patch="",
            note="GraftRejected: response contains no fenced patch fragment",
        )
    patch = fence.group("body").strip("\n")
    result = apply_fragment(argument, patch)
    if not result.ok:
        reasons = "; ".join(str(error) for error in result.errors)
        return MitigationResult(
            narrative=narrative,
            patch="",
            note=f"GraftRejected: patch did not parse ({reasons})",
        )
    introduced = new_structural_findings(argument, result.argument)
    if introduced:
        return MitigationResult(
            narrative=narrative,
            patch="",
            note="GraftRejected: patch introduces structural findings "
            + ", ".join(introduced),
        )
    return MitigationResult(
        narrative=narrative,
        patch=patch if patch.endswith("\n") else patch + "\n",
        grafted=result.argument,
    )


# -- offline demo synthesis -----------------------------------------------

_DEMO_DOUBTS = (
    "a silent sensor failure masks the condition it reports",
    "the supporting evidence covers a configuration that differs from deployment",
    "an unexamined common-cause failure defeats the protective action",
    "maintenance drift invalidates the assumption after commissioning",
    "the analysis omits a credible operating scenario",
)

_DEMO_PREFIX_RE = re.compile(r'each defeater must begin with "(?P<prefix>\w+)"')
_DEMO_COUNT_RE = re.compile(r"propose exactly (?P<count>\d+)")
_DEMO_TARGET_RE = re.compile(r"^Target element: (?P<target>\S+)$", re.MULTILINE)
_DEMO_DEFEATER_RE = re.compile(r"^Defeater to mitigate: (?P<id>\S+)$", re.MULTILINE)


def synthesize_demo_response(request: PromptRequest) -> str:
    """Deterministic offline stand-in for a live model.

    Recognises the prompts this module builds and answers them in the
    format they ask for; anything else gets a fixed placeholder line.
    """
    prefix_match = _DEMO_PREFIX_RE.search(request.user)
    target_match = _DEMO_TARGET_RE.search(request.user)
    if prefix_match and target_match:
        count = int(_DEMO_COUNT_RE.search(request.user).group("count"))  # type: ignore[union-attr]
        prefix = prefix_match.group("prefix")
        target = target_match.group("target")
        lines: list[str] = []
        for index in range(1, count + 1):
            doubt = _DEMO_DOUBTS[(index - 1) % len(_DEMO_DOUBTS)]
            qualifier = "" if index <= len(_DEMO_DOUBTS) else f" (variant {index})"
            lines.append(
                f"Reasoning: doubt {index} bears directly on {target}."
            )
            lines.append(f"{index}. {prefix} {doubt}{qualifier}")
        return "\n".join(lines)

    defeater_match = _DEMO_DEFEATER_RE.search(request.user)
    if defeater_match:
        defeater = defeater_match.group("id")
        evidence_id = f"E_{defeater}_mit"
        suffix = 2
        while f"\n{evidence_id} [" in "\n" + request.user:
            evidence_id = f"E_{defeater}_mit{suffix}"
            suffix += 1
        return (
            f"Commission a targeted test against the doubt raised by "
            f"{defeater} and attach the result as evidence under it.\n"
            "```\n"
            f"{evidence_id} [Evidence]: Follow-up test report showing the "
            "doubted failure does not occur\n"
            f"{defeater} -> {evidence_id}\n"
            "```"
        )

    return "No canned answer is available for this prompt."
