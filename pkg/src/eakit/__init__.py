"""eakit: author, validate and strengthen eliminative-argumentation
assurance cases.

The pieces: an immutable argument-graph model (:mod:`eakit.model`), a
structured-prose text format (:mod:`eakit.prose`), a rule engine with
coded diagnostics and defeater-coverage analysis (:mod:`eakit.rules`),
dual-rater agreement statistics (:mod:`eakit.stats`), a deterministic LLM
harness for proficiency assessment and defeater generation
(:mod:`eakit.llm`), and an HTTP review service (:mod:`eakit.service`).
"""

from .model import (
    EaArgument,
    EaElement,
    ElementKind,
    TerminatorKind,
    new_argument,
)
from .prose import ParseError, ParseResult, parse, serialize
from .rules import CoverageReport, Diagnostic, Severity, check_text, coverage, validate

__version__ = "0.1.0"

__all__ = [
    "CoverageReport",
    "Diagnostic",
    "EaArgument",
    "EaElement",
    "ElementKind",
    "ParseError",
    "ParseResult",
    "Severity",
    "TerminatorKind",
    "__version__",
    "check_text",
    "coverage",
    "new_argument",
    "parse",
    "serialize",
    "validate",
]
