"""Deterministic LLM access: proficiency sessions, defeater generation
and mitigation, all replayable offline."""

from .bank import (
    BadFormat,
    CountMismatch,
    Provenance,
    QuestionCategory,
    QuestionItem,
    default_question_bank,
    load_question_bank,
)
from .generation import (
    CandidateStatus,
    DefeaterCandidate,
    EmptyResponse,
    GenerationOptions,
    KindMismatch,
    MitigationResult,
    NotADefeater,
    build_defeater_prompt,
    build_mitigation_prompt,
    defeater_kind_from_name,
    generate_mitigation,
    graft_candidate,
    parse_defeater_response,
)
from .providers import (
    CannedProvider,
    ChatProvider,
    LiveProvider,
    PromptRequest,
    ProviderError,
    ReplayProvider,
)
from .session import (
    SYSTEM_PROMPT_SHA256,
    SessionSettings,
    Transcript,
    TranscriptEntry,
    offline_demo_provider,
    run_proficiency_session,
    system_prompt,
)

__all__ = [
    "BadFormat",
    "CandidateStatus",
    "CannedProvider",
    "ChatProvider",
    "CountMismatch",
    "DefeaterCandidate",
    "EmptyResponse",
    "GenerationOptions",
    "KindMismatch",
    "LiveProvider",
    "MitigationResult",
    "NotADefeater",
    "PromptRequest",
    "Provenance",
    "ProviderError",
    "QuestionCategory",
    "QuestionItem",
    "ReplayProvider",
    "SYSTEM_PROMPT_SHA256",
    "SessionSettings",
    "Transcript",
    "TranscriptEntry",
    "build_defeater_prompt",
    "build_mitigation_prompt",
    "default_question_bank",
    "defeater_kind_from_name",
    "generate_mitigation",
    "graft_candidate",
    "load_question_bank",
    "offline_demo_provider",
    "parse_defeater_response",
    "run_proficiency_session",
    "system_prompt",
]
