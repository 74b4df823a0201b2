"""REST service for the expert review loop.

Routes (JSON everywhere except the upload body, which is the prose
document itself):

    POST /arguments                          upload a document
    GET  /arguments                          list stored arguments
    GET  /arguments/{id}                     argument, candidates, log
    GET  /arguments/{id}/diagnostics         rule-engine findings
    GET  /arguments/{id}/coverage            defeater coverage
    POST /arguments/{id}/candidates          request defeater candidates
    POST /arguments/{id}/candidates/{cid}/decision
    GET  /arguments/{id}/log                 decision log

Every argument-scoped response carries the revision in an ``ETag``
header; mutating requests may send ``If-Match`` with the revision they
saw, and lose with 409 if someone else got there first. A document whose
structure breaks the connection rules is stored anyway but answered with
422 so the client knows it is flagged.
"""

from __future__ import annotations

import re
from typing import Any, Literal

from fastapi import FastAPI, Header, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..llm.generation import (
    CandidateStatus,
    GenerationOptions,
    KindMismatch,
    build_defeater_prompt,
    candidate_id_prefix,
    defeater_kind_from_name,
    new_structural_findings,
    parse_defeater_response,
)
from ..llm.providers import ChatProvider, ProviderError
from ..llm.session import SessionSettings, offline_demo_provider
from ..model import UnknownId
from ..prose import parse
from ..rules import (
    PreconditionViolated,
    Severity,
    check_text,
    coverage,
    validate,
)
from .store import (
    FileStore,
    RevisionConflict,
    StoredArgument,
    UnknownArgument,
    append_candidates,
    apply_decision,
)


class CandidateRequest(BaseModel):
    target: str
    kind: str


class DecisionRequest(BaseModel):
    action: Literal["Accept", "Refine", "Reject"]
    edited_text: str | None = None


def _etag(revision: int) -> dict[str, str]:
    return {"ETag": f'"{revision}"'}


def _parse_if_match(value: str | None) -> int | None:
    if value is None:
        return None
    match = re.search(r"\d+", value)
    if match is None:
        raise ValueError(f"malformed If-Match header {value!r}")
    return int(match.group())


def _error(status: int, message: str, **extra: Any) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status)


def _stored_view(stored: StoredArgument) -> dict[str, Any]:
    return {
        "argument_id": stored.argument_id,
        "revision": stored.revision,
        "argument": stored.argument.to_json_dict(),
        "candidates": [c.to_json_dict() for c in stored.candidates],
    }


def _next_candidate_index(stored: StoredArgument, id_prefix: str) -> int:
    """First free numeric suffix for ``{id_prefix}{n}`` candidate ids."""
    pattern = re.compile(re.escape(id_prefix) + r"(\d+)\Z")
    used = [c.id for c in stored.candidates]
    used.extend(stored.argument.elements)
    highest = 0
    for name in used:
        match = pattern.match(name)
        if match:
            highest = max(highest, int(match.group(1)))
    return highest + 1


def create_app(
    store: FileStore,
    provider: ChatProvider | None = None,
    settings: SessionSettings | None = None,
    options: GenerationOptions | None = None,
) -> FastAPI:
    """Wire the routes onto a store and a chat provider.

    With no provider given, the offline demo provider serves candidate
    requests, which keeps the service fully functional without network
    access or credentials.
    """
    provider = provider or offline_demo_provider()
    settings = settings or SessionSettings()
    options = options or GenerationOptions()
    app = FastAPI(title="eakit review service", version="0.1.0")

    @app.post("/arguments")
    async def create_argument(request: Request) -> Response:
        body = (await request.body()).decode("utf-8")
        result = parse(body)
        if not result.ok:
            return _error(
                400,
                "document did not parse",
                errors=[e.to_json_dict() for e in result.errors],
            )
        stored = store.create(result.argument)
        findings = validate(stored.argument)
        payload = {
            "argument_id": stored.argument_id,
            "revision": stored.revision,
            "diagnostics": [f.to_json_dict() for f in findings],
        }
        has_errors = any(f.severity is Severity.ERROR for f in findings)
        return JSONResponse(
            payload,
            status_code=422 if has_errors else 201,
            headers=_etag(stored.revision),
        )

    @app.get("/arguments")
    def list_arguments() -> JSONResponse:
        entries = []
        for argument_id in store.list_ids():
            stored = store.get(argument_id)
            entries.append(
                {"argument_id": argument_id, "revision": stored.revision}
            )
        return JSONResponse(entries)

    @app.get("/arguments/{argument_id}")
    def get_argument(argument_id: str) -> JSONResponse:
        try:
            stored = store.get(argument_id)
        except UnknownArgument:
            return _error(404, f"no argument {argument_id!r}")
        return JSONResponse(_stored_view(stored), headers=_etag(stored.revision))

    @app.get("/arguments/{argument_id}/diagnostics")
    def get_diagnostics(argument_id: str) -> JSONResponse:
        try:
            stored = store.get(argument_id)
        except UnknownArgument:
            return _error(404, f"no argument {argument_id!r}")
        findings = validate(stored.argument)
        return JSONResponse(
            [f.to_json_dict() for f in findings], headers=_etag(stored.revision)
        )

    @app.get("/arguments/{argument_id}/coverage")
    def get_coverage(argument_id: str) -> JSONResponse:
        try:
            stored = store.get(argument_id)
        except UnknownArgument:
            return _error(404, f"no argument {argument_id!r}")
        try:
            report = coverage(stored.argument)
        except PreconditionViolated as exc:
            return _error(422, str(exc))
        return JSONResponse(report.to_json_dict(), headers=_etag(stored.revision))

    @app.post("/arguments/{argument_id}/candidates")
    def request_candidates(
        argument_id: str,
        body: CandidateRequest,
        if_match: str | None = Header(default=None),
    ) -> JSONResponse:
        try:
            expected = _parse_if_match(if_match)
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            stored = store.get(argument_id)
        except UnknownArgument:
            return _error(404, f"no argument {argument_id!r}")
        try:
            kind = defeater_kind_from_name(body.kind)
            prompt = build_defeater_prompt(
                stored.argument, body.target, kind, options, settings
            )
        except UnknownId as exc:
            return _error(404, str(exc))
        except KindMismatch as exc:
            return _error(409, str(exc))
        try:
            response_text = provider.complete(prompt)
        except ProviderError as exc:
            return _error(502, f"provider failure: {exc}")
        first_index = _next_candidate_index(
            stored, candidate_id_prefix(body.target, kind)
        )
        candidates = parse_defeater_response(
            response_text, kind, body.target, first_index=first_index
        )
        try:
            updated = store.mutate(
                argument_id,
                lambda current: append_candidates(current, candidates),
                expected_revision=expected,
            )
        except RevisionConflict as exc:
            return _error(409, str(exc), revision=exc.current_revision)
        return JSONResponse(
            {
                "revision": updated.revision,
                "candidates": [c.to_json_dict() for c in candidates],
            },
            status_code=201,
            headers=_etag(updated.revision),
        )

    @app.post("/arguments/{argument_id}/candidates/{candidate_id}/decision")
    def decide(
        argument_id: str,
        candidate_id: str,
        body: DecisionRequest,
        if_match: str | None = Header(default=None),
    ) -> JSONResponse:
        try:
            expected = _parse_if_match(if_match)
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            stored = store.get(argument_id)
            candidate = stored.candidate(candidate_id)
        except UnknownArgument as exc:
            return _error(404, str(exc.args[0]))
        if candidate.status is not CandidateStatus.PROPOSED:
            return _error(
                409,
                f"candidate {candidate_id!r} already decided "
                f"({candidate.status.value})",
            )
        if body.action == "Refine" and not (body.edited_text or "").strip():
            return _error(422, "Refine requires edited_text")
        graft_text = (
            body.edited_text if body.action == "Refine" else candidate.text
        )
        if body.action in ("Accept", "Refine"):
            findings = check_text(candidate.kind, graft_text or "", candidate_id)
            if findings:
                return _error(
                    422,
                    "text fails the semantic rules for its kind",
                    diagnostics=[f.to_json_dict() for f in findings],
                )

        def transition(current: StoredArgument) -> StoredArgument:
            live = current.candidate(candidate_id)
            if live.status is not CandidateStatus.PROPOSED:
                raise RevisionConflict(current.revision)
            return apply_decision(current, candidate_id, body.action, body.edited_text)

        try:
            updated = store.mutate(argument_id, transition, expected_revision=expected)
        except RevisionConflict as exc:
            return _error(409, str(exc), revision=exc.current_revision)
        if body.action in ("Accept", "Refine"):
            introduced = new_structural_findings(stored.argument, updated.argument)
            if introduced:  # graft guards make this unreachable; belt and braces
                return _error(
                    500,
                    "decision introduced structural findings: "
                    + ", ".join(introduced),
                )
        return JSONResponse(
            {
                "revision": updated.revision,
                "argument": updated.argument.to_json_dict(),
                "candidate": updated.candidate(candidate_id).to_json_dict(),
            },
            headers=_etag(updated.revision),
        )

    @app.get("/arguments/{argument_id}/log")
    def get_log(argument_id: str) -> JSONResponse:
        try:
            stored = store.get(argument_id)
        except UnknownArgument:
            return _error(404, f"no argument {argument_id!r}")
        return JSONResponse(
            [d.to_json_dict() for d in stored.decision_log],
            headers=_etag(stored.revision),
        )

    return app
