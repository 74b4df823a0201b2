"""Command-line front end.

Subcommands: validate, coverage, ask, generate, mitigate, eval, serve.
stdout carries machine-readable output only (JSON, or JSON lines for
diagnostics); anything meant for humans goes to stderr. Exit codes are a
stable contract:

    0   success, no error-severity findings
    1   error-severity diagnostics found
    2   usage or input error (unreadable file, bad bank, bad flags)
    3   provider or transport failure

Settings resolve as flags over environment (``EAKIT_*``) over a JSON
config file (``--config`` or ``EAKIT_CONFIG``) over defaults. All
commands are deterministic under the canned and replay providers, so CI
never needs the network.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from enum import IntEnum
from pathlib import Path
from typing import Any, Sequence

from . import prose, rules, stats
from .llm.bank import (
    BadFormat,
    CountMismatch,
    QuestionCategory,
    default_question_bank,
    load_question_bank,
)
from .llm.generation import (
    EmptyResponse,
    GenerationOptions,
    KindMismatch,
    NotADefeater,
    build_defeater_prompt,
    defeater_kind_from_name,
    generate_mitigation,
    parse_defeater_response,
)
from .llm.providers import ChatProvider, LiveProvider, ProviderError, ReplayProvider
from .llm.session import (
    SessionSettings,
    Transcript,
    offline_demo_provider,
    run_proficiency_session,
)
from .model import EaArgument, EaModelError, UnknownId
from .prose import KIND_TO_NAME


class ExitStatus(IntEnum):
    OK = 0
    FINDINGS = 1
    USAGE = 2
    PROVIDER = 3


_ENV_PREFIX = "EAKIT_"
_DEFAULTS: dict[str, Any] = {
    "provider": "canned",
    "seed": 42,
    "temperature": 0.0,
    "model": "gpt-4-turbo",
    "data_dir": "eakit-data",
}


def _chatter(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(payload: Any) -> None:
    print(json.dumps(payload, ensure_ascii=False))


def _load_config(path: str | None) -> dict[str, Any]:
    config_path = path or os.environ.get(_ENV_PREFIX + "CONFIG")
    if not config_path:
        return {}
    try:
        return json.loads(Path(config_path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SystemExit(f"cannot read config file {config_path!r}: {exc}")


def _setting(args: argparse.Namespace, config: dict[str, Any], key: str) -> Any:
    flag_value = getattr(args, key, None)
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(_ENV_PREFIX + key.upper())
    if env_value is not None:
        return env_value
    if key in config:
        return config[key]
    return _DEFAULTS.get(key)


def _session_settings(args: argparse.Namespace, config: dict[str, Any]) -> SessionSettings:
    return SessionSettings(
        seed=int(_setting(args, config, "seed")),
        temperature=float(_setting(args, config, "temperature")),
        model=str(_setting(args, config, "model")),
    )


def _provider(
    args: argparse.Namespace, config: dict[str, Any]
) -> tuple[ChatProvider, str]:
    mode = str(_setting(args, config, "provider"))
    if mode == "canned":
        return offline_demo_provider(), mode
    if mode == "replay":
        transcript_path = getattr(args, "transcript", None)
        if not transcript_path:
            raise SystemExit("replay provider requires --transcript PATH")
        return ReplayProvider(Transcript.load(transcript_path)), mode
    if mode == "live":
        return (
            LiveProvider(
                endpoint=config.get("endpoint"), api_key=config.get("api_key")
            ),
            mode,
        )
    raise SystemExit(f"unknown provider {mode!r}; expected live, replay or canned")


def _read_document(path: str) -> EaArgument | None:
    """Parse a prose file; on failure print the errors and return None."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _chatter(f"cannot read {path!r}: {exc}")
        return None
    result = prose.parse(text)
    if not result.ok:
        for error in result.errors:
            _emit(error.to_json_dict())
        return None
    return result.argument


# -- subcommands -----------------------------------------------------------


def cmd_validate(args: argparse.Namespace, config: dict[str, Any]) -> int:
    argument = _read_document(args.path)
    if argument is None:
        return ExitStatus.USAGE
    findings = rules.validate(argument)
    for finding in findings:
        if args.format == "text":
            print(str(finding))
        else:
            _emit(finding.to_json_dict())
    has_errors = any(f.severity is rules.Severity.ERROR for f in findings)
    return ExitStatus.FINDINGS if has_errors else ExitStatus.OK


def cmd_coverage(args: argparse.Namespace, config: dict[str, Any]) -> int:
    argument = _read_document(args.path)
    if argument is None:
        return ExitStatus.USAGE
    try:
        report = rules.coverage(argument)
    except rules.PreconditionViolated as exc:
        _emit({"error": str(exc)})
        return ExitStatus.FINDINGS
    _emit(report.to_json_dict())
    return ExitStatus.OK


def cmd_ask(args: argparse.Namespace, config: dict[str, Any]) -> int:
    try:
        bank = (
            load_question_bank(args.bank) if args.bank else default_question_bank()
        )
    except (BadFormat, CountMismatch, OSError) as exc:
        _chatter(f"bad question bank: {exc}")
        return ExitStatus.USAGE
    try:
        provider, mode = _provider(args, config)
        transcript = run_proficiency_session(
            bank, provider, _session_settings(args, config)
        )
    except ProviderError as exc:
        _chatter(f"provider failure: {exc}")
        return ExitStatus.PROVIDER
    transcript.save(args.out)
    counts = {
        category.count_key: sum(1 for q in bank if q.category is category)
        for category in QuestionCategory
    }
    _emit({**counts, "total": len(bank), "transcript": str(args.out)})
    _chatter(f"wrote {len(transcript.entries)} entries to {args.out} ({mode} provider)")
    return ExitStatus.OK


def cmd_generate(args: argparse.Namespace, config: dict[str, Any]) -> int:
    argument = _read_document(args.path)
    if argument is None:
        return ExitStatus.USAGE
    options = GenerationOptions(
        chain_of_thought=not args.no_chain_of_thought,
        rule_library=not args.no_rule_library,
        n_candidates=args.count,
    )
    try:
        kind = defeater_kind_from_name(args.kind)
        prompt = build_defeater_prompt(
            argument, args.target, kind, options, _session_settings(args, config)
        )
    except (KindMismatch, UnknownId) as exc:
        _chatter(str(exc))
        return ExitStatus.USAGE
    try:
        provider, _ = _provider(args, config)
        response = provider.complete(prompt)
        candidates = parse_defeater_response(response, kind, args.target)
    except (ProviderError, EmptyResponse) as exc:
        _chatter(f"provider failure: {exc}")
        return ExitStatus.PROVIDER

    fragment_lines = [
        f"{c.id} [{KIND_TO_NAME[c.kind]}]: {c.text}" for c in candidates
    ] + [f"{args.target} -> {c.id}" for c in candidates]
    fragment = "\n".join(fragment_lines) + "\n" if fragment_lines else ""
    if args.format == "text":
        print(fragment, end="")
    else:
        _emit(
            {
                "target": args.target,
                "kind": kind.value,
                "candidates": [c.to_json_dict() for c in candidates],
                "fragment": fragment,
            }
        )
    return ExitStatus.OK


def cmd_mitigate(args: argparse.Namespace, config: dict[str, Any]) -> int:
    argument = _read_document(args.path)
    if argument is None:
        return ExitStatus.USAGE
    try:
        provider, _ = _provider(args, config)
        result = generate_mitigation(
            argument, args.defeater, provider, _session_settings(args, config)
        )
    except (UnknownId, NotADefeater) as exc:
        _chatter(str(exc))
        return ExitStatus.USAGE
    except ProviderError as exc:
        _chatter(f"provider failure: {exc}")
        return ExitStatus.PROVIDER
    if args.format == "text":
        print(result.patch, end="")
        _chatter(result.narrative)
        if result.note:
            _chatter(result.note)
    else:
        _emit(result.to_json_dict())
    return ExitStatus.OK


def cmd_eval(args: argparse.Namespace, config: dict[str, Any]) -> int:
    try:
        matrix = stats.read_ratings_csv(args.ratings)
        bank = (
            load_question_bank(args.bank) if args.bank else default_question_bank()
        )
        agreement = stats.rater_agreement(matrix)
        category_report = stats.aggregate(matrix, bank)
        grade = stats.grade_band(category_report.overall)
    except (stats.StatsError, BadFormat, CountMismatch, OSError, ValueError) as exc:
        _chatter(f"bad input: {exc}")
        return ExitStatus.USAGE
    report = {
        "tau_b": agreement.tau_b,
        "ci": [agreement.ci_low, agreement.ci_high],
        "percent": agreement.percent,
        **category_report.to_json_dict(),
        "grade": grade,
    }
    _emit(report)
    return ExitStatus.OK


def cmd_serve(args: argparse.Namespace, config: dict[str, Any]) -> int:
    import uvicorn

    from .service.app import create_app
    from .service.store import FileStore

    provider, mode = _provider(args, config)
    store = FileStore(str(_setting(args, config, "data_dir")))
    app = create_app(store, provider, _session_settings(args, config))
    _chatter(
        f"serving on {args.host}:{args.port} (data: {store.data_dir}, "
        f"provider: {mode})"
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return ExitStatus.OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format", choices=("json", "text"), default="json",
        help="stdout format (default json)",
    )
    common.add_argument("--config", help="JSON config file")
    common.add_argument(
        "--provider", choices=("live", "replay", "canned"),
        help="chat provider (default canned)",
    )
    common.add_argument("--seed", type=int, help="request seed (default 42)")
    common.add_argument("--model", help="model name (default gpt-4-turbo)")
    common.add_argument(
        "--temperature", type=float, help="sampling temperature (default 0)"
    )
    common.add_argument("--data-dir", dest="data_dir", help="service data directory")
    common.add_argument(
        "--transcript", help="transcript path (required for --provider replay)"
    )

    parser = argparse.ArgumentParser(
        prog="eakit",
        description="Author, validate and strengthen eliminative-argumentation "
        "assurance cases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="run the rule engine")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("coverage", parents=[common], help="defeater coverage report")
    p.add_argument("path")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("ask", parents=[common], help="run the proficiency session")
    p.add_argument("--bank", help="question bank JSON (default: shipped bank)")
    p.add_argument("--out", default="transcript.json", help="transcript output path")
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("generate", parents=[common], help="request defeater candidates")
    p.add_argument("path")
    p.add_argument("--target", required=True, help="element id to challenge")
    p.add_argument(
        "--kind", required=True,
        help="rebutting, undermining or undercutting",
    )
    p.add_argument("--count", type=int, default=3, help="candidates to request")
    p.add_argument("--no-chain-of-thought", action="store_true")
    p.add_argument("--no-rule-library", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("mitigate", parents=[common], help="propose a defeater resolution")
    p.add_argument("path")
    p.add_argument("--defeater", required=True, help="defeater element id")
    p.set_defaults(func=cmd_mitigate)

    p = sub.add_parser("eval", parents=[common], help="rater-agreement report")
    p.add_argument("ratings", help="CSV with question_id,rater_id,score")
    p.add_argument("--bank", help="question bank JSON (default: shipped bank)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", parents=[common], help="run the review service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8440)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return int(args.func(args, config))
    except SystemExit as exc:
        if isinstance(exc.code, str):
            _chatter(exc.code)
            return ExitStatus.USAGE
        return int(exc.code or 0)
    except EaModelError as exc:
        _chatter(str(exc))
        return ExitStatus.USAGE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
