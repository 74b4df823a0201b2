"""Chat-completion access with a hard determinism contract.

A :class:`PromptRequest` fixes everything that may influence a response:
both prompt texts, the RNG seed, the temperature and the model name. Its
canonical JSON form (sorted keys, no whitespace) is byte-identical for
equal requests, and its SHA-256 fingerprint keys every fixture store.

Three provider flavours implement the same ``complete`` contract:

* :class:`LiveProvider` speaks a chat-completion HTTP API and reads its
  endpoint and credential from the environment; the credential never
  appears in any request or transcript object.
* :class:`ReplayProvider` answers strictly from a recorded transcript and
  raises on any request it has not seen, which is what catches prompt
  drift in CI.
* :class:`CannedProvider` serves a fixture map, with an optional fallback
  synthesizer for fully offline demo runs.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Mapping, Protocol

if TYPE_CHECKING:
    from .session import Transcript

DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
ENDPOINT_ENV = "EAKIT_ENDPOINT"
API_KEY_ENV = "EAKIT_API_KEY"


class ProviderError(RuntimeError):
    """Transport, auth or fixture-miss failure while completing a request."""

    def __init__(self, message: str, question_id: str | None = None) -> None:
        super().__init__(message)
        self.question_id = question_id


@dataclass(frozen=True)
class PromptRequest:
    """One fully pinned chat request."""

    system: str
    user: str
    seed: int
    temperature: float
    model: str

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "system": self.system,
            "user": self.user,
            "seed": self.seed,
            "temperature": self.temperature,
            "model": self.model,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping[str, Any]) -> "PromptRequest":
        return cls(
            system=data["system"],
            user=data["user"],
            seed=int(data["seed"]),
            temperature=float(data["temperature"]),
            model=data["model"],
        )

    def canonical_json(self) -> str:
        """Byte-stable serialisation: equal requests, equal bytes."""
        return json.dumps(
            self.to_json_dict(),
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


class ChatProvider(Protocol):
    """Anything that can turn a pinned request into response text."""

    def complete(self, request: PromptRequest) -> str: ...


class CannedProvider:
    """Fixture map keyed by request fingerprint.

    ``fallback``, when given, synthesises a response for unmapped
    requests; without it an unmapped request is an error. Deterministic as
    long as the fallback is.
    """

    def __init__(
        self,
        responses: Mapping[str, str] | None = None,
        fallback: Callable[[PromptRequest], str] | None = None,
    ) -> None:
        self._responses = dict(responses or {})
        self._fallback = fallback

    def add(self, request: PromptRequest, response: str) -> None:
        self._responses[request.fingerprint()] = response

    def complete(self, request: PromptRequest) -> str:
        fingerprint = request.fingerprint()
        if fingerprint in self._responses:
            return self._responses[fingerprint]
        if self._fallback is not None:
            return self._fallback(request)
        raise ProviderError(
            f"canned provider has no response for request {fingerprint[:12]}"
        )


class ReplayProvider:
    """Replays a recorded transcript; any unseen request is prompt drift."""

    def __init__(self, transcript: "Transcript") -> None:
        self._responses = {
            entry.request.fingerprint(): entry.response_text
            for entry in transcript.entries
        }

    def complete(self, request: PromptRequest) -> str:
        fingerprint = request.fingerprint()
        try:
            return self._responses[fingerprint]
        except KeyError:
            raise ProviderError(
                "request not present in replay transcript (prompt drift?): "
                f"{fingerprint[:12]}"
            ) from None


class LiveProvider:
    """Chat-completion HTTP provider.

    Endpoint and credential come from configuration; the credential is
    used only in the transport header and never stored. ``complete`` is
    safe to call from multiple threads (one HTTP call per invocation, no
    shared mutable state).
    """

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        timeout: float = 60.0,
    ) -> None:
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV, DEFAULT_ENDPOINT)
        self._api_key = api_key or os.environ.get(API_KEY_ENV)
        self.timeout = timeout

    def complete(self, request: PromptRequest) -> str:
        import httpx

        if not self._api_key:
            raise ProviderError(
                f"no API credential configured (set {API_KEY_ENV})"
            )
        payload = {
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "seed": request.seed,
            "temperature": request.temperature,
        }
        try:
            response = httpx.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self._api_key}"},
                timeout=self.timeout,
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except ProviderError:
            raise
        except Exception as exc:
            raise ProviderError(f"chat completion failed: {exc}") from exc
