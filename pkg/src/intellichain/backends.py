"""Completion backends: a remote chat-completions client and a deterministic
scripted stand-in used by the test harness and the offline demo."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import httpx

from .errors import BackendFailure, MalformedResponse

API_KEY_ENV = "INTELLICHAIN_API_KEY"
BASE_URL_ENV = "INTELLICHAIN_BASE_URL"

DEFAULT_TEMPERATURE = 0.2
DEFAULT_MAX_TOKENS = 512

_VALID_MESSAGE_ROLES = {"system", "user", "assistant"}


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[tuple[str, str], ...]
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0][0] != "system":
            raise ValueError("first message must have role 'system'")
        for role, _ in self.messages:
            if role not in _VALID_MESSAGE_ROLES:
                raise ValueError(f"unknown message role {role!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    def last_user_content(self) -> str:
        for role, content in reversed(self.messages):
            if role == "user":
                return content
        return ""


class CompletionBackend:
    """Abstract capability: turn a CompletionRequest into response text."""

    def complete(self, request: CompletionRequest) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class KeywordRule:
    keyword: str
    response: str


class ScriptedBackend(CompletionBackend):
    """Fully deterministic backend.

    Either replays an ordered response script (exhaustion is an error, never
    silent recycling) or answers with the first keyword rule whose keyword
    occurs in the last user message.
    """

    def __init__(
        self,
        script: list[str] | None = None,
        rules: list[KeywordRule] | None = None,
        default: str | None = None,
    ):
        if script is None and rules is None:
            raise ValueError("a ScriptedBackend needs a script or keyword rules")
        self._script = list(script) if script is not None else None
        self._cursor = 0
        self._rules = list(rules) if rules is not None else []
        self._default = default

    def complete(self, request: CompletionRequest) -> str:
        if self._script is not None:
            if self._cursor >= len(self._script):
                raise BackendFailure("scripted backend exhausted its response script")
            response = self._script[self._cursor]
            self._cursor += 1
            return response
        content = request.last_user_content()
        for rule in self._rules:
            if rule.keyword in content:
                return rule.response
        if self._default is not None:
            return self._default
        raise BackendFailure("no keyword rule matched the request")


@dataclass
class RemoteBackend(CompletionBackend):
    """Client for the standard chat-completions wire protocol.

    Base URL and credential come from INTELLICHAIN_BASE_URL and
    INTELLICHAIN_API_KEY unless given explicitly. A custom httpx transport can
    be injected for testing against a stub.
    """

    model: str
    base_url: str | None = None
    api_key: str | None = None
    timeout: float = 30.0
    transport: httpx.BaseTransport | None = field(default=None, repr=False)

    def complete(self, request: CompletionRequest) -> str:
        base_url = self.base_url or os.environ.get(BASE_URL_ENV)
        if not base_url:
            raise BackendFailure(f"no base URL configured (set {BASE_URL_ENV})")
        api_key = self.api_key or os.environ.get(API_KEY_ENV, "")
        body = {
            "model": self.model,
            "messages": [{"role": role, "content": content} for role, content in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        try:
            with httpx.Client(transport=self.transport, timeout=self.timeout) as client:
                response = client.post(
                    base_url.rstrip("/") + "/chat/completions", json=body, headers=headers
                )
        except httpx.HTTPError as exc:
            raise BackendFailure(f"transport error: {exc}") from exc
        if response.status_code != 200:
            raise BackendFailure(f"backend returned HTTP {response.status_code}: {response.text[:200]}")
        try:
            payload = response.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response shape: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponse("message content is not a string")
        return content
