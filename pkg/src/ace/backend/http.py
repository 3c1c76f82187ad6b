"""Chat-completion HTTP client with retry, backoff, and usage accounting.

Targets any endpoint that speaks the common ``POST <base>/chat/completions``
shape. Transient failures (connection errors, timeouts, 429 and 5xx) are
retried with capped exponential backoff; other non-success statuses fail
immediately. When the provider omits usage, whitespace token counts fill in.
"""

from __future__ import annotations

import os
import threading
import time

import requests

from ..errors import ConfigError, ProviderStatusError, TransportError
from .base import Completion, CompletionRequest, TokenUsage, count_tokens

ENV_API_BASE = "ACE_API_BASE"
ENV_API_KEY = "ACE_API_KEY"
ENV_MODEL = "ACE_MODEL"

_RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})


class HttpBackend:
    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        *,
        timeout: float = 60.0,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        backoff_cap: float = 8.0,
        max_in_flight: int | None = None,
    ):
        if not base_url or not model:
            raise ConfigError("HTTP backend needs a base URL and a model name")
        if max_attempts < 1:
            raise ConfigError("max_attempts must be at least 1")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._gate = threading.BoundedSemaphore(max_in_flight) if max_in_flight else None
        self._session = requests.Session()

    @classmethod
    def from_env(cls, **kwargs) -> "HttpBackend":
        base = os.environ.get(ENV_API_BASE, "")
        model = os.environ.get(ENV_MODEL, "")
        if not base or not model:
            raise ConfigError(f"set {ENV_API_BASE} and {ENV_MODEL} to use the HTTP backend")
        return cls(base, model, api_key=os.environ.get(ENV_API_KEY), **kwargs)

    def complete(self, request: CompletionRequest) -> Completion:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "seed": request.seed,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(min(self.backoff_base * 2 ** (attempt - 1), self.backoff_cap))
            try:
                if self._gate:
                    with self._gate:
                        response = self._post(payload, headers)
                else:
                    response = self._post(payload, headers)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                continue
            if response.status_code in _RETRYABLE_STATUSES:
                last_error = ProviderStatusError(
                    f"provider returned {response.status_code}", response.status_code
                )
                continue
            if response.status_code != 200:
                raise ProviderStatusError(
                    f"provider returned {response.status_code}: {response.text[:200]}",
                    response.status_code,
                )
            return self._parse(request, response)

        if isinstance(last_error, ProviderStatusError):
            raise last_error
        raise TransportError(
            f"request failed after {self.max_attempts} attempts: {last_error}"
        ) from last_error

    def _post(self, payload: dict, headers: dict) -> requests.Response:
        return self._session.post(
            f"{self.base_url}/chat/completions", json=payload, headers=headers, timeout=self.timeout
        )

    def _parse(self, request: CompletionRequest, response: requests.Response) -> Completion:
        try:
            body = response.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderStatusError(f"malformed provider response: {exc}", response.status_code) from exc
        if not isinstance(text, str):
            raise ProviderStatusError("provider returned non-string content", response.status_code)
        usage = body.get("usage") or {}
        prompt_tokens = usage.get("prompt_tokens")
        completion_tokens = usage.get("completion_tokens")
        if isinstance(prompt_tokens, int) and isinstance(completion_tokens, int):
            return Completion(text=text, usage=TokenUsage(prompt_tokens, completion_tokens))
        return Completion(
            text=text, usage=TokenUsage(count_tokens(request.prompt), count_tokens(text))
        )
