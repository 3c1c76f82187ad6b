"""Completion contract shared by every LLM backend."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol

from ..errors import AceError


class CallTag(enum.Enum):
    """What a completion call is for; recorded in traces and matched by rules."""

    DECIDE = "decide"
    SUB_QUERY = "sub_query"
    SUB_ANSWER = "sub_answer"
    FINAL_ANSWER = "final_answer"


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int
    completion_tokens: int

    def __post_init__(self) -> None:
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise AceError("token counts must be non-negative")

    @property
    def total(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            self.prompt_tokens + other.prompt_tokens,
            self.completion_tokens + other.completion_tokens,
        )

    @classmethod
    def zero(cls) -> "TokenUsage":
        return cls(0, 0)


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    tag: CallTag
    temperature: float = 0.0
    seed: int = 0
    max_tokens: int = 512

    def __post_init__(self) -> None:
        if not self.prompt:
            raise AceError("completion prompt must be non-empty")
        if self.temperature < 0:
            raise AceError("temperature must be non-negative")
        if self.max_tokens < 1:
            raise AceError("max_tokens must be positive")


@dataclass(frozen=True)
class Completion:
    text: str
    usage: TokenUsage


class LlmBackend(Protocol):
    def complete(self, request: CompletionRequest) -> Completion: ...


def count_tokens(text: str) -> int:
    """Whitespace token count; the fallback when a provider reports no usage."""
    return len(text.split())
