"""Prompt templates for the decide / sub-query / sub-answer / answer calls.

Templates carry {Q}, {M_i} and {Q_sub} placeholders (the question, the
rendered working memory, and a generated sub-query). Defaults ship as .txt
assets next to this module; any template can be replaced through the
``prompts.*`` config keys, whose values are paths to substitute files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from ..errors import ConfigError

_PLACEHOLDER = re.compile(r"\{(Q_sub|Q|M_i)\}")

TEMPLATE_NAMES = ("decide", "sub_query", "sub_answer", "final_answer")


def _asset(name: str) -> str:
    return resources.files(__package__).joinpath(f"{name}.txt").read_text(encoding="utf-8")


def fill(template: str, **values: str) -> str:
    """Substitute placeholders in one pass (substituted text is not rescanned)."""
    mapping = {"Q": values.get("question"), "M_i": values.get("memory"), "Q_sub": values.get("sub_query")}

    def _sub(match: re.Match[str]) -> str:
        value = mapping.get(match.group(1))
        return match.group(0) if value is None else value

    return _PLACEHOLDER.sub(_sub, template)


@dataclass(frozen=True)
class PromptSet:
    decide: str
    sub_query: str
    sub_answer: str
    final_answer: str

    @classmethod
    def default(cls) -> "PromptSet":
        return cls(*(_asset(name) for name in TEMPLATE_NAMES))

    def with_overrides(self, override_paths: dict[str, str]) -> "PromptSet":
        """Replace named templates with the contents of the given files."""
        updates: dict[str, str] = {}
        for name, path in override_paths.items():
            if name not in TEMPLATE_NAMES:
                raise ConfigError(f"unknown prompt template {name!r}")
            try:
                updates[name] = Path(path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read prompt template {path!r}: {exc}") from exc
        return replace(self, **updates)

    def decide_prompt(self, question: str, memory_text: str) -> str:
        return fill(self.decide, question=question, memory=memory_text)

    def sub_query_prompt(self, question: str, memory_text: str) -> str:
        return fill(self.sub_query, question=question, memory=memory_text)

    def sub_answer_prompt(self, question: str, memory_text: str, sub_query: str) -> str:
        return fill(self.sub_answer, question=question, memory=memory_text, sub_query=sub_query)

    def final_answer_prompt(self, question: str, memory_text: str) -> str:
        return fill(self.final_answer, question=question, memory=memory_text)
