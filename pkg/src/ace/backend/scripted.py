"""Deterministic rule-driven backend for tests and offline benchmarks.

A rule set maps (tag, prompt substring or regex, optional seed) to a fixed
response and token usage. The first matching rule wins; when nothing matches,
the set's default response is returned with whitespace-count usage. Identical
requests always yield identical completions.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..errors import RuleSetError
from .base import CallTag, Completion, CompletionRequest, TokenUsage, count_tokens


@dataclass(frozen=True)
class ScriptedRule:
    response: str
    tag: CallTag | None = None
    match: str | None = None
    pattern: str | None = None
    seed: int | None = None
    usage: TokenUsage | None = None
    _compiled: re.Pattern[str] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.match is not None and self.pattern is not None:
            raise RuleSetError("a rule may carry 'match' or 'pattern', not both")
        if self.pattern is not None:
            try:
                object.__setattr__(self, "_compiled", re.compile(self.pattern))
            except re.error as exc:
                raise RuleSetError(f"bad rule pattern {self.pattern!r}: {exc}") from exc

    def matches(self, request: CompletionRequest) -> bool:
        if self.tag is not None and request.tag is not self.tag:
            return False
        if self.seed is not None and request.seed != self.seed:
            return False
        if self.match is not None and self.match not in request.prompt:
            return False
        if self._compiled is not None and not self._compiled.search(request.prompt):
            return False
        return True


@dataclass(frozen=True)
class ScriptedRuleSet:
    rules: tuple[ScriptedRule, ...]
    default_response: str = ""


class ScriptedBackend:
    """First matching rule wins; safe for concurrent use."""

    def __init__(self, rule_set: ScriptedRuleSet):
        self.rule_set = rule_set
        self._lock = threading.Lock()
        self.calls: list[CompletionRequest] = []

    def complete(self, request: CompletionRequest) -> Completion:
        with self._lock:
            self.calls.append(request)
        for rule in self.rule_set.rules:
            if rule.matches(request):
                usage = rule.usage or TokenUsage(count_tokens(request.prompt), count_tokens(rule.response))
                return Completion(text=rule.response, usage=usage)
        text = self.rule_set.default_response
        return Completion(text=text, usage=TokenUsage(count_tokens(request.prompt), count_tokens(text)))

    def reset_calls(self) -> None:
        with self._lock:
            self.calls.clear()


_RULE_KEYS = {"tag", "match", "pattern", "seed", "response", "prompt_tokens", "completion_tokens"}


def parse_rules(lines: Iterable[str]) -> ScriptedRuleSet:
    """Parse a line-delimited rule stream.

    Each line is one JSON object: either a rule ({tag?, match?|pattern?,
    seed?, response, prompt_tokens?, completion_tokens?}) or the special
    record {"default_response": ...}.
    """
    rules: list[ScriptedRule] = []
    default_response = ""
    for line_number, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RuleSetError(f"line {line_number}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise RuleSetError(f"line {line_number}: expected an object")
        if "default_response" in record:
            if not isinstance(record["default_response"], str):
                raise RuleSetError(f"line {line_number}: default_response must be a string")
            default_response = record["default_response"]
            continue
        unknown = set(record) - _RULE_KEYS
        if unknown:
            raise RuleSetError(f"line {line_number}: unknown keys {sorted(unknown)}")
        if "response" not in record or not isinstance(record["response"], str):
            raise RuleSetError(f"line {line_number}: rule needs a string 'response'")
        tag = None
        if "tag" in record:
            try:
                tag = CallTag(record["tag"])
            except ValueError as exc:
                raise RuleSetError(f"line {line_number}: unknown tag {record['tag']!r}") from exc
        usage = None
        has_pt = "prompt_tokens" in record
        has_ct = "completion_tokens" in record
        if has_pt != has_ct:
            raise RuleSetError(f"line {line_number}: prompt_tokens and completion_tokens must come together")
        if has_pt:
            if not isinstance(record["prompt_tokens"], int) or not isinstance(record["completion_tokens"], int):
                raise RuleSetError(f"line {line_number}: token counts must be integers")
            usage = TokenUsage(record["prompt_tokens"], record["completion_tokens"])
        seed = record.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise RuleSetError(f"line {line_number}: seed must be an integer")
        try:
            rules.append(
                ScriptedRule(
                    response=record["response"],
                    tag=tag,
                    match=record.get("match"),
                    pattern=record.get("pattern"),
                    seed=seed,
                    usage=usage,
                )
            )
        except RuleSetError as exc:
            raise RuleSetError(f"line {line_number}: {exc}") from exc
    return ScriptedRuleSet(rules=tuple(rules), default_response=default_response)


def load_rules(path: str | Path) -> ScriptedRuleSet:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise RuleSetError(f"cannot read rule file {str(path)!r}: {exc}") from exc
    return parse_rules(text.splitlines())
