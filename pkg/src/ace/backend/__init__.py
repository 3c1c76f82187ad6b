from .base import CallTag, Completion, CompletionRequest, LlmBackend, TokenUsage, count_tokens
from .http import ENV_API_BASE, ENV_API_KEY, ENV_MODEL, HttpBackend
from .scripted import ScriptedBackend, ScriptedRule, ScriptedRuleSet, load_rules, parse_rules

__all__ = [
    "CallTag",
    "Completion",
    "CompletionRequest",
    "LlmBackend",
    "TokenUsage",
    "count_tokens",
    "HttpBackend",
    "ENV_API_BASE",
    "ENV_API_KEY",
    "ENV_MODEL",
    "ScriptedBackend",
    "ScriptedRule",
    "ScriptedRuleSet",
    "load_rules",
    "parse_rules",
]
