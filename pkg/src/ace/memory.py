"""Working memory: the ordered, deduplicated context a question accumulates.

Memory starts as the bare question and grows round by round with retrieved
passages and answered sub-queries. Items are deduplicated by a content key
computed from normalized text, so re-retrieving the same passage or
re-deriving the same thought never inflates the context.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field

from .errors import (
    AceError,
    EmptyMemoryError,
    EmptyQuestionError,
    MissingQueryItemError,
)

_FIELD_SEP = "\x1f"


class Action(enum.Enum):
    """The binary decision space: fetch external passages or reason in place."""

    RETRIEVE = "RETRIEVE"
    THINK = "THINK"


class MemoryKind(enum.Enum):
    QUERY = "query"
    PASSAGE = "passage"
    THOUGHT = "thought"


@dataclass(frozen=True)
class Passage:
    """One retrieved context unit. Score is kept for tracing only; it is
    excluded from content identity."""

    doc_id: str
    title: str
    text: str
    score: float


@dataclass(frozen=True)
class ThoughtPair:
    sub_query: str
    sub_answer: str


@dataclass(frozen=True)
class MemoryItem:
    kind: MemoryKind
    content: str | Passage | ThoughtPair
    inserted_round: int
    content_key: str


def _normalize(text: str) -> str:
    """Trim, collapse internal whitespace, casefold."""
    return " ".join(text.split()).casefold()


def content_key(kind: MemoryKind, fields: tuple[str, ...]) -> str:
    payload = _FIELD_SEP.join((kind.value, *(_normalize(f) for f in fields)))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def query_item(question: str) -> MemoryItem:
    return MemoryItem(
        kind=MemoryKind.QUERY,
        content=question,
        inserted_round=0,
        content_key=content_key(MemoryKind.QUERY, (question,)),
    )


def passage_item(passage: Passage, inserted_round: int) -> MemoryItem:
    # doc_id and score are provenance, not identity: the same text retrieved
    # twice is one context element.
    return MemoryItem(
        kind=MemoryKind.PASSAGE,
        content=passage,
        inserted_round=inserted_round,
        content_key=content_key(MemoryKind.PASSAGE, (passage.title, passage.text)),
    )


def thought_item(thought: ThoughtPair, inserted_round: int) -> MemoryItem:
    return MemoryItem(
        kind=MemoryKind.THOUGHT,
        content=thought,
        inserted_round=inserted_round,
        content_key=content_key(MemoryKind.THOUGHT, (thought.sub_query, thought.sub_answer)),
    )


@dataclass(frozen=True)
class WorkingMemory:
    """Immutable ordered item sequence with set semantics over content keys."""

    items: tuple[MemoryItem, ...]
    key_set: frozenset[str]

    def __len__(self) -> int:
        return len(self.items)

    def question_text(self) -> str:
        for item in self.items:
            if item.kind is MemoryKind.QUERY:
                return item.content  # type: ignore[return-value]
        raise MissingQueryItemError("working memory holds no question item")

    def passages(self) -> list[Passage]:
        return [i.content for i in self.items if i.kind is MemoryKind.PASSAGE]

    def thoughts(self) -> list[ThoughtPair]:
        return [i.content for i in self.items if i.kind is MemoryKind.THOUGHT]

    def latest_thought(self) -> ThoughtPair | None:
        for item in reversed(self.items):
            if item.kind is MemoryKind.THOUGHT:
                return item.content  # type: ignore[return-value]
        return None


def init_memory(question: str) -> WorkingMemory:
    """Start a fresh memory containing only the (trimmed) question."""
    trimmed = question.strip()
    if not trimmed:
        raise EmptyQuestionError("question is empty after trimming")
    item = query_item(trimmed)
    return WorkingMemory(items=(item,), key_set=frozenset((item.content_key,)))


def union_insert(
    memory: WorkingMemory, new_items: list[MemoryItem] | tuple[MemoryItem, ...]
) -> tuple[WorkingMemory, int]:
    """Append each new item whose content key is absent; drop duplicates.

    Returns the grown memory and the number of items actually inserted.
    Existing order is never disturbed.
    """
    items = list(memory.items)
    keys = set(memory.key_set)
    inserted = 0
    for item in new_items:
        if item.content_key in keys:
            continue
        items.append(item)
        keys.add(item.content_key)
        inserted += 1
    if inserted == 0:
        return memory, 0
    return WorkingMemory(items=tuple(items), key_set=frozenset(keys)), inserted


@dataclass(frozen=True)
class RenderConfig:
    question_label: str = "Question:"
    context_label: str = "Context:"
    thoughts_label: str = "Sub-queries answered:"


def render_memory(memory: WorkingMemory, section_labels: RenderConfig | None = None) -> str:
    """Render memory as prompt text: question, then passages, then thoughts.

    Output is byte-stable for identical inputs; sections without content are
    omitted entirely.
    """
    if not memory.items:
        raise EmptyMemoryError("cannot render an empty memory")
    labels = section_labels or RenderConfig()

    blocks: list[str] = [f"{labels.question_label} {memory.question_text()}"]

    passages = memory.passages()
    if passages:
        lines = [labels.context_label]
        for i, p in enumerate(passages, 1):
            lines.append(f"[{i}] {p.title}".rstrip())
            lines.append(p.text)
        blocks.append("\n".join(lines))

    thoughts = memory.thoughts()
    if thoughts:
        lines = [labels.thoughts_label]
        for i, t in enumerate(thoughts, 1):
            lines.append(f"Q{i}: {t.sub_query}")
            lines.append(f"A{i}: {t.sub_answer}")
        blocks.append("\n".join(lines))

    return "\n\n".join(blocks)


@dataclass(frozen=True)
class AceState:
    """Snapshot of one episode between rounds."""

    memory: WorkingMemory
    question: str
    round_index: int
    budget: int
    committee_size: int
    actions_taken: tuple[Action, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.round_index != len(self.actions_taken):
            raise AceError("round index out of step with actions taken")
        if self.round_index > self.budget:
            raise AceError("round index exceeds the round budget")
