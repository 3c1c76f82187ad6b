"""Internal reasoning: sub-query generation and final answer synthesis.

A think step makes two backend calls — generate one needed sub-query, then
answer it from the rendered memory and the model's own knowledge — and never
touches the retriever. Answer synthesis is a single call over the full
memory.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backend.base import CallTag, CompletionRequest, LlmBackend, TokenUsage
from .errors import EmptyAnswerError, EmptySubAnswerError, EmptySubQueryError
from .memory import ThoughtPair, WorkingMemory, render_memory
from .prompts import PromptSet


@dataclass(frozen=True)
class ThinkOutcome:
    thought: ThoughtPair
    usage: TokenUsage
    raw_responses: tuple[str, str]
    call_usages: tuple[TokenUsage, TokenUsage]


@dataclass(frozen=True)
class FinalAnswer:
    text: str
    usage: TokenUsage


def think(
    backend: LlmBackend,
    memory: WorkingMemory,
    question: str,
    *,
    prompts: PromptSet,
    temperature: float = 0.7,
    seeds: tuple[int, int] = (0, 1),
    max_tokens: int = 512,
) -> ThinkOutcome:
    memory.question_text()
    memory_text = render_memory(memory)

    sq_request = CompletionRequest(
        prompt=prompts.sub_query_prompt(question, memory_text),
        tag=CallTag.SUB_QUERY,
        temperature=temperature,
        seed=seeds[0],
        max_tokens=max_tokens,
    )
    sq_completion = backend.complete(sq_request)
    sub_query = sq_completion.text.strip()
    if not sub_query:
        raise EmptySubQueryError("sub-query generation produced blank text")

    sa_request = CompletionRequest(
        prompt=prompts.sub_answer_prompt(question, memory_text, sub_query),
        tag=CallTag.SUB_ANSWER,
        temperature=temperature,
        seed=seeds[1],
        max_tokens=max_tokens,
    )
    sa_completion = backend.complete(sa_request)
    sub_answer = sa_completion.text.strip()
    if not sub_answer:
        raise EmptySubAnswerError("sub-answer generation produced blank text")

    return ThinkOutcome(
        thought=ThoughtPair(sub_query=sub_query, sub_answer=sub_answer),
        usage=sq_completion.usage + sa_completion.usage,
        raw_responses=(sq_completion.text, sa_completion.text),
        call_usages=(sq_completion.usage, sa_completion.usage),
    )


def answer(
    backend: LlmBackend,
    memory: WorkingMemory,
    question: str,
    *,
    prompts: PromptSet,
    temperature: float = 0.7,
    seed: int = 0,
    max_tokens: int = 512,
) -> FinalAnswer:
    """Synthesize the final answer from whatever the memory holds (at minimum
    the bare question, which is the no-retrieval baseline path)."""
    memory_text = render_memory(memory)
    request = CompletionRequest(
        prompt=prompts.final_answer_prompt(question, memory_text),
        tag=CallTag.FINAL_ANSWER,
        temperature=temperature,
        seed=seed,
        max_tokens=max_tokens,
    )
    completion = backend.complete(request)
    text = completion.text.strip()
    if not text:
        raise EmptyAnswerError("answer synthesis produced blank text")
    return FinalAnswer(text=text, usage=completion.usage)
