"""The round loop: decide (or apply a policy), act, grow memory, answer.

An episode runs its full round budget, then synthesizes the answer from the
final memory. Round 0 defaults to a forced retrieval without voting — with
only the bare question in memory there is nothing to reason over yet — which
also makes a one-round episode identical to plain retrieve-then-answer.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, TextIO

from .backend.base import LlmBackend, TokenUsage
from .committee import CommitteeConfig, Vote, collect_votes, majority_vote
from .errors import AceError, CommitteeError, TraceFormatError
from .memory import (
    AceState,
    Action,
    MemoryItem,
    MemoryKind,
    WorkingMemory,
    init_memory,
    passage_item,
    thought_item,
    union_insert,
)
from .prompts import PromptSet
from .reasoner import FinalAnswer, answer, think
from .retriever.corpus import Corpus
from .retriever.index import Bm25Index, RetrievalRequest, formulate_query, retrieve

TRACE_SCHEMA = "ace-trace/1"

RetrieveFn = Callable[[Bm25Index, Corpus, RetrievalRequest], list]


class PolicyMode(enum.Enum):
    VOTE = "vote"
    ALWAYS_RETRIEVE = "always-retrieve"
    ALWAYS_THINK = "always-think"
    FIXED_SCHEDULE = "schedule"


@dataclass(frozen=True)
class EpisodePolicy:
    """How each round's action is chosen.

    ``force_first_retrieve`` applies to the vote and always-think modes; an
    explicit schedule is taken literally and always-retrieve is unaffected.
    Exact vote ties resolve to ``tie_break``.
    """

    mode: PolicyMode = PolicyMode.VOTE
    schedule: tuple[Action, ...] = ()
    force_first_retrieve: bool = True
    tie_break: Action = Action.RETRIEVE

    @classmethod
    def vote(cls, force_first_retrieve: bool = True) -> "EpisodePolicy":
        return cls(mode=PolicyMode.VOTE, force_first_retrieve=force_first_retrieve)

    @classmethod
    def always_retrieve(cls) -> "EpisodePolicy":
        return cls(mode=PolicyMode.ALWAYS_RETRIEVE)

    @classmethod
    def always_think(cls, force_first_retrieve: bool = False) -> "EpisodePolicy":
        return cls(mode=PolicyMode.ALWAYS_THINK, force_first_retrieve=force_first_retrieve)

    @classmethod
    def fixed(cls, schedule: Iterable[Action]) -> "EpisodePolicy":
        return cls(mode=PolicyMode.FIXED_SCHEDULE, schedule=tuple(schedule))


@dataclass
class EpisodeDeps:
    """Shared, read-only collaborators an episode needs."""

    backend: LlmBackend
    index: Bm25Index | None = None
    corpus: Corpus | None = None
    top_k: int = 5
    prompts: PromptSet = field(default_factory=PromptSet.default)
    temperature: float = 0.7
    seed: int = 0
    max_tokens: int = 512
    vote_workers: int = 1
    retrieve_fn: RetrieveFn = retrieve


@dataclass(frozen=True)
class RoundTrace:
    round_index: int
    votes: tuple[Vote, ...]
    action: Action
    items_added: tuple[str, ...]
    usage: TokenUsage
    executor_calls: tuple[tuple[str, TokenUsage], ...] = ()


@dataclass(frozen=True)
class EpisodeResult:
    question: str
    answer: FinalAnswer | None
    rounds: tuple[RoundTrace, ...]
    total_usage: TokenUsage
    think_count: int
    retrieve_count: int
    error: str | None = None
    failed_votes: tuple[Vote, ...] = ()


def _think_seeds(base_seed: int, round_index: int) -> tuple[int, int]:
    # keep per-round seeds disjoint from each other and from small agent seeds
    anchor = base_seed + 100_003 * (round_index + 1)
    return anchor + 1, anchor + 2


def _item_summary(item: MemoryItem) -> str:
    if item.kind is MemoryKind.PASSAGE:
        return f"passage:{item.content.doc_id}"
    if item.kind is MemoryKind.THOUGHT:
        return f"thought:{item.content.sub_query[:60]}"
    return "question"


def _choose_action(
    state: AceState,
    deps: EpisodeDeps,
    policy: EpisodePolicy,
    committee: CommitteeConfig,
) -> tuple[Action, list[Vote]]:
    if policy.mode is PolicyMode.FIXED_SCHEDULE:
        return policy.schedule[state.round_index], []
    if policy.mode is PolicyMode.ALWAYS_RETRIEVE:
        return Action.RETRIEVE, []
    if policy.force_first_retrieve and state.round_index == 0:
        return Action.RETRIEVE, []
    if policy.mode is PolicyMode.ALWAYS_THINK:
        return Action.THINK, []
    votes = collect_votes(
        deps.backend,
        state.memory,
        state.question,
        committee,
        prompts=deps.prompts,
        max_tokens=deps.max_tokens,
        max_workers=deps.vote_workers,
    )
    return majority_vote(votes, tie_break=policy.tie_break), votes


def step(
    state: AceState,
    deps: EpisodeDeps,
    *,
    policy: EpisodePolicy,
    committee: CommitteeConfig,
) -> tuple[AceState, RoundTrace]:
    """Run one decision-action round and return the advanced state."""
    if state.round_index >= state.budget:
        raise AceError("round budget exhausted")

    action, votes = _choose_action(state, deps, policy, committee)

    executor_calls: tuple[tuple[str, TokenUsage], ...] = ()
    if action is Action.RETRIEVE:
        if deps.index is None or deps.corpus is None:
            raise AceError("retrieval requested but no index/corpus configured")
        query = formulate_query(state.memory, state.question)
        passages = deps.retrieve_fn(deps.index, deps.corpus, RetrievalRequest(query, deps.top_k))
        new_items = [passage_item(p, state.round_index) for p in passages]
        executor_usage = TokenUsage.zero()
    else:
        outcome = think(
            deps.backend,
            state.memory,
            state.question,
            prompts=deps.prompts,
            temperature=deps.temperature,
            seeds=_think_seeds(deps.seed, state.round_index),
            max_tokens=deps.max_tokens,
        )
        new_items = [thought_item(outcome.thought, state.round_index)]
        executor_usage = outcome.usage
        executor_calls = (
            ("sub_query", outcome.call_usages[0]),
            ("sub_answer", outcome.call_usages[1]),
        )

    new_memory, _ = union_insert(state.memory, new_items)
    added = tuple(_item_summary(i) for i in new_memory.items[len(state.memory.items):])
    usage = sum((v.usage for v in votes), TokenUsage.zero()) + executor_usage

    trace = RoundTrace(
        round_index=state.round_index,
        votes=tuple(votes),
        action=action,
        items_added=added,
        usage=usage,
        executor_calls=executor_calls,
    )
    next_state = AceState(
        memory=new_memory,
        question=state.question,
        round_index=state.round_index + 1,
        budget=state.budget,
        committee_size=state.committee_size,
        actions_taken=state.actions_taken + (action,),
    )
    return next_state, trace


def run_episode(
    question: str,
    rounds_budget: int,
    committee: CommitteeConfig,
    policy: EpisodePolicy,
    deps: EpisodeDeps,
    *,
    early_stop: bool = False,
) -> EpisodeResult:
    """Run ``rounds_budget`` decision-action rounds, then synthesize the answer.

    A budget of zero answers directly from the bare question (the
    no-retrieval baseline). Backend or retriever failures abort the episode;
    the result then carries the completed rounds, partial token usage, and
    the error text instead of an answer.
    """
    if rounds_budget < 0:
        raise ValueError("rounds budget must be non-negative")
    if policy.mode is PolicyMode.FIXED_SCHEDULE and len(policy.schedule) != rounds_budget:
        raise ValueError("fixed schedule length must equal the rounds budget")

    memory = init_memory(question)
    state = AceState(
        memory=memory,
        question=memory.question_text(),
        round_index=0,
        budget=rounds_budget,
        committee_size=committee.k,
    )
    traces: list[RoundTrace] = []

    def _counts() -> tuple[int, int]:
        thinks = sum(1 for t in traces if t.action is Action.THINK)
        return thinks, len(traces) - thinks

    def _partial(exc: AceError) -> EpisodeResult:
        failed_votes = tuple(exc.votes) if isinstance(exc, CommitteeError) else ()
        total = sum((t.usage for t in traces), TokenUsage.zero())
        total = sum((v.usage for v in failed_votes), total)
        thinks, retrieves = _counts()
        return EpisodeResult(
            question=state.question,
            answer=None,
            rounds=tuple(traces),
            total_usage=total,
            think_count=thinks,
            retrieve_count=retrieves,
            error=str(exc),
            failed_votes=failed_votes,
        )

    for _ in range(rounds_budget):
        grew = len(state.memory)
        try:
            state, trace = step(state, deps, policy=policy, committee=committee)
        except AceError as exc:
            return _partial(exc)
        traces.append(trace)
        if early_stop and len(state.memory) == grew:
            break

    try:
        final = answer(
            deps.backend,
            state.memory,
            state.question,
            prompts=deps.prompts,
            temperature=deps.temperature,
            seed=deps.seed,
            max_tokens=deps.max_tokens,
        )
    except AceError as exc:
        return _partial(exc)

    thinks, retrieves = _counts()
    total = sum((t.usage for t in traces), TokenUsage.zero()) + final.usage
    return EpisodeResult(
        question=state.question,
        answer=final,
        rounds=tuple(traces),
        total_usage=total,
        think_count=thinks,
        retrieve_count=retrieves,
    )


# --- trace serialization ---------------------------------------------------


def _usage_dict(usage: TokenUsage) -> dict:
    return {
        "prompt_tokens": usage.prompt_tokens,
        "completion_tokens": usage.completion_tokens,
        "total": usage.total,
    }


def _vote_dict(vote: Vote) -> dict:
    return {
        "agent_id": vote.agent_id,
        "action": vote.action.value,
        "raw_response": vote.raw_response,
        "parsed": vote.parsed,
        "usage": _usage_dict(vote.usage),
    }


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def write_trace(result: EpisodeResult, sink: TextIO, qid: str | None = None) -> None:
    """Emit one record per round plus a summary record, line-delimited JSON."""
    for trace in result.rounds:
        sink.write(
            _dump(
                {
                    "schema": TRACE_SCHEMA,
                    "type": "round",
                    "qid": qid,
                    "round": trace.round_index,
                    "action": trace.action.value,
                    "votes": [_vote_dict(v) for v in trace.votes],
                    "items_added": list(trace.items_added),
                    "executor_calls": [
                        {"tag": tag, "usage": _usage_dict(u)} for tag, u in trace.executor_calls
                    ],
                    "usage": _usage_dict(trace.usage),
                }
            )
            + "\n"
        )
    sink.write(
        _dump(
            {
                "schema": TRACE_SCHEMA,
                "type": "summary",
                "qid": qid,
                "question": result.question,
                "answer": None if result.answer is None else result.answer.text,
                "answer_usage": None if result.answer is None else _usage_dict(result.answer.usage),
                "rounds": len(result.rounds),
                "think_count": result.think_count,
                "retrieve_count": result.retrieve_count,
                "total_usage": _usage_dict(result.total_usage),
                "error": result.error,
                "failed_votes": [_vote_dict(v) for v in result.failed_votes],
            }
        )
        + "\n"
    )


@dataclass(frozen=True)
class ReplayedEpisode:
    """An episode reconstructed from its trace records."""

    qid: str | None
    question: str
    answer_text: str | None
    actions: tuple[Action, ...]
    think_count: int
    retrieve_count: int
    total_usage: TokenUsage
    error: str | None


def _parse_usage(record: dict) -> TokenUsage:
    usage = TokenUsage(int(record["prompt_tokens"]), int(record["completion_tokens"]))
    if "total" in record and int(record["total"]) != usage.total:
        raise TraceFormatError("usage total does not match its parts")
    return usage


def read_trace(lines: Iterable[str]) -> Iterator[ReplayedEpisode]:
    """Rebuild episodes from trace lines, re-deriving counts and totals from
    the round records and checking them against each summary."""
    pending_rounds: list[dict] = []
    for line_number, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceFormatError(f"line {line_number}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict) or record.get("schema") != TRACE_SCHEMA:
            raise TraceFormatError(f"line {line_number}: not a {TRACE_SCHEMA} record")
        kind = record.get("type")
        if kind == "round":
            pending_rounds.append(record)
            continue
        if kind != "summary":
            raise TraceFormatError(f"line {line_number}: unknown record type {kind!r}")

        actions = tuple(Action(r["action"]) for r in pending_rounds)
        thinks = sum(1 for a in actions if a is Action.THINK)
        retrieves = len(actions) - thinks
        total = sum((_parse_usage(r["usage"]) for r in pending_rounds), TokenUsage.zero())
        if record.get("answer_usage") is not None:
            total = total + _parse_usage(record["answer_usage"])
        total = sum((_parse_usage(v["usage"]) for v in record.get("failed_votes", [])), total)

        if thinks != record["think_count"] or retrieves != record["retrieve_count"]:
            raise TraceFormatError(f"line {line_number}: summary counts disagree with round records")
        if total != _parse_usage(record["total_usage"]):
            raise TraceFormatError(f"line {line_number}: summary usage disagrees with round records")

        yield ReplayedEpisode(
            qid=record.get("qid"),
            question=record["question"],
            answer_text=record.get("answer"),
            actions=actions,
            think_count=thinks,
            retrieve_count=retrieves,
            total_usage=total,
            error=record.get("error"),
        )
        pending_rounds = []
    if pending_rounds:
        raise TraceFormatError("trace ended with round records but no summary")
