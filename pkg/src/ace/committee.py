"""Per-agent action decisions and their aggregation by majority vote.

Each of the k committee members independently answers the decision prompt
over the same question and rendered memory, differing only in sampling seed.
The round's action is the strict majority; an exact tie falls back to
RETRIEVE (gathering evidence is the conservative failure mode).
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .backend.base import CallTag, CompletionRequest, LlmBackend, TokenUsage
from .errors import BackendError, CommitteeError, EmptyVotesError
from .memory import Action, WorkingMemory, render_memory
from .prompts import PromptSet

DEFAULT_COMMITTEE_SIZE = 5


@dataclass(frozen=True)
class Vote:
    agent_id: int
    action: Action
    raw_response: str
    usage: TokenUsage
    parsed: bool = True


@dataclass(frozen=True)
class CommitteeConfig:
    k: int = DEFAULT_COMMITTEE_SIZE
    sampling_temperature: float = 0.7
    agent_seeds: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("committee size must be at least 1")
        if self.sampling_temperature < 0:
            raise ValueError("sampling temperature must be non-negative")
        if not self.agent_seeds:
            object.__setattr__(self, "agent_seeds", tuple(range(self.k)))
        if len(self.agent_seeds) != self.k:
            raise ValueError("need exactly one seed per agent")

    @classmethod
    def from_seed(cls, k: int = DEFAULT_COMMITTEE_SIZE, temperature: float = 0.7, base_seed: int = 0) -> "CommitteeConfig":
        return cls(k=k, sampling_temperature=temperature, agent_seeds=tuple(base_seed + j for j in range(k)))


def parse_decision(text: str) -> tuple[Action, bool]:
    """Scan a response for the two action labels, case-insensitively.

    Exactly one label present parses to that action; both or neither defaults
    to RETRIEVE with the parsed flag cleared, so a malformed response never
    kills an episode.
    """
    lowered = text.casefold()
    saw_retrieve = "retrieve" in lowered
    saw_think = "think" in lowered
    if saw_retrieve and not saw_think:
        return Action.RETRIEVE, True
    if saw_think and not saw_retrieve:
        return Action.THINK, True
    return Action.RETRIEVE, False


def agent_vote(
    backend: LlmBackend,
    memory: WorkingMemory,
    question: str,
    agent_id: int,
    *,
    seed: int,
    temperature: float,
    prompts: PromptSet,
    max_tokens: int = 512,
) -> Vote:
    memory.question_text()  # memory must contain its question item
    prompt = prompts.decide_prompt(question, render_memory(memory))
    request = CompletionRequest(
        prompt=prompt, tag=CallTag.DECIDE, temperature=temperature, seed=seed, max_tokens=max_tokens
    )
    completion = backend.complete(request)
    action, parsed = parse_decision(completion.text)
    return Vote(
        agent_id=agent_id,
        action=action,
        raw_response=completion.text,
        usage=completion.usage,
        parsed=parsed,
    )


def collect_votes(
    backend: LlmBackend,
    memory: WorkingMemory,
    question: str,
    config: CommitteeConfig,
    *,
    prompts: PromptSet,
    max_tokens: int = 512,
    max_workers: int = 1,
) -> list[Vote]:
    """One vote per agent, ordered by agent id.

    Agent calls are independent and may run concurrently; on a failure the
    raised error carries whichever votes completed, for tracing.
    """

    def _one(agent_id: int) -> Vote:
        return agent_vote(
            backend,
            memory,
            question,
            agent_id,
            seed=config.agent_seeds[agent_id],
            temperature=config.sampling_temperature,
            prompts=prompts,
            max_tokens=max_tokens,
        )

    if max_workers <= 1 or config.k == 1:
        votes: list[Vote] = []
        for agent_id in range(config.k):
            try:
                votes.append(_one(agent_id))
            except BackendError as exc:
                raise CommitteeError(f"agent {agent_id}: {exc}", votes=votes) from exc
        return votes

    results: list[Vote | None] = [None] * config.k
    failure: tuple[int, BackendError] | None = None
    with ThreadPoolExecutor(max_workers=min(max_workers, config.k)) as pool:
        futures = {pool.submit(_one, agent_id): agent_id for agent_id in range(config.k)}
        for future, agent_id in futures.items():
            try:
                results[agent_id] = future.result()
            except BackendError as exc:
                if failure is None:
                    failure = (agent_id, exc)
    if failure is not None:
        agent_id, exc = failure
        partial = [v for v in results if v is not None]
        raise CommitteeError(f"agent {agent_id}: {exc}", votes=partial) from exc
    return [v for v in results if v is not None]


def majority_vote(votes: list[Vote] | tuple[Vote, ...], tie_break: Action = Action.RETRIEVE) -> Action:
    """The action with strictly more votes; exact ties go to ``tie_break``."""
    if not votes:
        raise EmptyVotesError("cannot take a majority of zero votes")
    counts = Counter(v.action for v in votes)
    think = counts.get(Action.THINK, 0)
    retrieve = counts.get(Action.RETRIEVE, 0)
    if think > retrieve:
        return Action.THINK
    if retrieve > think:
        return Action.RETRIEVE
    return tie_break
