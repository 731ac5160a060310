"""The monitor-generate-verify control loop.

Each cycle reads a difficulty signal, picks the most promising activated
strategy, executes it, then verifies the outcome with a meta-strategy chosen
by the flavor of what went wrong.  The loop ends by achieving the goal or by
one of three abandonment rules: a failure streak, exhausted resources, or a
discrepancy that repeated attempts cannot reduce.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from math import inf

import numpy as np

from .errors import NoApplicableStrategy
from .experience import (ExperienceTuple, ExperienceVector, clamp01,
                         generate_experience)
from .knowledge import (KnowledgeCategory, KnowledgeItem, KnowledgeStore,
                        retrieve_probabilistic, update_knowledge)


class CycleStatus(Enum):
    ACTIVE = "active"
    TERMINATED = "terminated"
    ABANDONED = "abandoned"


class AbandonReason(Enum):
    STRATEGY_FAILURE = "strategy_failure"
    RESOURCE_EXHAUSTED = "resource_exhausted"
    IRREDUCIBLE_DISCREPANCY = "irreducible_discrepancy"


class EvaluativeSignal(Enum):
    """What the verification step noticed about the latest outcome."""

    FRAGMENTED = "fragmented"
    DOUBTFUL = "doubtful"
    UNEXPECTED = "unexpected"
    UNCERTAIN_PROGRESS = "uncertain_progress"


class MetaStrategyKind(Enum):
    """The check dispatched to interrogate an outcome."""

    COHERENCE = "coherence"
    PLAUSIBILITY = "plausibility"
    CONSISTENCY = "consistency"
    GOAL_CONDUCIVENESS = "goal_conduciveness"


# Each evaluative flavor maps to exactly one check.
_META_DISPATCH = {
    EvaluativeSignal.FRAGMENTED: MetaStrategyKind.COHERENCE,
    EvaluativeSignal.DOUBTFUL: MetaStrategyKind.PLAUSIBILITY,
    EvaluativeSignal.UNEXPECTED: MetaStrategyKind.CONSISTENCY,
    EvaluativeSignal.UNCERTAIN_PROGRESS: MetaStrategyKind.GOAL_CONDUCIVENESS,
}


@dataclass
class GoalSpec:
    success_threshold: float
    max_cycles: int
    failure_streak_limit: int = 3
    resource_budget: float = inf

    def __post_init__(self):
        if not -1.0 <= self.success_threshold <= 1.0:
            raise ValueError(f"success_threshold {self.success_threshold} outside [-1, 1]")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        if self.failure_streak_limit < 1:
            raise ValueError("failure_streak_limit must be at least 1")
        if self.resource_budget <= 0:
            raise ValueError("resource_budget must be positive")


@dataclass
class FlavellConfig:
    feel_prob: float = 0.5
    resources_per_cycle: float = 1.0
    prune_margin: int = 5


@dataclass
class CycleState:
    task_tags: set[str]
    goal: GoalSpec
    status: CycleStatus = CycleStatus.ACTIVE
    abandon_reason: AbandonReason | None = None
    history: list[ExperienceTuple] = field(default_factory=list)

    @property
    def cycle(self) -> int:
        """Completed cycles so far; always equals the history length."""
        return len(self.history)

    def resources_spent(self) -> float:
        return sum(t.resources for t in self.history)


def classify_evaluative_signal(outcome: float, previous_outcome: float | None,
                               completeness: float) -> EvaluativeSignal:
    """Name the dominant worry about an outcome, most specific flavor first."""
    if outcome < 0:
        return EvaluativeSignal.DOUBTFUL
    if previous_outcome is not None and abs(outcome - previous_outcome) > 0.5:
        return EvaluativeSignal.UNEXPECTED
    if completeness < 1.0:
        return EvaluativeSignal.FRAGMENTED
    return EvaluativeSignal.UNCERTAIN_PROGRESS


def select_meta_strategy(signal: EvaluativeSignal) -> MetaStrategyKind:
    """Total mapping from evaluative flavor to verification check."""
    return _META_DISPATCH[signal]


def select_cognitive_strategy(difficulty: ExperienceVector,
                              stm_strategies: list[KnowledgeItem],
                              task_tags: set[str]) -> str:
    """Pick the activated strategy with the best smoothed win rate.

    Candidates are first narrowed to strategies sharing at least one task tag;
    the difficulty signal rides along as diagnostic context.  Ties break to
    the lexicographically smallest id so runs are reproducible.
    """
    candidates = [it for it in stm_strategies
                  if it.category is KnowledgeCategory.STRATEGY and it.tags & task_tags]
    if not candidates:
        raise NoApplicableStrategy(f"no activated strategy matches {sorted(task_tags)}")
    return min(candidates, key=lambda it: (-it.success_rate(), it.id)).id


def check_termination(state: CycleState,
                      last_outcome: float) -> tuple[CycleStatus, AbandonReason | None]:
    """Decide whether the loop is done, and how.

    Goal achievement wins over every abandonment rule.  The discrepancy rule
    compares the best outcome of the last ``failure_streak_limit`` cycles with
    the best of the window before, so it needs two full windows of history.
    """
    goal = state.goal
    if last_outcome >= goal.success_threshold:
        return CycleStatus.TERMINATED, None
    outcomes = [t.outcome_quality for t in state.history]
    k = goal.failure_streak_limit
    if len(outcomes) >= k and all(o < 0 for o in outcomes[-k:]):
        return CycleStatus.ABANDONED, AbandonReason.STRATEGY_FAILURE
    if state.resources_spent() > goal.resource_budget or state.cycle >= goal.max_cycles:
        return CycleStatus.ABANDONED, AbandonReason.RESOURCE_EXHAUSTED
    if len(outcomes) >= 2 * k and max(outcomes[-k:]) <= max(outcomes[-2 * k:-k]):
        return CycleStatus.ABANDONED, AbandonReason.IRREDUCIBLE_DISCREPANCY
    return CycleStatus.ACTIVE, None


def _difficulty_assessment(store: KnowledgeStore, task_tags: set[str]) -> float | None:
    """Knowledge-based difficulty estimate: 1 minus the mean win rate of
    activated strategies that match the task.  None when none match."""
    rates = [it.success_rate() for it in store.stm_items()
             if it.category is KnowledgeCategory.STRATEGY and it.tags & task_tags]
    if not rates:
        return None
    return 1.0 - float(np.mean(rates))


def run_cycle(task_tags: set[str], goal: GoalSpec, env, store: KnowledgeStore,
              config: FlavellConfig | None = None,
              rng=None) -> tuple[CycleState, list[ExperienceTuple]]:
    """Run the full loop against ``env`` until it terminates or abandons.

    ``env`` must provide ``execute(strategy_id, resources, rng) -> (outcome,
    completeness)`` and ``meta_evaluate(outcome, kind) -> float``.  Knowledge
    is revised in place every cycle; meta-strategies accrue their own win/loss
    record under ``meta-<kind>`` ids.
    """
    config = config or FlavellConfig()
    if rng is None:
        rng = np.random.default_rng()
    state = CycleState(task_tags=set(task_tags), goal=goal)
    prev_outcome: float | None = None
    prev_strategy: str | None = None
    prev_meta: MetaStrategyKind | None = None

    while state.status is CycleStatus.ACTIVE:
        tau = state.cycle

        # Monitor: refresh working memory, read a difficulty signal.
        query = set(state.task_tags)
        if prev_strategy is not None and prev_meta is not None:
            query |= {prev_strategy, f"meta-{prev_meta.value}"}
        retrieve_probabilistic(store, query, rng)
        raw = 0.5 if prev_outcome is None else (1.0 - prev_outcome) / 2.0
        assessment = _difficulty_assessment(store, state.task_tags)
        difficulty = generate_experience(raw, assessment, config.feel_prob, rng)

        # Generate: dispatch the best activated strategy.
        stm_strategies = [it for it in store.stm_items()
                          if it.category is KnowledgeCategory.STRATEGY]
        try:
            strategy_id = select_cognitive_strategy(difficulty, stm_strategies,
                                                    state.task_tags)
        except NoApplicableStrategy:
            state.status = CycleStatus.ABANDONED
            state.abandon_reason = AbandonReason.STRATEGY_FAILURE
            break
        outcome, completeness = env.execute(strategy_id, config.resources_per_cycle, rng)

        # Verify: classify the outcome, run the matching check, record everything.
        signal = classify_evaluative_signal(outcome, prev_outcome, completeness)
        meta_kind = select_meta_strategy(signal)
        meta_outcome = env.meta_evaluate(outcome, meta_kind)
        experience = ExperienceVector(primary=difficulty.primary,
                                      secondary=clamp01((outcome + 1.0) / 2.0),
                                      mode=difficulty.mode)
        record = ExperienceTuple(cycle=tau, experience=experience,
                                 strategy_id=strategy_id,
                                 resources=config.resources_per_cycle,
                                 outcome_quality=outcome)
        state.history.append(record)
        update_knowledge(store, record, config.prune_margin)
        meta_record = ExperienceTuple(cycle=tau, experience=experience,
                                      strategy_id=f"meta-{meta_kind.value}",
                                      resources=0.0, outcome_quality=meta_outcome)
        update_knowledge(store, meta_record, config.prune_margin,
                         category=KnowledgeCategory.META_STRATEGY)

        state.status, state.abandon_reason = check_termination(state, outcome)
        prev_outcome, prev_strategy, prev_meta = outcome, strategy_id, meta_kind

    return state, list(state.history)
