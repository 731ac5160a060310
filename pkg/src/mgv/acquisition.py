"""Study scheduling: norm of study, inverse-proportional allocation, the learn loop.

A batch of items is studied cycle by cycle.  Monitoring produces ease-of-learning
signals on the first pass and feeling-of-knowing signals afterwards; budget flows
inversely to those signals, so shaky items soak up study time.  An item leaves
the active set once its judgment of learning clears the norm of study, and the
run's records are consolidated into knowledge at the end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .experience import (ExperienceTuple, ExperienceVector, clamp01,
                         generate_experience)
from .knowledge import (KnowledgeCategory, KnowledgeItem, KnowledgeStore,
                        consolidate, retrieve_probabilistic)
from .flavell import select_cognitive_strategy

BASELINE_STRATEGY_ID = "baseline-study"


def compute_norm_of_study(target_performance: float, retention_discount: float) -> float:
    """Mastery level worth studying to, padded for expected forgetting.

    Written in distributed form because the factored product drifts off
    decimal targets (0.9 * 1.1 rounds away from 0.99 in binary floats).
    """
    if not 0.0 <= target_performance <= 1.0:
        raise ValueError(f"target_performance {target_performance} outside [0, 1]")
    if retention_discount < 0.0:
        raise ValueError("retention_discount must be nonnegative")
    return target_performance + target_performance * retention_discount


def allocate_resources(signals: dict[int, float], total: float,
                       signal_floor: float = 1e-6) -> dict[int, float]:
    """Split a budget inversely proportional to per-item mastery signals.

    Signals are clamped to [signal_floor, 1] so a zero reading cannot swallow
    the whole budget.  The allocations sum to ``total`` exactly up to float
    rounding.
    """
    if total < 0:
        raise ValueError("total must be nonnegative")
    if not signals:
        return {}
    weights = {j: 1.0 / min(1.0, max(signal_floor, s)) for j, s in signals.items()}
    weight_sum = sum(weights.values())
    return {j: total * w / weight_sum for j, w in weights.items()}


@dataclass
class LearnItem:
    """One thing to be learned, with a hidden difficulty the monitor can only
    sense through its signals."""

    id: int
    latent_difficulty: float
    mastery: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.latent_difficulty <= 1.0:
            raise ValueError(f"latent_difficulty {self.latent_difficulty} outside (0, 1]")
        if not 0.0 <= self.mastery <= 1.0:
            raise ValueError(f"mastery {self.mastery} outside [0, 1]")


@dataclass
class AcquisitionConfig:
    target_performance: float
    retention_discount: float
    total_resources_per_cycle: float
    items: list[LearnItem]
    max_cycles: int
    feel_prob: float = 0.5
    jol_noise_sigma: float = 0.05
    signal_floor: float = 1e-6
    mastery_gain: float = 0.2
    task_tags: set[str] = field(default_factory=lambda: {"study"})

    def __post_init__(self):
        if self.total_resources_per_cycle <= 0:
            raise ValueError("total_resources_per_cycle must be positive")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        if not self.items:
            raise ValueError("need at least one item")
        if len({it.id for it in self.items}) != len(self.items):
            raise ValueError("item ids must be unique")
        if self.jol_noise_sigma < 0:
            raise ValueError("jol_noise_sigma must be nonnegative")


@dataclass
class AcquisitionState:
    norm_of_study: float
    active_items: set[int]
    cycle: int = 0
    jols: dict[int, float] = field(default_factory=dict)
    mastery: dict[int, float] = field(default_factory=dict)
    trace: list[ExperienceTuple] = field(default_factory=list)
    # the active set at the start of each cycle, then the final survivors
    active_history: list[frozenset[int]] = field(default_factory=list)

    @property
    def finished(self) -> bool:
        """True once every item's judgment of learning has cleared the norm."""
        return not self.active_items


def run_acquisition(config: AcquisitionConfig, store: KnowledgeStore,
                    rng) -> tuple[AcquisitionState, list[ExperienceTuple]]:
    """Study the batch until every item clears the norm or cycles run out.

    The reference learning world is linear: studying item j with resources r
    raises mastery by ``mastery_gain * r * (1 - latent_difficulty)``, capped
    at 1.  First-cycle signals are ease-of-learning feelings (1 - difficulty);
    later cycles blend current mastery with the previous judgment of learning
    through the feel/assess channel choice.  Judgments of learning observe
    mastery under Gaussian noise.
    """
    norm = compute_norm_of_study(config.target_performance, config.retention_discount)
    if norm > 1.0:
        warnings.warn(f"norm of study {norm:.4f} exceeds attainable mastery 1.0; "
                      "items may never clear it", stacklevel=2)

    if BASELINE_STRATEGY_ID not in store.ltm:
        store.add(KnowledgeItem(BASELINE_STRATEGY_ID, KnowledgeCategory.STRATEGY,
                                tags=set(config.task_tags)))
    store.stm.add(BASELINE_STRATEGY_ID)
    retrieve_probabilistic(store, set(config.task_tags), rng)

    items = {it.id: LearnItem(it.id, it.latent_difficulty, it.mastery)
             for it in config.items}
    state = AcquisitionState(norm_of_study=norm,
                             active_items={it.id for it in config.items},
                             mastery={it.id: it.mastery for it in config.items})
    prev_jol: dict[int, float] = {}

    while state.active_items and state.cycle < config.max_cycles:
        cycle = state.cycle
        active = sorted(state.active_items)
        state.active_history.append(frozenset(active))

        # Monitor: one signal per active item, in fixed id order.
        retrieve_probabilistic(store, set(config.task_tags), rng)
        vectors: dict[int, ExperienceVector] = {}
        for j in active:
            item = items[j]
            if cycle == 0:
                vec = generate_experience(1.0 - item.latent_difficulty, None,
                                          config.feel_prob, rng)
            else:
                vec = generate_experience(item.mastery, prev_jol.get(j),
                                          config.feel_prob, rng)
            vectors[j] = vec
        signals = {j: vectors[j].primary for j in active}

        # Generate: split the budget, study each item.
        allocation = allocate_resources(signals, config.total_resources_per_cycle,
                                        config.signal_floor)
        stm_strategies = [it for it in store.stm_items()
                          if it.category is KnowledgeCategory.STRATEGY]
        for j in active:
            strategy_id = select_cognitive_strategy(vectors[j], stm_strategies,
                                                    set(config.task_tags))
            item = items[j]
            before = item.mastery
            item.mastery = min(1.0, item.mastery + config.mastery_gain
                               * allocation[j] * (1.0 - item.latent_difficulty))

            # Verify: judge learning from the updated mastery.
            jol = item.mastery
            if config.jol_noise_sigma > 0:
                jol = clamp01(jol + rng.normal(0.0, config.jol_noise_sigma))
            record = ExperienceTuple(
                cycle=cycle,
                experience=ExperienceVector(vectors[j].primary, jol, vectors[j].mode),
                strategy_id=strategy_id,
                resources=allocation[j],
                outcome_quality=min(1.0, item.mastery - before),
            )
            state.trace.append(record)
            state.jols[j] = jol
            state.mastery[j] = item.mastery
            prev_jol[j] = jol

        # Items whose judgment clears the norm leave the active set.
        state.active_items = {j for j in active if state.jols[j] < norm}
        state.cycle = cycle + 1

    state.active_history.append(frozenset(state.active_items))
    consolidate(store, state.trace, rng)
    return state, list(state.trace)
