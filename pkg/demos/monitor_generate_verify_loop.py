"""Watch the full monitor-generate-verify loop solve a small task.

The agent knows two strategies for an algebra-flavored task.  One works, one
does not, and the agent has no prior evidence about either.  Each cycle it
monitors (retrieves what it knows and sizes up difficulty), generates (picks
the most promising strategy and runs it), and verifies (classifies how the
attempt felt, runs the matching meta-level check, and updates its records).
The run ends when the outcome clears the goal threshold.
"""

import numpy as np

from mgv import (FlavellConfig, GoalSpec, KnowledgeCategory, KnowledgeItem,
                 KnowledgeStore, SyntheticTaskEnvironment, run_cycle)

SEED = 7

# ---------------------------------------------------------------------------
# World: "substitute" solves this task, "guess" emphatically does not.
env = SyntheticTaskEnvironment({"substitute": 0.85, "guess": -0.6}, noise=0.05)

store = KnowledgeStore()
for name in ("substitute", "guess"):
    store.add(KnowledgeItem(id=name, category=KnowledgeCategory.STRATEGY,
                            tags={"algebra"}))

goal = GoalSpec(success_threshold=0.7, max_cycles=10)
state, trace = run_cycle({"algebra"}, goal, env, store,
                         FlavellConfig(feel_prob=0.5),
                         np.random.default_rng(SEED))

# ---------------------------------------------------------------------------
# The trace is one record per cycle: which strategy ran, how it went, and the
# experience vector the monitor produced (difficulty, outcome-derived signal).
print(f"status: {state.status.value} after {state.cycle} cycle(s)")
print(f"{'cycle':>5}  {'strategy':<12} {'outcome':>8}  {'difficulty':>10}")
for record in trace:
    print(f"{record.cycle:>5}  {record.strategy_id:<12} "
          f"{record.outcome_quality:>8.3f}  {record.experience.primary:>10.3f}")

# ---------------------------------------------------------------------------
# Verification left its mark: the strategies' tallies now reflect what
# happened, and each evaluative signal recorded its meta-level check.
print("\nwhat the agent now believes:")
for item in sorted(store.ltm.values(), key=lambda i: i.id):
    if item.category is KnowledgeCategory.STRATEGY:
        print(f"  {item.id:<12} successes={item.successes} "
              f"failures={item.failures} rate={item.success_rate():.2f}")
print("\nmeta-level checks exercised:")
for item in sorted(store.ltm.values(), key=lambda i: i.id):
    if item.category is KnowledgeCategory.META_STRATEGY:
        print(f"  {item.id:<22} invoked {item.successes + item.failures} time(s)")
