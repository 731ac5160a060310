"""Deciding which thoughts are worth thinking: myopic planning on a tree.

Plan quality is the best root-to-leaf value sum, with unexpanded nodes scored
at their prior means.  Expanding a node reveals its true value at a fixed
cost.  The planner repeatedly expands whichever frontier node has the highest
myopic value of computation -- expected improvement in plan value minus the
cost -- and stops when no expansion is expected to pay for itself.
"""

import numpy as np

from mgv import (DiscretePrior, frontier, make_initial_state, myopic_voc,
                 plan_value, run_myopic_planner)

#            0
#          /   \
#         1     2        1 is a coin flip between routes of value 0 or 1;
#        / \    |        2 is a long shot (usually bad, rarely great).
#       3   4   5
parents = [None, 0, 0, 1, 1, 2]
priors = [
    DiscretePrior((0.0,), (1.0,)),
    DiscretePrior((0.0, 1.0), (0.5, 0.5)),
    DiscretePrior((-0.5, 1.5), (0.8, 0.2)),
    DiscretePrior((0.0, 0.6), (0.5, 0.5)),
    DiscretePrior((0.1,), (1.0,)),
    DiscretePrior((0.0, 2.0), (0.9, 0.1)),
]

state = make_initial_state(parents, priors)
print(f"plan value before thinking: {plan_value(state):.3f}")
print("frontier and each node's myopic value of computation (cost 0.05):")
for node in frontier(state):
    print(f"  node {node}: voc = {myopic_voc(state, node, 0.05):+.3f}")

result = run_myopic_planner(state, expansion_cost=0.05,
                            rng=np.random.default_rng(4))
print("\nexpansion order (node -> revealed value):")
for node, value in result.expansions:
    print(f"  node {node} -> {value:+.2f}")
print(f"plan value after: {plan_value(result.state):.3f}")
print(f"net reward (value - cost*expansions): {result.net_reward:.3f}")

# The same tree under increasing expansion cost: thinking gets rationed and
# eventually priced out entirely.
print("\ncost sweep:")
for cost in (0.0, 0.05, 0.2, 0.5, 1.0):
    nets = []
    counts = []
    for seed in range(200):
        r = run_myopic_planner(make_initial_state(parents, priors), cost,
                               rng=np.random.default_rng(seed))
        nets.append(r.net_reward)
        counts.append(r.num_expansions)
    print(f"  cost={cost:<4} mean expansions={np.mean(counts):.2f}  "
          f"mean net reward={np.mean(nets):.3f}")
