"""Planning as a meta-level decision: expansions buy information about paths.

A plan tree starts with only the root expanded.  Expanding a frontier node
reveals its value; the current plan's worth is the best root-to-leaf sum with
prior means standing in for unrevealed nodes.  The myopic rule expands the
frontier node whose one-step value of computation -- expected improvement in
plan worth minus the expansion cost -- is largest, and stops when no node's
is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NodeNotOnFrontier


@dataclass(frozen=True)
class DiscretePrior:
    """Finite-support belief over a node's hidden value."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise ValueError("support and probs must be non-empty and align")
        if any(p < 0 for p in self.probs):
            raise ValueError("probs must be nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError(f"probs sum to {sum(self.probs)}, not 1")

    def mean(self) -> float:
        return float(sum(s * p for s, p in zip(self.support, self.probs)))

    def to_dict(self) -> dict:
        return {"support": list(self.support), "probs": list(self.probs)}

    @classmethod
    def from_dict(cls, d: dict) -> "DiscretePrior":
        return cls(tuple(d["support"]), tuple(d["probs"]))


@dataclass
class PlanningState:
    """Tree topology, per-node priors, and observed values (None = unrevealed).

    ``parents[0]`` must be None (the root); the root is always expanded, by
    convention with value 0.
    """

    parents: tuple[int | None, ...]
    priors: tuple[DiscretePrior, ...]
    values: list[float | None]

    def __post_init__(self):
        n = len(self.parents)
        if len(self.priors) != n or len(self.values) != n:
            raise ValueError("parents, priors, values must align")
        if n == 0 or self.parents[0] is not None:
            raise ValueError("node 0 must be the root (parent None)")
        for i, p in enumerate(self.parents[1:], start=1):
            if p is None or not 0 <= p < n or p == i:
                raise ValueError(f"node {i} has invalid parent {p}")
        # Reject cycles by walking each node up to the root.
        for i in range(1, n):
            seen, j = set(), i
            while j != 0:
                if j in seen:
                    raise ValueError(f"cycle through node {j}")
                seen.add(j)
                j = self.parents[j]
        if self.values[0] is None:
            raise ValueError("root must be expanded")

    @property
    def num_nodes(self) -> int:
        return len(self.parents)

    def children(self, node: int) -> list[int]:
        return [i for i, p in enumerate(self.parents) if p == node]

    def copy(self) -> "PlanningState":
        return PlanningState(self.parents, self.priors, list(self.values))


def make_initial_state(parents, priors) -> PlanningState:
    values: list[float | None] = [0.0] + [None] * (len(parents) - 1)
    return PlanningState(tuple(parents), tuple(priors), values)


def frontier(state: PlanningState) -> list[int]:
    """Unrevealed nodes whose parent is revealed, in index order."""
    return [i for i in range(1, state.num_nodes)
            if state.values[i] is None and state.values[state.parents[i]] is not None]


def _paths(state: PlanningState) -> list[tuple[int, ...]]:
    leaves = [i for i in range(state.num_nodes) if not state.children(i)]
    paths = []
    for leaf in leaves:
        path, j = [], leaf
        while j is not None:
            path.append(j)
            j = state.parents[j]
        paths.append(tuple(reversed(path)))
    return paths


def _node_contribution(state: PlanningState, node: int) -> float:
    v = state.values[node]
    return v if v is not None else state.priors[node].mean()


def plan_value(state: PlanningState) -> float:
    """Worth of the best root-to-leaf path, prior means filling in the
    unrevealed nodes."""
    return max(sum(_node_contribution(state, n) for n in path)
               for path in _paths(state))


def myopic_voc(state: PlanningState, node: int, expansion_cost: float) -> float:
    """One-step value of revealing ``node``: expected plan worth afterwards,
    minus current worth, minus the cost."""
    if node not in frontier(state):
        raise NodeNotOnFrontier(f"node {node} is not expandable now")
    base = plan_value(state)
    prior = state.priors[node]
    expected_after = 0.0
    for v, p in zip(prior.support, prior.probs):
        state.values[node] = v
        expected_after += p * plan_value(state)
    state.values[node] = None
    return expected_after - base - expansion_cost


@dataclass
class MyopicPlanResult:
    state: PlanningState
    expansions: list[tuple[int, float]]
    net_reward: float

    @property
    def num_expansions(self) -> int:
        return len(self.expansions)


def run_myopic_planner(state: PlanningState, expansion_cost: float, rng=None,
                       reveal=None) -> MyopicPlanResult:
    """Greedy meta-level loop: keep revealing the best-scoring frontier node
    while some node's value of computation is positive.

    Revealed values are drawn from each node's prior via ``rng``; pass
    ``reveal(node) -> value`` instead to play against a fixed world.  Ties on
    the value of computation go to the lowest node index.  Net reward is the
    final plan worth minus cost times expansions made.
    """
    if rng is None and reveal is None:
        raise ValueError("need an rng or a reveal function")
    st = state.copy()
    expansions: list[tuple[int, float]] = []
    while True:
        candidates = frontier(st)
        if not candidates:
            break
        best_node, best_voc = None, -np.inf
        for node in candidates:
            voc = myopic_voc(st, node, expansion_cost)
            if voc > best_voc:
                best_node, best_voc = node, voc
        if best_voc <= 0:
            break
        if reveal is not None:
            revealed = float(reveal(best_node))
        else:
            prior = st.priors[best_node]
            idx = rng.choice(len(prior.support), p=np.asarray(prior.probs))
            revealed = prior.support[int(idx)]
        st.values[best_node] = revealed
        expansions.append((best_node, revealed))
    net = plan_value(st) - expansion_cost * len(expansions)
    return MyopicPlanResult(st, expansions, net)
