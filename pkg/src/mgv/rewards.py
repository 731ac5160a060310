"""Reward shaping for deliberate reasoning."""

from __future__ import annotations


def ram_reward(logp_answer_with_chain: float, logp_answer_without_chain: float,
               chain_length: int, token_cost: float) -> float:
    """Net value of a reasoning chain.

    The benefit is how much the chain raised the answer's log-probability;
    the charge is a per-token cost on the chain's length.  A chain that does
    not help still pays for its tokens, so the reward is negative.
    """
    if chain_length < 0:
        raise ValueError("chain_length must be nonnegative")
    if token_cost < 0:
        raise ValueError("token_cost must be nonnegative")
    benefit = logp_answer_with_chain - logp_answer_without_chain
    return benefit - token_cost * chain_length
