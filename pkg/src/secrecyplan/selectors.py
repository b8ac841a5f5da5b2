"""Runtime action selection for the six algorithms (OJPA, RSJPA, GA, NA,
ITPA, IJPA) plus the restricted single-battery MDPs behind ITPA/IJPA.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .mdp import (
    Action,
    Kernel,
    StateDims,
    action_from_index,
    battery_branches,
    _channel_successors,
    state_from_index,
)
from .model import SystemModel
from .planner import Policy


class Algorithm(str, Enum):
    OJPA = "ojpa"
    RSJPA = "rsjpa"
    GA = "ga"
    NA = "na"
    ITPA = "itpa"
    IJPA = "ijpa"


class MissingStateError(KeyError):
    """Lookup of a state the policy does not cover (RSJPA fallback signal)."""


def act_lookup(policy: Policy, s: int) -> int:
    """Stored action for state index s; raises if the plan does not cover s."""
    a = int(policy.actions[s])
    if a < 0:
        raise MissingStateError(s)
    return a


def greedy_action(kernel: Kernel, costs_per_action: np.ndarray, s: int) -> int:
    """argmax of the immediate reward over feasible actions; ties broken by
    lowest total energy cost, then lowest action index."""
    best = None
    for a in kernel.feasible[s]:
        key = (-kernel.rewards[s, a], costs_per_action[a], a)
        if best is None or key < best:
            best = key
    return best[2]


def greedy_actions(kernel: Kernel, costs_per_action: np.ndarray) -> np.ndarray:
    """GA as a full state-indexed table (it is a stationary policy)."""
    return np.array(
        [greedy_action(kernel, costs_per_action, s) for s in range(kernel.n_states)],
        dtype=np.int64,
    )


def action_costs(model: SystemModel) -> np.ndarray:
    """Total energy units per joint action index."""
    M = model.radio.n_powers
    return np.array(
        [model.costs[i_s] + model.costs[i_d] for i_s in range(M) for i_d in range(M)],
        dtype=np.int64,
    )


def naive_action(s_b_s: int, s_b_d: int, costs: tuple[int, ...], n_powers: int) -> Action:
    """Largest affordable power index, independently per node."""
    i_s = max(i for i, c in enumerate(costs) if c <= s_b_s)
    i_d = max(i for i, c in enumerate(costs) if c <= s_b_d)
    return Action(i_s, i_d)


def naive_actions(model: SystemModel, dims: StateDims) -> np.ndarray:
    M = model.radio.n_powers
    out = np.empty(dims.n_states, dtype=np.int64)
    for idx in range(dims.n_states):
        s = state_from_index(idx, dims)
        a = naive_action(s.b_s, s.b_d, model.costs, M)
        out[idx] = a.i_s * M + a.i_d
    return out


def rsjpa_actions(policy: Policy, kernel: Kernel, costs_per_action: np.ndarray) -> np.ndarray:
    """Planned-table lookup where available, immediate-reward greedy elsewhere."""
    out = policy.actions.copy()
    for s in range(kernel.n_states):
        if out[s] < 0:
            out[s] = greedy_action(kernel, costs_per_action, s)
    return out


def act_rsjpa(policy: Policy, kernel: Kernel, costs_per_action: np.ndarray, s: int) -> int:
    try:
        return act_lookup(policy, s)
    except MissingStateError:
        return greedy_action(kernel, costs_per_action, s)


@dataclass(frozen=True)
class RestrictedDims:
    """State layout of the single-battery MDP: four channel digits + one battery."""

    levels: int
    b_max: int
    mode: Algorithm  # ITPA (source battery) or IJPA (destination battery)

    @property
    def n_states(self) -> int:
        return self.levels**4 * (self.b_max + 1)


def restricted_state_index(gains: tuple[int, int, int, int], b: int, dims: RestrictedDims) -> int:
    L = dims.levels
    i = ((gains[0] * L + gains[1]) * L + gains[2]) * L + gains[3]
    return i * (dims.b_max + 1) + b


def restricted_state_from_index(i: int, dims: RestrictedDims) -> tuple[tuple[int, int, int, int], int]:
    L = dims.levels
    i, b = divmod(i, dims.b_max + 1)
    i, g4 = divmod(i, L)
    i, g3 = divmod(i, L)
    g1, g2 = divmod(i, L)
    return (g1, g2, g3, g4), b


def build_restricted_mdp(
    mode: Algorithm, model: SystemModel, fixed_power_index: int
) -> tuple[Kernel, RestrictedDims]:
    """Kernel of the individual-allocation MDP.

    ITPA: optimize the source power with the destination mains-powered at
    `fixed_power_index` every slot (no destination battery). IJPA is the
    mirror image. Actions are single power indices.
    """
    if mode not in (Algorithm.ITPA, Algorithm.IJPA):
        raise ValueError(f"mode must be ITPA or IJPA, got {mode}")
    M = model.radio.n_powers
    if not 0 <= fixed_power_index < M:
        raise ValueError(f"fixed power index {fixed_power_index} out of range")

    en = model.energy
    L = model.channel.n_levels
    if mode is Algorithm.ITPA:
        b_max, p_harv = en.b_max_source, en.p_source
    else:
        b_max, p_harv = en.b_max_dest, en.p_dest
    dims = RestrictedDims(L, b_max, mode)
    rb = b_max + 1

    chan_succ = _channel_successors(model.channel.transitions, L)
    combo_rewards = {}
    for combo in chan_succ:
        if mode is Algorithm.ITPA:
            combo_rewards[combo] = [model.slot_reward(combo, a, fixed_power_index) for a in range(M)]
        else:
            combo_rewards[combo] = [model.slot_reward(combo, fixed_power_index, a) for a in range(M)]

    n_states = dims.n_states
    feasible: list[list[int]] = []
    transitions: list[dict[int, tuple[np.ndarray, np.ndarray]]] = []
    rewards = np.zeros((n_states, M))

    for idx in range(n_states):
        combo, b = restricted_state_from_index(idx, dims)
        acts = [a for a in range(M) if model.costs[a] <= b]
        feasible.append(acts)
        rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for a in acts:
            rewards[idx, a] = combo_rewards[combo][a]
            branches = battery_branches(b, model.costs[a], p_harv, en.harvest_units, b_max)
            agg: dict[int, float] = {}
            for base, p_ch in chan_succ[combo]:
                for nb, p_b in branches:
                    nxt = base * rb + nb
                    agg[nxt] = agg.get(nxt, 0.0) + p_ch * p_b
            items = sorted(agg.items())
            rows[a] = (
                np.array([k for k, _ in items], dtype=np.int64),
                np.array([v for _, v in items]),
            )
        transitions.append(rows)

    return Kernel(n_states, M, feasible, transitions, rewards), dims
