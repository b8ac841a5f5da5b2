"""Finite MDP over (four channel levels, two battery levels): state indexing,
feasible actions, and the exact sparse transition kernel with rewards.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import NamedTuple

import numpy as np

from .model import SystemModel, battery_next


class SystemState(NamedTuple):
    g_sd: int
    g_se: int
    g_dd: int
    g_de: int
    b_s: int
    b_d: int


class Action(NamedTuple):
    i_s: int
    i_d: int


@dataclass(frozen=True)
class StateDims:
    """Mixed-radix layout of the joint state space."""

    levels: int
    b_s_max: int
    b_d_max: int

    @property
    def n_states(self) -> int:
        return self.levels**4 * (self.b_s_max + 1) * (self.b_d_max + 1)


def state_index(s: SystemState, dims: StateDims) -> int:
    """Mixed-radix index, most significant first: (gSD, gSE, gDD, gDE, bS, bD)."""
    L = dims.levels
    if not all(0 <= g < L for g in s[:4]):
        raise ValueError(f"gain index out of range in {s}")
    if not (0 <= s.b_s <= dims.b_s_max and 0 <= s.b_d <= dims.b_d_max):
        raise ValueError(f"battery level out of range in {s}")
    i = ((s.g_sd * L + s.g_se) * L + s.g_dd) * L + s.g_de
    return (i * (dims.b_s_max + 1) + s.b_s) * (dims.b_d_max + 1) + s.b_d


def state_from_index(i: int, dims: StateDims) -> SystemState:
    """Exact inverse of state_index."""
    if not 0 <= i < dims.n_states:
        raise ValueError(f"state index {i} out of range")
    i, b_d = divmod(i, dims.b_d_max + 1)
    i, b_s = divmod(i, dims.b_s_max + 1)
    L = dims.levels
    i, g_de = divmod(i, L)
    i, g_dd = divmod(i, L)
    g_sd, g_se = divmod(i, L)
    return SystemState(g_sd, g_se, g_dd, g_de, b_s, b_d)


def action_index(a: Action, n_powers: int) -> int:
    return a.i_s * n_powers + a.i_d


def action_from_index(i: int, n_powers: int) -> Action:
    return Action(*divmod(i, n_powers))


def feasible_actions(s: SystemState, costs: tuple[int, ...]) -> list[Action]:
    """All (iS, iD) pairs whose costs fit the respective batteries,
    ascending lexicographic; (0,0) is always present."""
    src = [i for i, c in enumerate(costs) if c <= s.b_s]
    dst = [i for i, c in enumerate(costs) if c <= s.b_d]
    return [Action(i_s, i_d) for i_s in src for i_d in dst]


@dataclass
class Kernel:
    """Sparse transition kernel plus immediate rewards.

    transitions[s][a] = (next_indices, probabilities) exists only for feasible
    (s, a); probabilities sum to 1. rewards[s, a] is defined for feasible (s, a)
    and 0 elsewhere (feasibility is authoritative via `feasible`).
    """

    n_states: int
    n_actions: int
    feasible: list[list[int]]
    transitions: list[dict[int, tuple[np.ndarray, np.ndarray]]]
    rewards: np.ndarray

    def row(self, s: int, a: int) -> tuple[np.ndarray, np.ndarray]:
        return self.transitions[s][a]


def battery_branches(
    b: int, cost: int, p: float, e_h: int, b_max: int
) -> list[tuple[int, float]]:
    """Next-battery distribution for one node, harvest/no-harvest branches
    aggregated when clamping makes them coincide."""
    out: dict[int, float] = {}
    if p > 0.0:
        nb = battery_next(b, cost, True, b_max, e_h)
        out[nb] = out.get(nb, 0.0) + p
    if p < 1.0:
        nb = battery_next(b, cost, False, b_max, e_h)
        out[nb] = out.get(nb, 0.0) + 1.0 - p
    return sorted(out.items())


def _channel_successors(
    channel_transitions: dict[str, tuple[tuple[float, ...], ...]],
    L: int,
) -> dict[tuple[int, ...], list[tuple[int, float]]]:
    """For every joint channel combo, the list of (joint next combo base, prob),
    with the base already in mixed-radix channel order (battery radices applied
    by the caller). Zero-probability branches are dropped."""
    mats = [channel_transitions[link] for link in ("SD", "SE", "DD", "DE")]
    combos = {}
    for combo in product(range(L), repeat=4):
        succ: list[tuple[int, float]] = []
        rows = [mats[j][combo[j]] for j in range(4)]
        for nxt in product(range(L), repeat=4):
            pr = rows[0][nxt[0]] * rows[1][nxt[1]] * rows[2][nxt[2]] * rows[3][nxt[3]]
            if pr > 0.0:
                base = ((nxt[0] * L + nxt[1]) * L + nxt[2]) * L + nxt[3]
                succ.append((base, pr))
        combos[combo] = succ
    return combos


def build_kernel(model: SystemModel) -> Kernel:
    """Materialize the exact kernel: channel factors times Bernoulli harvest
    factors, with outcomes that clamp onto the same next state aggregated."""
    L = model.channel.n_levels
    en = model.energy
    dims = StateDims(L, en.b_max_source, en.b_max_dest)
    M = model.radio.n_powers
    n_actions = M * M
    rb_s, rb_d = en.b_max_source + 1, en.b_max_dest + 1

    chan_succ = _channel_successors(model.channel.transitions, L)
    combo_rewards = {
        combo: [model.slot_reward(combo, i_s, i_d) for i_s in range(M) for i_d in range(M)]
        for combo in chan_succ
    }

    n_states = dims.n_states
    feasible: list[list[int]] = []
    transitions: list[dict[int, tuple[np.ndarray, np.ndarray]]] = []
    rewards = np.zeros((n_states, n_actions))

    for idx in range(n_states):
        s = state_from_index(idx, dims)
        combo = (s.g_sd, s.g_se, s.g_dd, s.g_de)
        acts = feasible_actions(s, model.costs)
        act_ids = [action_index(a, M) for a in acts]
        feasible.append(act_ids)
        rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for a, aid in zip(acts, act_ids):
            rewards[idx, aid] = combo_rewards[combo][aid]
            bs_branches = battery_branches(
                s.b_s, model.costs[a.i_s], en.p_source, en.harvest_units, en.b_max_source
            )
            bd_branches = battery_branches(
                s.b_d, model.costs[a.i_d], en.p_dest, en.harvest_units, en.b_max_dest
            )
            agg: dict[int, float] = {}
            for base, p_ch in chan_succ[combo]:
                for nb_s, p_s in bs_branches:
                    for nb_d, p_d in bd_branches:
                        nxt = (base * rb_s + nb_s) * rb_d + nb_d
                        pr = p_ch * p_s * p_d
                        agg[nxt] = agg.get(nxt, 0.0) + pr
            items = sorted(agg.items())
            rows[aid] = (
                np.array([k for k, _ in items], dtype=np.int64),
                np.array([v for _, v in items]),
            )
        transitions.append(rows)

    return Kernel(n_states, n_actions, feasible, transitions, rewards)


def joint_dims(model: SystemModel) -> StateDims:
    return StateDims(
        model.channel.n_levels, model.energy.b_max_source, model.energy.b_max_dest
    )
