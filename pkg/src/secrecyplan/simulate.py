"""Monte-Carlo transmission phase: geometric lifetimes, per-slot channel and
harvest sampling, and estimators for expected secure bits and energy
efficiency.

Reproducibility contract: episode i of a run seeded with `seed` uses the
numpy PCG64 generator seeded with SeedSequence((seed, i)). Within an episode
the draw order is fixed: the lifetime (sampled mode only), then a (K, 6)
uniform block whose columns are the four channel links (SD, SE, DD, DE) and
the two harvest arrivals (source, destination).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mdp import StateDims, SystemState, state_index
from .model import SystemModel
from .selectors import Algorithm, RestrictedDims, restricted_state_index


@dataclass(frozen=True)
class SimConfig:
    gamma: float
    episodes: int
    s0_index: int
    mode: str = "sampled"  # "sampled" | "discounted"
    seed: int = 1
    discount_truncation: float = 1e-4

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0,1)")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.mode not in ("sampled", "discounted"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.discount_truncation < 1.0:
            raise ValueError("discount_truncation must be in (0,1)")


@dataclass
class EpisodeRecord:
    lifetime: int
    secure_bits: float           # undiscounted total
    weighted_bits: float         # discount-weighted total (== secure_bits when unweighted)
    transmitted_energy: int      # units spent by both nodes, incl. any mains-powered spend
    harvested_s: int             # units actually banked (post battery clamp)
    harvested_d: int
    final_b_s: int
    final_b_d: int
    trace: list[tuple[int, int, float]] | None = None


@dataclass
class MetricsSummary:
    mean_reward: float
    reward_stderr: float
    mean_energy_efficiency: float
    ee_stderr: float
    episodes: int


@dataclass
class SimSystem:
    """Flattened dynamics shared by the joint and the restricted systems.

    A mains-powered node is modeled with battery radix 1 (level pinned at 0),
    zero debit, zero harvest probability, and its fixed per-slot cost folded
    into the spend arrays.
    """

    levels: int
    rb_s: int
    rb_d: int
    b_max_s: int
    b_max_d: int
    p_harv_s: float
    p_harv_d: float
    e_h: int
    cum: tuple[list[list[float]], ...]   # cumulative transition rows, per link
    debit_s: list[int]
    debit_d: list[int]
    spend_s: list[int]
    spend_d: list[int]
    rewards: list[list[float]]
    n_states: int


def _cumulative_rows(model: SystemModel) -> tuple[list[list[float]], ...]:
    out = []
    for link in ("SD", "SE", "DD", "DE"):
        mat = model.channel.transitions[link]
        rows = []
        for row in mat:
            acc, cum = 0.0, []
            for x in row:
                acc += x
                cum.append(acc)
            cum[-1] = 1.0
            rows.append(cum)
        out.append(rows)
    return tuple(out)


def build_sim_system(model: SystemModel, rewards: np.ndarray) -> SimSystem:
    """Joint two-battery system; `rewards` is the kernel's (state, action) table."""
    en = model.energy
    M = model.radio.n_powers
    debit_s = [model.costs[a // M] for a in range(M * M)]
    debit_d = [model.costs[a % M] for a in range(M * M)]
    return SimSystem(
        levels=model.channel.n_levels,
        rb_s=en.b_max_source + 1,
        rb_d=en.b_max_dest + 1,
        b_max_s=en.b_max_source,
        b_max_d=en.b_max_dest,
        p_harv_s=en.p_source,
        p_harv_d=en.p_dest,
        e_h=en.harvest_units,
        cum=_cumulative_rows(model),
        debit_s=debit_s,
        debit_d=debit_d,
        spend_s=list(debit_s),
        spend_d=list(debit_d),
        rewards=rewards.tolist(),
        n_states=rewards.shape[0],
    )


def build_restricted_sim_system(
    model: SystemModel, mode: Algorithm, fixed_power_index: int, rewards: np.ndarray
) -> SimSystem:
    """Single-battery system with the other node mains-powered at a fixed level."""
    en = model.energy
    M = model.radio.n_powers
    fixed_cost = model.costs[fixed_power_index]
    costs = list(model.costs)
    zeros = [0] * M
    if mode is Algorithm.ITPA:
        b_s, b_d = en.b_max_source, 0
        p_s, p_d = en.p_source, 0.0
        debit_s, debit_d = costs, zeros
        spend_s, spend_d = costs, [fixed_cost] * M
    elif mode is Algorithm.IJPA:
        b_s, b_d = 0, en.b_max_dest
        p_s, p_d = 0.0, en.p_dest
        debit_s, debit_d = zeros, costs
        spend_s, spend_d = [fixed_cost] * M, costs
    else:
        raise ValueError(f"mode must be ITPA or IJPA, got {mode}")
    return SimSystem(
        levels=model.channel.n_levels,
        rb_s=b_s + 1,
        rb_d=b_d + 1,
        b_max_s=b_s,
        b_max_d=b_d,
        p_harv_s=p_s,
        p_harv_d=p_d,
        e_h=en.harvest_units,
        cum=_cumulative_rows(model),
        debit_s=debit_s,
        debit_d=debit_d,
        spend_s=spend_s,
        spend_d=spend_d,
        rewards=rewards.tolist(),
        n_states=rewards.shape[0],
    )


def sample_lifetime(gamma: float, rng: np.random.Generator) -> int:
    """Geometric lifetime K >= 1 with P[K=k] = gamma^(k-1) (1-gamma)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must be in [0,1)")
    return int(rng.geometric(1.0 - gamma))


def decode_state(system: SimSystem, idx: int) -> tuple[int, int, int, int, int, int]:
    L = system.levels
    idx, b_d = divmod(idx, system.rb_d)
    idx, b_s = divmod(idx, system.rb_s)
    idx, g4 = divmod(idx, L)
    idx, g3 = divmod(idx, L)
    g1, g2 = divmod(idx, L)
    return g1, g2, g3, g4, b_s, b_d


def run_episode(
    action_table,
    system: SimSystem,
    s0_index: int,
    K: int,
    rng: np.random.Generator,
    discount: float | None = None,
    keep_trace: bool = False,
) -> EpisodeRecord:
    """Play K slots: act, accrue the slot reward, debit batteries, bank
    harvests, then advance the four channels."""
    if K < 1:
        raise ValueError("K must be >= 1")
    g1, g2, g3, g4, b_s, b_d = decode_state(system, s0_index)
    L = system.levels
    rb_s, rb_d = system.rb_s, system.rb_d
    cum1, cum2, cum3, cum4 = system.cum
    rewards = system.rewards
    debit_s, debit_d = system.debit_s, system.debit_d
    spend_s, spend_d = system.spend_s, system.spend_d
    p_s, p_d, e_h = system.p_harv_s, system.p_harv_d, system.e_h
    b_max_s, b_max_d = system.b_max_s, system.b_max_d
    actions = action_table

    us = rng.random((K, 6))
    secure = 0.0
    weighted = 0.0
    w = 1.0
    spent = 0
    harv_s = 0
    harv_d = 0
    trace: list[tuple[int, int, float]] | None = [] if keep_trace else None

    for k in range(K):
        idx = ((((g1 * L + g2) * L + g3) * L + g4) * rb_s + b_s) * rb_d + b_d
        a = int(actions[idx])
        r = rewards[idx][a]
        secure += r
        if discount is not None:
            weighted += w * r
            w *= discount
        if trace is not None:
            trace.append((idx, a, r))
        b_s -= debit_s[a]
        b_d -= debit_d[a]
        spent += spend_s[a] + spend_d[a]
        u = us[k]
        if u[4] < p_s:
            nb = b_s + e_h
            if nb > b_max_s:
                nb = b_max_s
            harv_s += nb - b_s
            b_s = nb
        if u[5] < p_d:
            nb = b_d + e_h
            if nb > b_max_d:
                nb = b_max_d
            harv_d += nb - b_d
            b_d = nb
        row = cum1[g1]
        x = u[0]
        j = 0
        while x >= row[j]:
            j += 1
        g1 = j
        row = cum2[g2]
        x = u[1]
        j = 0
        while x >= row[j]:
            j += 1
        g2 = j
        row = cum3[g3]
        x = u[2]
        j = 0
        while x >= row[j]:
            j += 1
        g3 = j
        row = cum4[g4]
        x = u[3]
        j = 0
        while x >= row[j]:
            j += 1
        g4 = j

    return EpisodeRecord(
        lifetime=K,
        secure_bits=secure,
        weighted_bits=weighted if discount is not None else secure,
        transmitted_energy=spent,
        harvested_s=harv_s,
        harvested_d=harv_d,
        final_b_s=b_s,
        final_b_d=b_d,
        trace=trace,
    )


def sample_next_state_index(
    system: SimSystem, s_index: int, a_index: int, rng: np.random.Generator
) -> int:
    """One transition sample with the episode dynamics; kernel cross-check aid."""
    g1, g2, g3, g4, b_s, b_d = decode_state(system, s_index)
    u = rng.random(6)
    b_s -= system.debit_s[a_index]
    b_d -= system.debit_d[a_index]
    if b_s < 0 or b_d < 0:
        raise ValueError("infeasible action for this state")
    if u[4] < system.p_harv_s:
        b_s = min(b_s + system.e_h, system.b_max_s)
    if u[5] < system.p_harv_d:
        b_d = min(b_d + system.e_h, system.b_max_d)
    digits = []
    for j, g in enumerate((g1, g2, g3, g4)):
        row = system.cum[j][g]
        lvl = 0
        while u[j] >= row[lvl]:
            lvl += 1
        digits.append(lvl)
    L = system.levels
    idx = ((digits[0] * L + digits[1]) * L + digits[2]) * L + digits[3]
    return (idx * system.rb_s + b_s) * system.rb_d + b_d


def energy_efficiency_of(record: EpisodeRecord) -> float:
    """Secure bits per energy unit; 0 by convention when nothing was spent."""
    if record.transmitted_energy == 0:
        return 0.0
    return record.secure_bits / record.transmitted_energy


def episode_rng(seed: int, episode: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, episode))))


def discounted_horizon(gamma: float, truncation: float) -> int:
    """Smallest K with gamma^K < truncation (>= 1)."""
    if gamma == 0.0:
        return 1
    return max(1, math.ceil(math.log(truncation) / math.log(gamma)))


def estimate(action_table, system: SimSystem, config: SimConfig) -> MetricsSummary:
    """Run the configured number of independent episodes and summarize.

    Episode substreams are derived from (seed, episode index); accumulation is
    in ascending episode order, so results do not depend on execution order.
    """
    rewards = np.empty(config.episodes)
    effs = np.empty(config.episodes)
    discount = config.gamma if config.mode == "discounted" else None
    fixed_k = (
        discounted_horizon(config.gamma, config.discount_truncation)
        if config.mode == "discounted"
        else None
    )
    for i in range(config.episodes):
        rng = episode_rng(config.seed, i)
        K = fixed_k if fixed_k is not None else sample_lifetime(config.gamma, rng)
        rec = run_episode(action_table, system, config.s0_index, K, rng, discount=discount)
        rewards[i] = rec.weighted_bits
        effs[i] = energy_efficiency_of(rec)
    n = config.episodes
    r_se = float(rewards.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    e_se = float(effs.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MetricsSummary(
        mean_reward=float(rewards.mean()),
        reward_stderr=r_se,
        mean_energy_efficiency=float(effs.mean()),
        ee_stderr=e_se,
        episodes=n,
    )


def initial_state_index(model: SystemModel, dims: StateDims) -> int:
    """Default start: every link at its top gain level, both batteries full."""
    top = model.channel.n_levels - 1
    s0 = SystemState(top, top, top, top, dims.b_s_max, dims.b_d_max)
    return state_index(s0, dims)


def restricted_initial_state_index(model: SystemModel, dims: RestrictedDims) -> int:
    top = model.channel.n_levels - 1
    return restricted_state_index((top, top, top, top), dims.b_max, dims)
