"""Planning: policy iteration (Gauss-Seidel evaluation + greedy improvement),
a value-iteration oracle for cross-checks, and reduced-state planning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mdp import Kernel


@dataclass
class Policy:
    """State-index -> action-index table.

    `actions[s] == -1` marks states the plan does not cover (reduced-state
    plans only). `planned` is the sorted array of covered state indices; None
    means full coverage.
    """

    actions: np.ndarray
    gamma: float
    planned: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def covers(self, s: int) -> bool:
        return self.actions[s] >= 0

    @property
    def planned_count(self) -> int:
        return int(len(self.planned) if self.planned is not None else len(self.actions))


def policy_evaluation(
    kernel: Kernel,
    actions: np.ndarray,
    v0: np.ndarray,
    gamma: float,
    epsilon: float,
    states: np.ndarray | None = None,
) -> np.ndarray:
    """In-place Gauss-Seidel sweeps in ascending state order until the max
    per-sweep change drops below epsilon. Returns the updated table (same
    array as v0)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if states is None:
        states = np.arange(kernel.n_states)
    v = v0
    rewards = kernel.rewards
    trans = kernel.transitions
    order = [int(s) for s in states]
    rows = [(s, float(rewards[s, actions[s]])) + trans[s][int(actions[s])] for s in order]
    while True:
        delta = 0.0
        for s, r, idx, pr in rows:
            nv = r + gamma * float(pr @ v[idx])
            d = abs(nv - v[s])
            if d > delta:
                delta = d
            v[s] = nv
        if delta < epsilon:
            return v


def policy_improvement(
    kernel: Kernel,
    v: np.ndarray,
    gamma: float,
    previous: np.ndarray | None = None,
    states: np.ndarray | None = None,
) -> tuple[np.ndarray, bool]:
    """Greedy action per state, ties broken by lowest action index. `stable`
    is True iff no action differs from `previous` (always False without one)."""
    if states is None:
        states = np.arange(kernel.n_states)
    actions = previous.copy() if previous is not None else np.full(kernel.n_states, -1, dtype=np.int64)
    rewards = kernel.rewards
    trans = kernel.transitions
    stable = previous is not None
    for s in states:
        s = int(s)
        best_q = -np.inf
        best_a = -1
        row = trans[s]
        for a in kernel.feasible[s]:
            idx, pr = row[a]
            q = rewards[s, a] + gamma * float(pr @ v[idx])
            if q > best_q:
                best_q = q
                best_a = a
        if previous is not None and best_a != previous[s]:
            stable = False
        actions[s] = best_a
    return actions, stable


def policy_iteration(
    kernel: Kernel, gamma: float, epsilon: float
) -> tuple[Policy, np.ndarray, int]:
    """Alternate evaluation and improvement from v=0 and the all-(0,0) policy
    until the policy is stable. Returns (policy, value table, iterations)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must be in [0,1)")
    actions = np.zeros(kernel.n_states, dtype=np.int64)
    v = np.zeros(kernel.n_states)
    iterations = 0
    while True:
        iterations += 1
        v = policy_evaluation(kernel, actions, v, gamma, epsilon)
        actions, stable = policy_improvement(kernel, v, gamma, previous=actions)
        if stable:
            return Policy(actions=actions, gamma=gamma), v, iterations


def value_iteration_oracle(kernel: Kernel, gamma: float, tolerance: float) -> np.ndarray:
    """Two-table Bellman-operator fixed point from v=0; testing oracle,
    deliberately independent of the policy-iteration path."""
    v = np.zeros(kernel.n_states)
    rewards = kernel.rewards
    trans = kernel.transitions
    while True:
        v_new = np.empty_like(v)
        for s in range(kernel.n_states):
            row = trans[s]
            best = -np.inf
            for a in kernel.feasible[s]:
                idx, pr = row[a]
                q = rewards[s, a] + gamma * float(pr @ v[idx])
                if q > best:
                    best = q
            v_new[s] = best
        if float(np.max(np.abs(v_new - v))) < tolerance:
            return v_new
        v = v_new


def bellman_residual(kernel: Kernel, actions: np.ndarray, v: np.ndarray, gamma: float) -> float:
    """max_s |v(s) - (R(s,d(s)) + gamma * P v)| over covered states."""
    worst = 0.0
    for s in range(kernel.n_states):
        a = int(actions[s])
        if a < 0:
            continue
        idx, pr = kernel.transitions[s][a]
        worst = max(worst, abs(v[s] - (kernel.rewards[s, a] + gamma * float(pr @ v[idx]))))
    return worst


def _restrict_kernel(
    kernel: Kernel, subset: np.ndarray, gamma: float, outside_value: np.ndarray | None
) -> Kernel:
    """Sub-kernel over `subset` (sorted state indices). Transition mass leaving
    the subset is dropped (zero bootstrap) or folded into the reward as a
    constant gamma-discounted term when `outside_value` is given."""
    remap = np.full(kernel.n_states, -1, dtype=np.int64)
    remap[subset] = np.arange(len(subset))
    n_sub = len(subset)
    feasible = [kernel.feasible[int(s)] for s in subset]
    rewards = kernel.rewards[subset].copy()
    transitions: list[dict[int, tuple[np.ndarray, np.ndarray]]] = []
    for i, s in enumerate(subset):
        rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for a in kernel.feasible[int(s)]:
            idx, pr = kernel.transitions[int(s)][a]
            mapped = remap[idx]
            inside = mapped >= 0
            rows[a] = (mapped[inside], pr[inside].copy())
            if outside_value is not None and not inside.all():
                out = ~inside
                rewards[i, a] += gamma * float(pr[out] @ outside_value[idx[out]])
        transitions.append(rows)
    return Kernel(n_sub, kernel.n_actions, feasible, transitions, rewards)


def reduced_state_plan(
    kernel: Kernel,
    gamma: float,
    epsilon: float,
    fraction: float,
    rng: np.random.Generator,
    include_state: int | None = None,
    outside_bootstrap: str = "zero",
) -> Policy:
    """Plan over a uniformly sampled subset of ceil(fraction * N_S) states.

    Backups treat out-of-subset successors as worth 0 ("zero" bootstrap) or as
    worth their best immediate reward ("greedy"). `include_state` is forced
    into the subset so the first simulation lookup always hits.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must be in (0,1]")
    n = kernel.n_states
    size = int(np.ceil(fraction * n))
    chosen = rng.choice(n, size=size, replace=False)
    if include_state is not None and include_state not in chosen:
        # keep the subset size: swap the forced state in for a sampled one
        chosen[0] = include_state
    subset = np.sort(np.unique(chosen))

    if outside_bootstrap == "zero":
        outside = None
    elif outside_bootstrap == "greedy":
        outside = np.array(
            [max(kernel.rewards[s, a] for a in kernel.feasible[s]) for s in range(n)]
        )
    else:
        raise ValueError(f"unknown bootstrap {outside_bootstrap!r}")

    sub = _restrict_kernel(kernel, subset, gamma, outside)
    sub_policy, _, _ = policy_iteration(sub, gamma, epsilon)

    actions = np.full(n, -1, dtype=np.int64)
    actions[subset] = sub_policy.actions
    return Policy(
        actions=actions,
        gamma=gamma,
        planned=subset,
        meta={
            "fraction": fraction,
            "outside_bootstrap": outside_bootstrap,
            "forced_state": include_state,
        },
    )
