"""Experiment orchestration: per-algorithm preparation (planning where
needed), grid sweeps with CSV emission, and planning wall-clock benchmarks.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .mdp import Kernel, build_kernel, joint_dims
from .model import SystemModel
from .planner import Policy, policy_iteration, reduced_state_plan
from .selectors import (
    Algorithm,
    action_costs,
    build_restricted_mdp,
    greedy_actions,
    naive_actions,
    rsjpa_actions,
)
from .simulate import (
    SimConfig,
    build_restricted_sim_system,
    build_sim_system,
    estimate,
    initial_state_index,
    restricted_initial_state_index,
)

CSV_HEADER = (
    "algorithm,gamma,p,q,bSmax,bDmax,alpha,subset_fraction,episodes,seed,"
    "mean_reward_bits,reward_stderr,energy_eff_bits_per_unit,ee_stderr,plan_seconds"
)

SWEEP_GRIDS: dict[str, tuple[float, ...]] = {
    "gamma": (0.5, 0.6, 0.7, 0.8, 0.9, 0.95),
    "eh": (0.5, 0.6, 0.7, 0.8, 0.9),
    "bsmax": (3, 4, 5, 6, 7),
    "bdmax": (3, 4, 5, 6, 7),
    "alpha": tuple(10.0**-e for e in range(8, 1, -1)),
}


def plan_rng(seed: int) -> np.random.Generator:
    """Subset-sampling stream for reduced-state planning (fixed derivation)."""
    return np.random.default_rng(seed)


@dataclass
class Prepared:
    """Everything needed to simulate one algorithm at one grid point."""

    algorithm: Algorithm
    action_table: list[int]
    system: object
    s0_index: int
    plan_seconds: float
    policy: Policy | None = None


@dataclass
class JointContext:
    """Joint kernel and simulator shared by OJPA/RSJPA/GA/NA at a grid point."""

    model: SystemModel
    kernel: Kernel
    system: object
    s0_index: int

    @classmethod
    def build(cls, config: ExperimentConfig) -> "JointContext":
        model = config.system_model()
        kernel = build_kernel(model)
        system = build_sim_system(model, kernel.rewards)
        s0 = initial_state_index(model, joint_dims(model))
        return cls(model, kernel, system, s0)


def prepare(
    config: ExperimentConfig,
    algorithm: Algorithm,
    context: JointContext | None = None,
) -> Prepared:
    """Plan (when the algorithm requires it) and assemble the action table."""
    if algorithm in (Algorithm.ITPA, Algorithm.IJPA):
        model = config.system_model()
        fixed = config.fixed_power_index()
        t0 = time.perf_counter()
        kernel, dims = build_restricted_mdp(algorithm, model, fixed)
        policy, _, _ = policy_iteration(kernel, config.gamma, config.epsilon)
        plan_s = time.perf_counter() - t0
        system = build_restricted_sim_system(model, algorithm, fixed, kernel.rewards)
        s0 = restricted_initial_state_index(model, dims)
        return Prepared(algorithm, [int(a) for a in policy.actions], system, s0, plan_s, policy)

    ctx = context if context is not None else JointContext.build(config)
    kernel, model = ctx.kernel, ctx.model
    costs = action_costs(model)
    policy: Policy | None = None
    plan_s = 0.0

    if algorithm is Algorithm.OJPA:
        t0 = time.perf_counter()
        policy, _, _ = policy_iteration(kernel, config.gamma, config.epsilon)
        plan_s = time.perf_counter() - t0
        table = policy.actions
    elif algorithm is Algorithm.RSJPA:
        t0 = time.perf_counter()
        policy = reduced_state_plan(
            kernel,
            config.gamma,
            config.epsilon,
            config.subset_fraction,
            plan_rng(config.seed),
            include_state=ctx.s0_index,
        )
        plan_s = time.perf_counter() - t0
        table = rsjpa_actions(policy, kernel, costs)
    elif algorithm is Algorithm.GA:
        table = greedy_actions(kernel, costs)
    elif algorithm is Algorithm.NA:
        table = naive_actions(model, joint_dims(model))
    else:
        raise ValueError(f"unknown algorithm {algorithm}")

    return Prepared(algorithm, [int(a) for a in table], ctx.system, ctx.s0_index, plan_s, policy)


def simulate_prepared(config: ExperimentConfig, prep: Prepared):
    sim = SimConfig(
        gamma=config.gamma,
        episodes=config.episodes,
        s0_index=prep.s0_index,
        mode=config.mode,
        seed=config.seed,
    )
    return estimate(prep.action_table, prep.system, sim)


def _point_config(config: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    if axis == "gamma":
        return config.with_updates(gamma=float(value))
    if axis == "eh":
        return config.with_updates(p=float(value), q=float(value))
    if axis == "bsmax":
        return config.with_updates(b_s_max=int(value))
    if axis == "bdmax":
        return config.with_updates(b_d_max=int(value))
    if axis == "alpha":
        return config.with_updates(alpha=float(value))
    raise ValueError(f"unknown sweep axis {axis!r}")


def run_sweep(
    config: ExperimentConfig,
    axis: str,
    algorithms: list[Algorithm] | None = None,
    grid: tuple[float, ...] | None = None,
    time_plans: bool = False,
) -> list[dict]:
    """One row per (grid value, algorithm), in deterministic grid order.

    plan_seconds is reported as 0.0 unless `time_plans` is set, keeping the
    CSV byte-identical across reruns; use `bench` for timing studies.
    """
    if axis not in SWEEP_GRIDS:
        raise ValueError(f"unknown sweep axis {axis!r}")
    values = grid if grid is not None else SWEEP_GRIDS[axis]
    algs = algorithms if algorithms is not None else [config.algorithm]
    rows: list[dict] = []
    for value in values:
        point = _point_config(config, axis, value)
        needs_joint = any(a not in (Algorithm.ITPA, Algorithm.IJPA) for a in algs)
        ctx = JointContext.build(point) if needs_joint else None
        for alg in algs:
            prep = prepare(point, alg, context=ctx)
            metrics = simulate_prepared(point, prep)
            rows.append(
                {
                    "algorithm": alg.value,
                    "gamma": point.gamma,
                    "p": point.p,
                    "q": point.q,
                    "bSmax": point.b_s_max,
                    "bDmax": point.b_d_max,
                    "alpha": point.alpha,
                    "subset_fraction": point.subset_fraction,
                    "episodes": metrics.episodes,
                    "seed": point.seed,
                    "mean_reward_bits": metrics.mean_reward,
                    "reward_stderr": metrics.reward_stderr,
                    "energy_eff_bits_per_unit": metrics.mean_energy_efficiency,
                    "ee_stderr": metrics.ee_stderr,
                    "plan_seconds": prep.plan_seconds if time_plans else 0.0,
                }
            )
    return rows


def format_csv(rows: list[dict], config: ExperimentConfig) -> str:
    """Deterministic CSV text; the hash comment line enables exact replay."""
    out = [f"# config_hash={config.config_hash()} seed={config.seed}", CSV_HEADER]
    cols = CSV_HEADER.split(",")
    for row in rows:
        out.append(",".join(_fmt(row[c]) for c in cols))
    return "\n".join(out) + "\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[dict], path: str, config: ExperimentConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_csv(rows, config))


def bench_planning(config: ExperimentConfig, fraction: float = 0.5, runs: int = 5) -> dict:
    """Median wall-clock of full planning vs reduced-state planning on one
    shared kernel. Absolute numbers are machine-dependent; the ratio is the
    interesting part."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    ctx = JointContext.build(config)
    full_times = []
    reduced_times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        policy_iteration(ctx.kernel, config.gamma, config.epsilon)
        full_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        reduced_state_plan(
            ctx.kernel,
            config.gamma,
            config.epsilon,
            fraction,
            plan_rng(config.seed),
            include_state=ctx.s0_index,
        )
        reduced_times.append(time.perf_counter() - t0)
    full_med = statistics.median(full_times)
    red_med = statistics.median(reduced_times)
    return {
        "runs": runs,
        "fraction": fraction,
        "full_median_seconds": full_med,
        "reduced_median_seconds": red_med,
        "reduction_percent": 100.0 * (1.0 - red_med / full_med),
    }
