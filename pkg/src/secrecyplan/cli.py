"""Command-line interface: plan, simulate, sweep, bench."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ExperimentConfig, load_config
from .policy_io import PolicyFormatError, load_policy, save_policy
from .selectors import Algorithm
from .sweeps import (
    JointContext,
    Prepared,
    bench_planning,
    prepare,
    run_sweep,
    simulate_prepared,
    write_csv,
)


def _load(path: str | None) -> ExperimentConfig:
    if path is None:
        cfg = ExperimentConfig()
        cfg.validate()
        return cfg
    return load_config(path)


def cmd_plan(args) -> int:
    config = _load(args.config)
    alg = config.algorithm
    if alg in (Algorithm.GA, Algorithm.NA):
        print(f"{alg.value} has no planning phase; nothing to save", file=sys.stderr)
        return 2
    prep = prepare(config, alg)
    if alg in (Algorithm.ITPA, Algorithm.IJPA):
        b_s = config.b_s_max if alg is Algorithm.ITPA else -1
        b_d = config.b_d_max if alg is Algorithm.IJPA else -1
    else:
        b_s, b_d = config.b_s_max, config.b_d_max
    save_policy(
        prep.policy, args.out,
        levels=len(config.gain_levels),
        b_s_max=b_s, b_d_max=b_d,
        n_powers=len(config.power_levels_mw),
    )
    print(f"planned {prep.policy.planned_count} states in {prep.plan_seconds:.3f}s -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    config = _load(args.config)
    alg = config.algorithm
    if alg in (Algorithm.OJPA, Algorithm.RSJPA, Algorithm.ITPA, Algorithm.IJPA) and args.policy:
        prep = _prepared_from_file(config, alg, args.policy)
    else:
        prep = prepare(config, alg)
    metrics = simulate_prepared(config, prep)
    print(f"algorithm            : {alg.value}")
    print(f"episodes             : {metrics.episodes}")
    print(f"mean secure bits     : {metrics.mean_reward:.3f} +/- {metrics.reward_stderr:.3f}")
    print(
        f"energy efficiency    : {metrics.mean_energy_efficiency:.4f} "
        f"+/- {metrics.ee_stderr:.4f} bits/unit"
    )
    return 0


def _prepared_from_file(config: ExperimentConfig, alg: Algorithm, path: str) -> Prepared:
    from .selectors import action_costs, rsjpa_actions
    from .simulate import (
        build_restricted_sim_system,
        restricted_initial_state_index,
    )
    from .selectors import build_restricted_mdp

    policy, (levels, b_s, b_d, n_powers) = load_policy(path)
    if levels != len(config.gain_levels) or n_powers != len(config.power_levels_mw):
        raise PolicyFormatError("policy dimensions do not match the configuration")

    if alg in (Algorithm.ITPA, Algorithm.IJPA):
        expect = (config.b_s_max, -1) if alg is Algorithm.ITPA else (-1, config.b_d_max)
        if (b_s, b_d) != expect:
            raise PolicyFormatError("policy battery dimensions do not match the configuration")
        model = config.system_model()
        fixed = config.fixed_power_index()
        kernel, dims = build_restricted_mdp(alg, model, fixed)
        system = build_restricted_sim_system(model, alg, fixed, kernel.rewards)
        s0 = restricted_initial_state_index(model, dims)
        return Prepared(alg, [int(a) for a in policy.actions], system, s0, 0.0, policy)

    if (b_s, b_d) != (config.b_s_max, config.b_d_max):
        raise PolicyFormatError("policy battery dimensions do not match the configuration")
    ctx = JointContext.build(config)
    if alg is Algorithm.RSJPA:
        table = rsjpa_actions(policy, ctx.kernel, action_costs(ctx.model))
    else:
        table = policy.actions
    return Prepared(alg, [int(a) for a in table], ctx.system, ctx.s0_index, 0.0, policy)


def cmd_sweep(args) -> int:
    config = _load(args.config)
    algorithms = (
        [Algorithm(a.strip().lower()) for a in args.algorithms.split(",")]
        if args.algorithms
        else None
    )
    rows = run_sweep(config, args.axis, algorithms=algorithms, time_plans=args.time_plans)
    write_csv(rows, args.out, config)
    print(f"wrote {len(rows)} rows -> {args.out}")
    if args.figures:
        from .plots import render_sweep_figures

        for path in render_sweep_figures(rows, args.axis, args.figures):
            print(f"wrote figure -> {path}")
    return 0


def cmd_bench(args) -> int:
    config = _load(args.config)
    report = bench_planning(config, fraction=args.fraction, runs=args.runs)
    print(f"runs                     : {report['runs']}")
    print(f"full planning median     : {report['full_median_seconds']:.3f}s")
    print(
        f"reduced planning median  : {report['reduced_median_seconds']:.3f}s "
        f"(fraction {report['fraction']})"
    )
    print(f"reduction                : {report['reduction_percent']:.2f}%")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secrecyplan",
        description="Joint transmit/jamming power planning and simulation "
        "for an energy-harvesting link with an eavesdropper.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run the planning phase and save the look-up table")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--out", required=True, help="policy file to write")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="Monte-Carlo estimate for one algorithm")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--policy", help="saved policy file (planned algorithms)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep one axis and emit CSV (and figures)")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument(
        "--axis", required=True, choices=["gamma", "eh", "bsmax", "bdmax", "alpha"]
    )
    p.add_argument("--out", required=True, help="CSV file to write")
    p.add_argument("--algorithms", help="comma list, e.g. ojpa,ga,na (default: config value)")
    p.add_argument("--figures", help="directory for rendered PNG figures")
    p.add_argument(
        "--time-plans",
        action="store_true",
        help="record measured planning wall time (makes the CSV non-reproducible)",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="wall-clock comparison of planning phases")
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--runs", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PolicyFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
