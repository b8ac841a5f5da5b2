import numpy as np
import pytest

from secrecyplan.mdp import Kernel
from secrecyplan.planner import (
    bellman_residual,
    policy_evaluation,
    policy_improvement,
    policy_iteration,
    reduced_state_plan,
    value_iteration_oracle,
)


def make_kernel(trans, rewards, feasible=None):
    """Small dense test MDP: trans[s][a] = list of (next, prob)."""
    n_states = len(trans)
    n_actions = max(len(row) for row in trans)
    feas = feasible or [list(range(len(row))) for row in trans]
    transitions = []
    reward_table = np.zeros((n_states, n_actions))
    for s, row in enumerate(trans):
        d = {}
        for a in feas[s]:
            pairs = row[a]
            d[a] = (
                np.array([j for j, _ in pairs], dtype=np.int64),
                np.array([p for _, p in pairs]),
            )
            reward_table[s, a] = rewards[s][a]
        transitions.append(d)
    return Kernel(n_states, n_actions, feas, transitions, reward_table)


def single_state_loop(r):
    return make_kernel([[[(0, 1.0)]]], [[r]])


class TestPolicyEvaluation:
    def test_gamma_zero_is_one_sweep_of_rewards(self):
        k = make_kernel(
            [[[(1, 1.0)], [(0, 1.0)]], [[(0, 1.0)], [(1, 1.0)]]],
            [[3.0, 1.0], [2.0, 5.0]],
        )
        v = policy_evaluation(k, np.array([0, 1]), np.zeros(2), gamma=0.0, epsilon=1e-9)
        assert v == pytest.approx([3.0, 5.0])

    def test_self_loop_geometric_series(self):
        k = single_state_loop(2.0)
        v = policy_evaluation(k, np.array([0]), np.zeros(1), gamma=0.5, epsilon=1e-10)
        assert v[0] == pytest.approx(4.0, abs=1e-8)

    def test_three_state_chain_matches_linear_solve(self):
        # deterministic chain 0 -> 1 -> 2 -> 0 with one action each
        trans = [[[(1, 1.0)]], [[(2, 1.0)]], [[(0, 1.0)]]]
        rewards = [[1.0], [2.0], [4.0]]
        gamma, eps = 0.9, 1e-10
        k = make_kernel(trans, rewards)
        v = policy_evaluation(k, np.zeros(3, dtype=np.int64), np.zeros(3), gamma, eps)
        # independent oracle: solve (I - gamma P) v = r
        P = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
        r = np.array([1.0, 2.0, 4.0])
        expect = np.linalg.solve(np.eye(3) - gamma * P, r)
        assert v == pytest.approx(expect, abs=eps * (1 + gamma) / (1 - gamma) + 1e-8)

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ValueError):
            policy_evaluation(single_state_loop(1.0), np.array([0]), np.zeros(1), 0.5, 0.0)


class TestPolicyImprovement:
    def test_zero_values_give_immediate_reward_argmax(self):
        k = make_kernel(
            [[[(0, 1.0)], [(1, 1.0)]], [[(0, 1.0)], [(1, 1.0)]]],
            [[1.0, 7.0], [4.0, 2.0]],
        )
        actions, stable = policy_improvement(k, np.zeros(2), gamma=0.9)
        assert list(actions) == [1, 0]
        assert stable is False  # no previous policy supplied

    def test_singleton_action_set(self):
        k = make_kernel([[[(0, 1.0)], None]], [[2.0, 0.0]], feasible=[[0]])
        actions, _ = policy_improvement(k, np.zeros(1), gamma=0.5)
        assert actions[0] == 0

    def test_tie_breaks_to_lowest_action_index(self):
        k = make_kernel([[[(0, 1.0)], [(0, 1.0)]]], [[3.0, 3.0]])
        actions, _ = policy_improvement(k, np.zeros(1), gamma=0.5)
        assert actions[0] == 0

    def test_two_state_two_action_vs_exhaustive_policies(self):
        # hand MDP: action 0 stays, action 1 jumps to the other state
        trans = [
            [[(0, 1.0)], [(1, 1.0)]],
            [[(1, 1.0)], [(0, 1.0)]],
        ]
        rewards = [[1.0, 0.0], [3.0, 0.5]]
        gamma = 0.9
        k = make_kernel(trans, rewards)

        # oracle: evaluate all four stationary policies exactly
        def exact_value(policy):
            P = np.zeros((2, 2))
            r = np.zeros(2)
            for s, a in enumerate(policy):
                for j, p in trans[s][a]:
                    P[s, j] = p
                r[s] = rewards[s][a]
            return np.linalg.solve(np.eye(2) - gamma * P, r)

        best = max(
            [(a0, a1) for a0 in (0, 1) for a1 in (0, 1)],
            key=lambda pol: tuple(exact_value(pol)),
        )
        policy, v, _ = policy_iteration(k, gamma, epsilon=1e-10)
        assert tuple(policy.actions) == best
        assert v == pytest.approx(exact_value(best), abs=1e-6)


class TestPolicyIteration:
    def test_all_zero_rewards_give_zero_policy(self):
        k = make_kernel(
            [[[(0, 1.0)], [(1, 1.0)]], [[(1, 1.0)], [(0, 1.0)]]],
            [[0.0, 0.0], [0.0, 0.0]],
        )
        policy, v, _ = policy_iteration(k, 0.9, 1e-8)
        assert list(policy.actions) == [0, 0]
        assert v == pytest.approx([0.0, 0.0])

    def test_benchmark_values_match_value_iteration(self, table_kernel):
        gamma, eps = 0.9, 0.07
        policy, v, _ = policy_iteration(table_kernel, gamma, eps)
        oracle = value_iteration_oracle(table_kernel, gamma, tolerance=1e-8)
        assert np.max(np.abs(v - oracle)) < 2 * eps / (1 - gamma)
        assert bellman_residual(table_kernel, policy.actions, v, gamma) < eps

    def test_gamma_zero_policy_maximizes_immediate_reward(self, table_kernel):
        policy, _, _ = policy_iteration(table_kernel, 0.0, 1e-9)
        for s in range(table_kernel.n_states):
            best = max(table_kernel.rewards[s, a] for a in table_kernel.feasible[s])
            assert table_kernel.rewards[s, policy.actions[s]] == pytest.approx(best)

    def test_positive_scaling_leaves_policy_unchanged(self, table_kernel):
        policy, _, _ = policy_iteration(table_kernel, 0.9, 0.07)
        scaled = Kernel(
            table_kernel.n_states,
            table_kernel.n_actions,
            table_kernel.feasible,
            table_kernel.transitions,
            table_kernel.rewards * 10.0,
        )
        policy10, v10, _ = policy_iteration(scaled, 0.9, 0.07 * 10.0)
        assert np.array_equal(policy.actions, policy10.actions)

    def test_monotone_improvement(self, table_kernel):
        # each improvement step's policy evaluates at least as high as its
        # predecessor, up to the evaluation tolerance
        gamma, eps = 0.9, 0.07
        actions = np.zeros(table_kernel.n_states, dtype=np.int64)
        v = np.zeros(table_kernel.n_states)
        prev_vals = None
        for _ in range(50):
            v = policy_evaluation(table_kernel, actions, v, gamma, eps)
            if prev_vals is not None:
                assert np.all(v >= prev_vals - eps)
            prev_vals = v.copy()
            actions, stable = policy_improvement(table_kernel, v, gamma, previous=actions)
            if stable:
                break
        assert stable


class TestValueIterationOracle:
    def test_gamma_zero(self):
        k = make_kernel([[[(0, 1.0)], [(0, 1.0)]]], [[2.0, 5.0]])
        v = value_iteration_oracle(k, 0.0, 1e-12)
        assert v[0] == pytest.approx(5.0)

    def test_self_loop(self):
        v = value_iteration_oracle(single_state_loop(3.0), 0.5, 1e-10)
        assert v[0] == pytest.approx(6.0, abs=1e-7)


class TestReducedStatePlan:
    def test_full_fraction_reproduces_policy_iteration(self, table_kernel):
        rng = np.random.default_rng(7)
        reduced = reduced_state_plan(table_kernel, 0.9, 0.07, 1.0, rng)
        full, _, _ = policy_iteration(table_kernel, 0.9, 0.07)
        assert np.array_equal(reduced.actions, full.actions)
        assert reduced.planned_count == table_kernel.n_states

    def test_half_fraction_subset_size(self, table_kernel):
        rng = np.random.default_rng(7)
        reduced = reduced_state_plan(table_kernel, 0.9, 0.07, 0.5, rng)
        assert reduced.planned_count == 288
        assert np.count_nonzero(reduced.actions >= 0) == 288

    def test_forced_state_included(self, table_kernel):
        rng = np.random.default_rng(7)
        reduced = reduced_state_plan(table_kernel, 0.9, 0.07, 0.1, rng, include_state=575)
        assert 575 in reduced.planned
        assert reduced.planned_count == int(np.ceil(0.1 * 576))

    def test_singleton_empty_battery_state(self, table_kernel):
        # state 0 has empty batteries: only action (0,0) is feasible
        class OneRng:
            def choice(self, n, size, replace):
                return np.array([0])

        reduced = reduced_state_plan(table_kernel, 0.9, 0.07, 1 / 576, OneRng())
        assert reduced.actions[0] == 0

    def test_deterministic_given_seed(self, table_kernel):
        a = reduced_state_plan(table_kernel, 0.9, 0.07, 0.5, np.random.default_rng(3))
        b = reduced_state_plan(table_kernel, 0.9, 0.07, 0.5, np.random.default_rng(3))
        assert np.array_equal(a.actions, b.actions)
        assert np.array_equal(a.planned, b.planned)

    def test_greedy_bootstrap_option(self, table_kernel):
        rng = np.random.default_rng(7)
        reduced = reduced_state_plan(
            table_kernel, 0.9, 0.07, 0.25, rng, outside_bootstrap="greedy"
        )
        assert reduced.planned_count == 144
        with pytest.raises(ValueError):
            reduced_state_plan(table_kernel, 0.9, 0.07, 0.25, rng, outside_bootstrap="bogus")

    def test_fraction_range_validated(self, table_kernel):
        with pytest.raises(ValueError):
            reduced_state_plan(table_kernel, 0.9, 0.07, 0.0, np.random.default_rng(1))
