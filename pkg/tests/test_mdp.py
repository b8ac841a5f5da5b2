import numpy as np
import pytest

from secrecyplan.mdp import (
    Action,
    StateDims,
    SystemState,
    action_from_index,
    action_index,
    battery_branches,
    build_kernel,
    feasible_actions,
    state_from_index,
    state_index,
)
from secrecyplan.model import ChannelModel, EnergyModel, SystemModel


TABLE_DIMS = StateDims(levels=2, b_s_max=5, b_d_max=5)


class TestStateIndexing:
    def test_all_zero_state_is_zero(self):
        assert state_index(SystemState(0, 0, 0, 0, 0, 0), TABLE_DIMS) == 0

    def test_hand_computed_top_state(self):
        # ((((1*2+1)*2+1)*2+1)*6+5)*6+5
        assert state_index(SystemState(1, 1, 1, 1, 5, 5), TABLE_DIMS) == 575

    def test_round_trip_over_all_states(self):
        assert TABLE_DIMS.n_states == 576
        for i in range(576):
            assert state_index(state_from_index(i, TABLE_DIMS), TABLE_DIMS) == i

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            state_index(SystemState(2, 0, 0, 0, 0, 0), TABLE_DIMS)
        with pytest.raises(ValueError):
            state_index(SystemState(0, 0, 0, 0, 6, 0), TABLE_DIMS)
        with pytest.raises(ValueError):
            state_from_index(576, TABLE_DIMS)

    def test_action_round_trip(self):
        for i in range(16):
            assert action_index(action_from_index(i, 4), 4) == i


class TestFeasibleActions:
    COSTS = (0, 1, 2, 4)

    def test_empty_batteries_force_silence(self):
        acts = feasible_actions(SystemState(0, 0, 0, 0, 0, 0), self.COSTS)
        assert acts == [Action(0, 0)]

    def test_full_batteries_allow_everything(self):
        acts = feasible_actions(SystemState(0, 0, 0, 0, 5, 5), self.COSTS)
        assert len(acts) == 16

    def test_partial_budget(self):
        acts = feasible_actions(SystemState(0, 0, 0, 0, 1, 2), self.COSTS)
        assert acts == [Action(s, d) for s in (0, 1) for d in (0, 1, 2)]

    def test_counts_match_brute_force(self, table_model, table_dims):
        for i in range(table_dims.n_states):
            s = state_from_index(i, table_dims)
            brute = [
                Action(a, b)
                for a in range(4)
                for b in range(4)
                if self.COSTS[a] <= s.b_s and self.COSTS[b] <= s.b_d
            ]
            assert feasible_actions(s, table_model.costs) == brute

    def test_lexicographic_order(self):
        acts = feasible_actions(SystemState(0, 0, 0, 0, 5, 5), self.COSTS)
        assert acts == sorted(acts)


class TestBatteryBranches:
    def test_two_branch_marginal(self):
        branches = battery_branches(5, 4, p=0.8, e_h=2, b_max=5)
        assert [b for b, _ in branches] == [1, 3]
        assert [p for _, p in branches] == pytest.approx([0.2, 0.8])

    def test_clamp_merges_branches(self):
        assert battery_branches(5, 0, p=0.8, e_h=2, b_max=5) == [(5, 1.0)]

    def test_deterministic_harvest(self):
        assert battery_branches(2, 1, p=1.0, e_h=2, b_max=5) == [(3, 1.0)]


class TestKernel:
    def test_dimensions(self, table_kernel):
        assert table_kernel.n_states == 576
        assert table_kernel.n_actions == 16

    def test_rows_sum_to_one(self, table_kernel):
        for s in range(table_kernel.n_states):
            for a in table_kernel.feasible[s]:
                idx, pr = table_kernel.row(s, a)
                assert np.all(pr > 0.0) and np.all(pr <= 1.0)
                assert abs(pr.sum() - 1.0) < 1e-9
                assert len(np.unique(idx)) == len(idx)

    def test_successors_in_range(self, table_kernel):
        for s in range(table_kernel.n_states):
            for a in table_kernel.feasible[s]:
                idx, _ = table_kernel.row(s, a)
                assert idx.min() >= 0 and idx.max() < table_kernel.n_states

    def test_infeasible_rows_absent(self, table_kernel, table_dims):
        s = state_index(SystemState(0, 0, 0, 0, 0, 0), table_dims)
        assert set(table_kernel.transitions[s]) == {0}
        with pytest.raises(KeyError):
            table_kernel.row(s, 5)

    def test_source_battery_marginal(self, table_kernel, table_dims):
        # full source battery, source power 2 mW (4 units), destination silent
        s = state_index(SystemState(0, 0, 0, 0, 5, 5), table_dims)
        a = action_index(Action(3, 0), 4)
        idx, pr = table_kernel.row(s, a)
        marginal = {}
        for j, p in zip(idx, pr):
            b_s = state_from_index(int(j), table_dims).b_s
            marginal[b_s] = marginal.get(b_s, 0.0) + p
        assert marginal[3] == pytest.approx(0.8, abs=1e-12)
        assert marginal[1] == pytest.approx(0.2, abs=1e-12)

    def test_deterministic_chain_with_identity_channels(self, table_model):
        identity = ((1.0, 0.0), (0.0, 1.0))
        channel = ChannelModel(
            levels=table_model.channel.levels,
            transitions={k: identity for k in ("SD", "SE", "DD", "DE")},
        )
        energy = EnergyModel(2, 1.0, 1.0, 5, 5, 2.5e-6)
        model = SystemModel(channel, energy, table_model.radio)
        kernel = build_kernel(model)
        for s in range(kernel.n_states):
            for a in kernel.feasible[s]:
                idx, pr = kernel.row(s, a)
                assert len(idx) == 1
                assert pr[0] == pytest.approx(1.0)

    def test_rewards_depend_only_on_gains_and_action(self, table_kernel, table_dims, table_model):
        sA = state_index(SystemState(1, 0, 1, 0, 5, 5), table_dims)
        sB = state_index(SystemState(1, 0, 1, 0, 2, 3), table_dims)
        for a in table_kernel.feasible[sB]:
            assert table_kernel.rewards[sA, a] == table_kernel.rewards[sB, a]
        g = tuple(table_model.channel.levels[i] for i in (1, 0, 1, 0))
        from secrecyplan.model import secrecy_reward

        a = action_index(Action(3, 1), 4)
        expect = secrecy_reward(g, 2e-3, 0.5e-3, table_model.radio)
        assert table_kernel.rewards[sA, a] == pytest.approx(expect, rel=1e-12)
