"""Physical model: quantized channels, Bernoulli energy harvesting, batteries,
SINR and the per-slot secrecy reward.

All energy bookkeeping is in integer energy units so battery levels (which
index the MDP state) never drift; rates are computed in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

LINKS = ("SD", "SE", "DD", "DE")


class ModelValidationError(ValueError):
    """A model parameter violates one of its invariants."""


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ModelValidationError(msg)


@dataclass(frozen=True)
class ChannelModel:
    """Quantized channel gains and their first-order Markov dynamics.

    One gain-level set is shared by all four links; each link XY in
    {SD, SE, DD, DE} carries its own row-stochastic transition matrix
    (they may all be the same object).
    """

    levels: tuple[float, ...]
    transitions: dict[str, tuple[tuple[float, ...], ...]]

    def __post_init__(self) -> None:
        _check(len(self.levels) >= 1, "need at least one gain level")
        _check(all(g > 0 for g in self.levels), "gain levels must be positive")
        _check(
            all(a < b for a, b in zip(self.levels, self.levels[1:])),
            "gain levels must be strictly increasing",
        )
        _check(set(self.transitions) == set(LINKS), "need a matrix per link SD/SE/DD/DE")
        L = len(self.levels)
        for link, mat in self.transitions.items():
            _check(len(mat) == L, f"{link}: transition matrix must be {L}x{L}")
            for row in mat:
                _check(len(row) == L, f"{link}: transition matrix must be {L}x{L}")
                _check(all(0.0 <= x <= 1.0 for x in row), f"{link}: entries must be in [0,1]")
                _check(abs(sum(row) - 1.0) <= 1e-12, f"{link}: rows must sum to 1")

    @property
    def n_levels(self) -> int:
        return len(self.levels)


@dataclass(frozen=True)
class EnergyModel:
    """Bernoulli harvesting process and battery capacities, in energy units."""

    harvest_units: int
    p_source: float
    p_dest: float
    b_max_source: int
    b_max_dest: int
    unit_joules: float

    def __post_init__(self) -> None:
        _check(0.0 <= self.p_source <= 1.0, "p_source must be a probability")
        _check(0.0 <= self.p_dest <= 1.0, "p_dest must be a probability")
        _check(self.harvest_units >= 0, "harvest_units must be >= 0")
        _check(self.b_max_source >= 0 and self.b_max_dest >= 0, "capacities must be >= 0")
        _check(self.unit_joules > 0, "unit_joules must be positive")


@dataclass(frozen=True)
class RadioModel:
    """Radio constants and the shared discrete power set (watts)."""

    bandwidth_hz: float
    noise_psd: float
    alpha: float
    slot_seconds: float
    tx_seconds: float
    power_levels: tuple[float, ...]

    def __post_init__(self) -> None:
        _check(0.0 <= self.alpha <= 1.0, "alpha must be in [0,1]")
        _check(0.0 < self.tx_seconds <= self.slot_seconds, "need 0 < tx <= slot duration")
        _check(self.bandwidth_hz > 0 and self.noise_psd > 0, "bandwidth and N0 must be positive")
        _check(len(self.power_levels) >= 1, "need at least one power level")
        _check(self.power_levels[0] == 0.0, "lowest power level must be 0")
        _check(
            all(a < b for a, b in zip(self.power_levels, self.power_levels[1:])),
            "power levels must be strictly increasing",
        )

    @property
    def n_powers(self) -> int:
        return len(self.power_levels)

    @property
    def noise_power(self) -> float:
        return self.bandwidth_hz * self.noise_psd


def energy_cost(power_index: int, radio: RadioModel, energy: EnergyModel) -> int:
    """Energy units drained by transmitting at power level `power_index` for Tx.

    The quotient power * Tx / unit must be integral; that is enforced once at
    SystemModel construction, so here a near-integer is simply rounded.
    """
    if not 0 <= power_index < radio.n_powers:
        raise ValueError(f"power index {power_index} out of range")
    exact = radio.power_levels[power_index] * radio.tx_seconds / energy.unit_joules
    units = round(exact)
    if abs(exact - units) > 1e-9 * max(1.0, abs(exact)):
        raise ModelValidationError(
            f"power level {radio.power_levels[power_index]} W does not map to "
            f"an integer number of energy units (got {exact})"
        )
    return units


def battery_next(b: int, cost: int, harvested: bool, b_max: int, e_h: int) -> int:
    """One battery update step: drain `cost`, then bank the harvest if any."""
    if cost > b:
        raise ValueError(f"cost {cost} exceeds stored energy {b}")
    if harvested:
        return min(b - cost + e_h, b_max)
    return b - cost


def sinr_pair(
    gains: tuple[float, float, float, float],
    p_s: float,
    p_d: float,
    radio: RadioModel,
) -> tuple[float, float]:
    """SINR at the destination and at the eavesdropper.

    `gains` is (G_SD, G_SE, G_DD, G_DE). The destination sees residual
    self-interference alpha * p_d * G_DD; the eavesdropper sees the full
    jamming power p_d * G_DE.
    """
    g_sd, g_se, g_dd, g_de = gains
    noise = radio.noise_power
    gamma_d = g_sd * p_s / (radio.alpha * p_d * g_dd + noise)
    gamma_e = g_se * p_s / (p_d * g_de + noise)
    return gamma_d, gamma_e


def secrecy_reward(
    gains: tuple[float, float, float, float],
    p_s: float,
    p_d: float,
    radio: RadioModel,
) -> float:
    """Secure bits delivered in one slot; never negative."""
    gamma_d, gamma_e = sinr_pair(gains, p_s, p_d, radio)
    rate = radio.bandwidth_hz * (math.log2(1.0 + gamma_d) - math.log2(1.0 + gamma_e))
    return max(rate, 0.0) * radio.tx_seconds


@dataclass(frozen=True)
class SystemModel:
    """Validated bundle of the three sub-models plus derived action costs."""

    channel: ChannelModel
    energy: EnergyModel
    radio: RadioModel
    costs: tuple[int, ...] = field(init=False)

    def __post_init__(self) -> None:
        costs = tuple(
            energy_cost(i, self.radio, self.energy) for i in range(self.radio.n_powers)
        )
        _check(costs[0] == 0, "zero power must cost zero units")
        _check(
            all(a < b for a, b in zip(costs, costs[1:])),
            "energy costs must be strictly increasing with power level",
        )
        object.__setattr__(self, "costs", costs)

    def slot_reward(self, gain_indices: tuple[int, int, int, int], i_s: int, i_d: int) -> float:
        """Secure bits for one slot given channel level indices and power indices."""
        g = tuple(self.channel.levels[i] for i in gain_indices)
        return secrecy_reward(g, self.radio.power_levels[i_s], self.radio.power_levels[i_d], self.radio)
