"""Flat key=value experiment configuration.

Unknown keys are rejected; missing keys take the documented defaults (the
standard benchmark parameter set: 2 MHz bandwidth, two-level channels, 5-unit
batteries, {0, 0.5, 1, 2} mW power set, and so on).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

from .model import (
    ChannelModel,
    EnergyModel,
    ModelValidationError,
    RadioModel,
    SystemModel,
)
from .selectors import Algorithm


class ConfigError(ValueError):
    """Bad configuration file or value."""


DEFAULT_GAIN_LEVELS = (1.655e-13, 3.311e-13)
DEFAULT_TRANSITION = ((0.9, 0.1), (0.1, 0.9))
DEFAULT_POWER_LEVELS_MW = (0.0, 0.5, 1.0, 2.0)

_LINK_KEYS = {
    "channel_transition_sd": "SD",
    "channel_transition_se": "SE",
    "channel_transition_dd": "DD",
    "channel_transition_de": "DE",
}

_KNOWN_KEYS = {
    "gamma", "p", "q", "e_h_units", "b_s_max", "b_d_max", "ts_ms", "tx_ms",
    "energy_unit_uj", "bandwidth_hz", "noise_psd_w_per_hz", "alpha",
    "power_levels_mw", "gain_levels", "channel_transition", "epsilon",
    "episodes", "seed", "algorithm", "subset_fraction", "fixed_power_mw",
    "mode", "out",
} | set(_LINK_KEYS)


@dataclass(frozen=True)
class ExperimentConfig:
    gamma: float = 0.9
    p: float = 0.8
    q: float = 0.8
    e_h_units: int = 2
    b_s_max: int = 5
    b_d_max: int = 5
    ts_ms: float = 10.0
    tx_ms: float = 5.0
    energy_unit_uj: float = 2.5
    bandwidth_hz: float = 2e6
    noise_psd_w_per_hz: float = 10.0 ** -20.4
    alpha: float = 1e-5
    power_levels_mw: tuple[float, ...] = DEFAULT_POWER_LEVELS_MW
    gain_levels: tuple[float, ...] = DEFAULT_GAIN_LEVELS
    channel_transition: dict[str, tuple[tuple[float, ...], ...]] = field(
        default_factory=lambda: {k: DEFAULT_TRANSITION for k in ("SD", "SE", "DD", "DE")}
    )
    epsilon: float = 0.07
    episodes: int = 10_000
    seed: int = 1
    algorithm: Algorithm = Algorithm.OJPA
    subset_fraction: float = 0.5
    # fixed mains power for the non-harvesting node in itpa/ijpa; the top
    # power level reproduces the published efficiency ordering (ijpa > itpa)
    fixed_power_mw: float = 2.0
    mode: str = "sampled"
    out: str | None = None

    def system_model(self) -> SystemModel:
        try:
            channel = ChannelModel(levels=self.gain_levels, transitions=dict(self.channel_transition))
            energy = EnergyModel(
                harvest_units=self.e_h_units,
                p_source=self.p,
                p_dest=self.q,
                b_max_source=self.b_s_max,
                b_max_dest=self.b_d_max,
                unit_joules=self.energy_unit_uj * 1e-6,
            )
            radio = RadioModel(
                bandwidth_hz=self.bandwidth_hz,
                noise_psd=self.noise_psd_w_per_hz,
                alpha=self.alpha,
                slot_seconds=self.ts_ms * 1e-3,
                tx_seconds=self.tx_ms * 1e-3,
                power_levels=tuple(mw * 1e-3 for mw in self.power_levels_mw),
            )
            return SystemModel(channel, energy, radio)
        except ModelValidationError as exc:
            raise ConfigError(str(exc)) from exc

    def fixed_power_index(self) -> int:
        for i, mw in enumerate(self.power_levels_mw):
            if abs(mw - self.fixed_power_mw) <= 1e-12 * max(1.0, abs(mw)):
                return i
        raise ConfigError(
            f"fixed_power_mw={self.fixed_power_mw} is not one of the discrete "
            f"power levels {self.power_levels_mw}"
        )

    def with_updates(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)

    def canonical_text(self) -> str:
        """Deterministic flat rendering, used for the replay hash."""
        trans = ";".join(
            link + ":" + ",".join(repr(x) for row in self.channel_transition[link] for x in row)
            for link in ("SD", "SE", "DD", "DE")
        )
        items = [
            ("gamma", repr(self.gamma)),
            ("p", repr(self.p)),
            ("q", repr(self.q)),
            ("e_h_units", str(self.e_h_units)),
            ("b_s_max", str(self.b_s_max)),
            ("b_d_max", str(self.b_d_max)),
            ("ts_ms", repr(self.ts_ms)),
            ("tx_ms", repr(self.tx_ms)),
            ("energy_unit_uj", repr(self.energy_unit_uj)),
            ("bandwidth_hz", repr(self.bandwidth_hz)),
            ("noise_psd_w_per_hz", repr(self.noise_psd_w_per_hz)),
            ("alpha", repr(self.alpha)),
            ("power_levels_mw", ",".join(repr(x) for x in self.power_levels_mw)),
            ("gain_levels", ",".join(repr(x) for x in self.gain_levels)),
            ("channel_transition", trans),
            ("epsilon", repr(self.epsilon)),
            ("episodes", str(self.episodes)),
            ("seed", str(self.seed)),
            ("algorithm", self.algorithm.value),
            ("subset_fraction", repr(self.subset_fraction)),
            ("fixed_power_mw", repr(self.fixed_power_mw)),
            ("mode", self.mode),
        ]
        return "\n".join(f"{k}={v}" for k, v in items)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:12]

    def validate(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must be in [0,1)")
        for name, val in (("p", self.p), ("q", self.q)):
            if not 0.0 <= val <= 1.0:
                raise ConfigError(f"{name} must be a probability in [0,1], got {val}")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        if not 0.0 < self.subset_fraction <= 1.0:
            raise ConfigError("subset_fraction must be in (0,1]")
        if self.mode not in ("sampled", "discounted"):
            raise ConfigError(f"mode must be sampled or discounted, got {self.mode!r}")
        self.fixed_power_index()
        self.system_model()  # validates all model invariants


def _parse_float_list(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {raw!r}") from exc


def _parse_matrix(raw: str) -> tuple[tuple[float, ...], ...]:
    flat = _parse_float_list(raw)
    n = int(round(len(flat) ** 0.5))
    if n * n != len(flat):
        raise ConfigError(f"channel transition needs a square row-major list, got {len(flat)} values")
    return tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n))


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    updates: dict = {}
    link_mats: dict[str, tuple[tuple[float, ...], ...]] = {}
    shared_mat = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in ("e_h_units", "b_s_max", "b_d_max", "episodes", "seed"):
                updates[key] = int(raw)
            elif key in ("power_levels_mw", "gain_levels"):
                updates[key] = _parse_float_list(raw)
            elif key == "channel_transition":
                shared_mat = _parse_matrix(raw)
            elif key in _LINK_KEYS:
                link_mats[_LINK_KEYS[key]] = _parse_matrix(raw)
            elif key == "algorithm":
                updates[key] = Algorithm(raw.lower())
            elif key in ("mode", "out"):
                updates[key] = raw
            else:
                updates[key] = float(raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {raw!r}") from exc

    base = shared_mat if shared_mat is not None else DEFAULT_TRANSITION
    trans = {link: link_mats.get(link, base) for link in ("SD", "SE", "DD", "DE")}
    updates["channel_transition"] = trans
    cfg = cfg.with_updates(**updates)
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
