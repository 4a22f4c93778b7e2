"""Experiment configuration.

The config file is a flat YAML mapping; every key is optional and defaults to
the reference simulation setting.  Example::

    num_rrus: 8
    pilot_lengths: [16, 64, 256, 1024]
    trials: 2000
    seed: 7
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import yaml

from ..beamforming import UcaDescriptor
from ..channel import PathLossParams
from ..protocol import METHODS, ProtocolParams
from ..units import dbm_to_watt

PRESETS = {
    "fig3": {"pilot_lengths": [16, 32, 64, 128, 256, 512, 1024]},
    "fig4": {"pilot_lengths": [1024]},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # array and layout
    num_antennas: int = 32
    num_rrus: int = 8
    num_users: int = 8
    cell_radius_m: float = 400.0
    rru_ring_radius_m: float = 200.0
    rru_rotation_rad: float = 0.0
    # radio
    carrier_ghz: float = 28.0
    bandwidth_mhz: float = 100.0   # metadata only
    p_sum_dbm: float = 30.0
    noise_dbm: float = -88.0
    num_nlos_paths: int = 3
    blockage_scale_m: float = 200.0
    los_intercept_db: float = 61.4
    los_exponent: float = 2.0
    nlos_intercept_db: float = 72.0
    nlos_exponent: float = 2.92
    los_shadowing_db: float = 0.0
    nlos_shadowing_db: float = 0.0
    min_distance_m: float = 1.0
    independent_los_aod: bool = False
    # protocol
    codebook_size: int = 32
    stage1_size: int = 16
    stage2_size: int = 16
    delay_parity: bool = True
    ftpa_decay: float = 0.5
    range_mu: float = 0.8
    range_sigma: float = 0.2
    theta_min_rad: float | None = None
    pbr_bits: int = 0
    pbr_range_db: tuple[float, float] = (-10.0, 30.0)
    pilot_lengths: tuple[int, ...] = (16, 32, 64, 128, 256, 512, 1024)
    uplink_pilot_length: int | None = None   # None: same as the downlink pilot length
    uplink_power_dbm: float | None = None    # None: p_sum / K
    # run control
    methods: tuple[str, ...] = METHODS
    trials: int = 5000
    seed: int = 0
    workers: int = 1
    output_dir: str = "results"
    preset: str | None = None
    plots: bool = True
    trace: bool = False
    cdf_points: int = 200

    def __post_init__(self):
        object.__setattr__(self, "pilot_lengths", tuple(int(t) for t in self.pilot_lengths))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "pbr_range_db", tuple(float(x) for x in self.pbr_range_db))
        self.validate()

    def validate(self) -> None:
        if self.num_rrus != self.num_users:
            raise ConfigError("num_rrus must equal num_users")
        if self.num_rrus < 1 or self.num_antennas < 1:
            raise ConfigError("need at least one RRU and one antenna")
        if self.delay_parity and self.stage1_size + self.stage2_size != self.codebook_size:
            raise ConfigError("delay parity requires stage1_size + stage2_size == codebook_size")
        if min(self.stage1_size, self.stage2_size, self.codebook_size) < 2:
            raise ConfigError("every codebook needs at least 2 beams (PBR is undefined otherwise)")
        if not self.pilot_lengths or min(self.pilot_lengths) < self.num_rrus:
            raise ConfigError("pilot lengths must be >= the number of RRUs")
        if not 0 < self.rru_ring_radius_m <= self.cell_radius_m:
            raise ConfigError("RRU ring must lie inside the cell")
        if self.blockage_scale_m <= 0 or self.range_sigma < 0:
            raise ConfigError("blockage scale must be positive and range_sigma non-negative")
        if not 0 <= self.ftpa_decay <= 1:
            raise ConfigError("ftpa_decay must lie in [0, 1]")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if self.trials < 1 or self.workers < 1:
            raise ConfigError("trials and workers must be positive")
        if self.preset is not None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")

    @property
    def p_sum_w(self) -> float:
        return float(dbm_to_watt(self.p_sum_dbm))

    @property
    def noise_var_w(self) -> float:
        return float(dbm_to_watt(self.noise_dbm))

    @property
    def uplink_power_w(self) -> float:
        if self.uplink_power_dbm is None:
            return self.p_sum_w / self.num_users
        return float(dbm_to_watt(self.uplink_power_dbm))

    def uca(self) -> UcaDescriptor:
        return UcaDescriptor.at_carrier(self.num_antennas, self.carrier_ghz)

    def path_loss(self) -> PathLossParams:
        return PathLossParams(
            los_intercept_db=self.los_intercept_db, los_exponent=self.los_exponent,
            nlos_intercept_db=self.nlos_intercept_db, nlos_exponent=self.nlos_exponent,
            carrier_ghz=self.carrier_ghz, blockage_scale_m=self.blockage_scale_m,
            los_shadowing_db=self.los_shadowing_db, nlos_shadowing_db=self.nlos_shadowing_db)

    def protocol_params(self, pilot_length: int) -> ProtocolParams:
        return ProtocolParams(
            uca=self.uca(), p_sum_w=self.p_sum_w, noise_var_w=self.noise_var_w,
            pilot_length=pilot_length, codebook_size=self.codebook_size,
            stage1_size=self.stage1_size, stage2_size=self.stage2_size,
            ftpa_decay=self.ftpa_decay, range_mu=self.range_mu, range_sigma=self.range_sigma,
            theta_min_rad=self.theta_min_rad if self.theta_min_rad is not None else math.pi / self.stage2_size,
            pbr_bits=self.pbr_bits, pbr_range_db=self.pbr_range_db)

    def with_overrides(self, **overrides) -> ExperimentConfig:
        overrides = {k: v for k, v in overrides.items() if v is not None}
        preset = overrides.get("preset")
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset {preset!r}")
            overrides = {**PRESETS[preset], **overrides}
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, value in d.items():
            if isinstance(value, tuple):
                d[key] = list(value)
        return d


def load_config(path) -> ExperimentConfig:
    """Read a flat YAML mapping; unknown keys are rejected."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text()) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a key-value mapping at top level")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    return ExperimentConfig().with_overrides(**raw)
