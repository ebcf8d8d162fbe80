"""Flat-key run configuration, presets and YAML round-tripping."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .channel import ChannelParams, noise_variance
from .errors import ParseError, UnknownPreset, ValidationError
from .fusion import RULE_NAMES
from .model import SystemConfig
from .sensors import SensorProfile
from .simulate import Scenario

SWEEP_VARS = ("none", "N", "snr_db")


@dataclass
class RunConfig:
    preset: str | None = None
    # system
    M: int = 8
    N: int = 8
    T: int = 8
    Q: int = 8
    L_f: int = 1
    snr_db: float = 15.0
    rho: float | None = None  # None: 1/sqrt(N)
    sigma_w2: float | None = None  # None: derived from snr_db
    sigma_e2: float = 0.0
    sigma_e2_rel: float | None = None  # CSI error as a multiple of sigma_w2
    sts_enabled: bool = True
    baseline: bool = False  # also run the no-STS companion
    # channel
    eta: float = 2.0
    mu_lambda_dB: float = 4.0
    sigma_lambda_dB: float = 2.0
    phi_min: float = 100.0
    phi_max: float = 1000.0
    fixed_deployment: bool = False
    # sensors
    sensor_pd: float | list = 0.5
    sensor_pf: float | list = 0.05
    allow_uninformative: bool = False
    # experiment
    sweep_var: str = "none"
    sweep_values: list = field(default_factory=list)
    series_M: list = field(default_factory=list)
    target_pf0: float = 0.01
    roc_points: int = 200
    n_candidates: int = 10
    pilot_trials: int = 2000
    exhaustive_limit: int = 12
    rules: list = field(default_factory=lambda: list(RULE_NAMES))
    trials: int = 10000
    seed: int = 0

    def __post_init__(self):
        self.validate()

    # -- validation -------------------------------------------------------
    def validate(self) -> None:
        for key in ("M", "N", "T", "Q", "L_f", "roc_points", "n_candidates", "pilot_trials",
                    "exhaustive_limit", "trials"):
            _positive_int(key, getattr(self, key))
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ValidationError("seed", "must be a non-negative integer")
        for key in ("snr_db", "sigma_e2", "eta", "mu_lambda_dB", "sigma_lambda_dB", "phi_min", "phi_max",
                    "target_pf0"):
            _real(key, getattr(self, key))
        for key in ("rho", "sigma_w2", "sigma_e2_rel"):
            if getattr(self, key) is not None:
                _real(key, getattr(self, key))
        for key in ("sts_enabled", "baseline", "fixed_deployment", "allow_uninformative"):
            if not isinstance(getattr(self, key), bool):
                raise ValidationError(key, "must be true or false")
        if self.rho is not None and self.rho <= 0:
            raise ValidationError("rho", "must be > 0")
        if self.sigma_w2 is not None and self.sigma_w2 <= 0:
            raise ValidationError("sigma_w2", "must be > 0")
        if self.sigma_e2 < 0:
            raise ValidationError("sigma_e2", "must be >= 0")
        if self.sigma_e2_rel is not None:
            if self.sigma_e2_rel < 0:
                raise ValidationError("sigma_e2_rel", "must be >= 0")
            if self.sigma_e2 != 0:
                raise ValidationError("sigma_e2_rel", "set either sigma_e2 or sigma_e2_rel, not both")
        if not 0 < self.phi_min <= self.phi_max:
            raise ValidationError("phi_min", "need 0 < phi_min <= phi_max")
        if self.sigma_lambda_dB < 0:
            raise ValidationError("sigma_lambda_dB", "must be >= 0")
        if not 0 < self.target_pf0 < 1:
            raise ValidationError("target_pf0", "must lie in (0, 1)")
        if self.target_pf0 * self.trials < 20:
            raise ValidationError("trials", f"need >= {int(np.ceil(20 / self.target_pf0))} trials at target_pf0")
        if self.pilot_trials < 2000:
            raise ValidationError("pilot_trials", "dispersion selection at P_F0 = 0.01 needs >= 2000 trials")
        if self.sweep_var not in SWEEP_VARS:
            raise ValidationError("sweep_var", f"must be one of {SWEEP_VARS}")
        if not isinstance(self.sweep_values, list):
            raise ValidationError("sweep_values", "must be a list")
        if self.sweep_var == "none" and self.sweep_values:
            raise ValidationError("sweep_values", "given without a sweep_var")
        if self.sweep_var != "none" and not self.sweep_values:
            raise ValidationError("sweep_values", f"sweep over {self.sweep_var} needs values")
        for i, v in enumerate(self.sweep_values):
            if self.sweep_var == "N":
                _positive_int(f"sweep_values[{i}]", v)
            else:
                _real(f"sweep_values[{i}]", v)
        if not isinstance(self.series_M, list):
            raise ValidationError("series_M", "must be a list")
        for i, v in enumerate(self.series_M):
            _positive_int(f"series_M[{i}]", v)
        if not isinstance(self.rules, list) or not self.rules:
            raise ValidationError("rules", "must be a nonempty list")
        for r in self.rules:
            if r not in RULE_NAMES:
                raise ValidationError("rules", f"unknown rule {r!r}; choose from {', '.join(RULE_NAMES)}")
        for M in self.sensor_counts():
            self._profile(M)

    def _profile(self, M: int) -> SensorProfile:
        arrays = {}
        for key in ("sensor_pd", "sensor_pf"):
            value = getattr(self, key)
            if isinstance(value, list):
                if len(value) != M:
                    raise ValidationError(key, f"list has length {len(value)}, expected M = {M}")
                for i, v in enumerate(value):
                    _real(f"{key}[{i}]", v)
                arrays[key] = np.asarray(value, dtype=float)
            else:
                _real(key, value)
                arrays[key] = np.full(M, float(value))
        profile = SensorProfile(arrays["sensor_pd"], arrays["sensor_pf"])
        if not profile.informative and not self.allow_uninformative:
            raise ValidationError("sensor_pf", "P_F > P_D for some sensor (set allow_uninformative to permit)")
        return profile

    # -- derived objects ------------------------------------------------------
    def sensor_counts(self) -> list:
        return list(self.series_M) if self.series_M else [self.M]

    def channel_params(self) -> ChannelParams:
        return ChannelParams(self.eta, self.mu_lambda_dB, self.sigma_lambda_dB, self.phi_min, self.phi_max)

    def scenario(self, M=None, N=None, snr_db=None, sts_enabled=None) -> Scenario:
        """Scenario for one sweep point; unspecified values come from the config."""
        M = self.M if M is None else M
        N = self.N if N is None else N
        snr_db = self.snr_db if snr_db is None else snr_db
        rho = self.rho if self.rho is not None else 1 / np.sqrt(N)
        sigma_w2 = self.sigma_w2 if self.sigma_w2 is not None else noise_variance(rho, snr_db)
        sigma_e2 = self.sigma_e2 if self.sigma_e2_rel is None else self.sigma_e2_rel * sigma_w2
        sts = self.sts_enabled if sts_enabled is None else sts_enabled
        system = SystemConfig(M=M, N=N, T=self.T, Q=self.Q, L_f=self.L_f, rho=float(rho),
                              sigma_w2=float(sigma_w2), sigma_e2=float(sigma_e2), sts_enabled=sts)
        return Scenario(system, self.channel_params(), self._profile(M),
                        exhaustive_limit=self.exhaustive_limit, fixed_deployment=self.fixed_deployment)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


FIELDS = {f.name for f in dataclasses.fields(RunConfig)}

PRESETS = {
    "fig3": dict(M=8, N=8, T=8, Q=8, snr_db=15.0, eta=2.0, mu_lambda_dB=4.0, sigma_lambda_dB=2.0,
                 baseline=True, target_pf0=0.05),
    "fig4": dict(M=10, N=100, T=10, Q=10, snr_db=15.0, eta=2.0, mu_lambda_dB=4.0, sigma_lambda_dB=2.0,
                 baseline=True, target_pf0=0.05),
    # no path-loss or shadowing values are given for the tunnel scenario
    "fig5": dict(M=8, N=8, T=8, Q=8, snr_db=15.0, eta=2.0, mu_lambda_dB=4.0, sigma_lambda_dB=2.0,
                 sweep_var="N", sweep_values=[8, 16, 32, 64, 100], series_M=[4, 8], target_pf0=0.01),
    "fig6": dict(M=8, N=32, T=8, Q=8, eta=5.0, mu_lambda_dB=4.0, sigma_lambda_dB=2.0, sigma_e2_rel=1.0,
                 sweep_var="snr_db", sweep_values=[0.0, 5.0, 10.0, 15.0, 20.0], target_pf0=0.01),
}


def _positive_int(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ValidationError(key, f"must be a positive integer, got {value!r}")


def _real(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
        raise ValidationError(key, f"must be a number, got {value!r}")
    if not np.isfinite(value):
        raise ValidationError(key, "must be finite")


def from_mapping(data: dict) -> RunConfig:
    """Build a config from flat keys, expanding ``preset`` first."""
    if not isinstance(data, dict):
        raise ParseError("configuration must be a mapping of flat keys")
    unknown = sorted(set(data) - FIELDS)
    if unknown:
        raise ValidationError(unknown[0], "unknown configuration key")
    values = {}
    preset = data.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ValidationError("preset", f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        values.update(PRESETS[preset])
    values.update(data)
    for key in ("sweep_values", "series_M", "rules"):
        if key in values and isinstance(values[key], tuple):
            values[key] = list(values[key])
    if "sigma_e2" in data and "sigma_e2_rel" not in data:
        values["sigma_e2_rel"] = None
    # integer-valued floats are accepted for the real-valued keys only
    for key in ("snr_db", "sigma_e2", "eta", "mu_lambda_dB", "sigma_lambda_dB", "phi_min", "phi_max",
                "rho", "sigma_w2", "sigma_e2_rel", "target_pf0"):
        if isinstance(values.get(key), int) and not isinstance(values.get(key), bool):
            values[key] = float(values[key])
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return from_mapping(data or {})


def write_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def preset_config(name: str, **overrides) -> RunConfig:
    if name not in PRESETS:
        raise UnknownPreset(name)
    return from_mapping({"preset": name, **overrides})
