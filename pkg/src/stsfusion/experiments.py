"""Paper-style experiments: ROC figures and detection-probability sweeps."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .config import PRESETS, RunConfig, preset_config
from .errors import UnknownPreset
from .simulate import (
    detection_probability,
    estimate_roc,
    run_trials,
    select_dispersion_set,
    wilson_halfwidth,
)

CSV_COLUMNS = ("rule", "mode", "series", "sweep_var", "sweep_value", "P_F0", "P_D0", "ci_halfwidth",
               "n_trials", "seed")
GAIN_PF0 = (0.01, 0.05, 0.1)


@dataclass
class SweepDescription:
    sweep_var: str
    values: list
    series_M: list
    target_pf0: float
    baseline: bool


@dataclass
class ExperimentResult:
    config: RunConfig
    rows: list = field(default_factory=list)
    dispersion: dict = field(default_factory=dict)  # point label -> DispersionSet
    selection_scores: dict = field(default_factory=dict)
    detection: dict = field(default_factory=dict)  # (mode, series, value) -> {rule: P_D0}
    gains: dict = field(default_factory=dict)  # series -> pf0 -> rule -> ratio

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps([{c: row[c] for c in CSV_COLUMNS} for row in self.rows], indent=1) + "\n"


def _fmt(value):
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def preset_experiment(name: str, **overrides):
    """Config plus sweep description for one of the paper's figures."""
    if name not in PRESETS:
        raise UnknownPreset(name)
    cfg = preset_config(name, **overrides)
    return cfg, describe_sweep(cfg)


def describe_sweep(cfg: RunConfig) -> SweepDescription:
    return SweepDescription(cfg.sweep_var, list(cfg.sweep_values) or [None], cfg.sensor_counts(),
                            cfg.target_pf0, cfg.baseline)


def _label(M, var, value):
    point = "" if var == "none" else f"_{var}={value}"
    return f"M={M}{point}"


def run_experiment(cfg: RunConfig, workers: int = 1, progress=None) -> ExperimentResult:
    sweep = describe_sweep(cfg)
    result = ExperimentResult(cfg)
    rules = tuple(cfg.rules)
    modes = ("sts", "baseline") if cfg.baseline and cfg.sts_enabled else (("sts",) if cfg.sts_enabled else ("baseline",))
    for M in sweep.series_M:
        series = f"M={M}"
        for value in sweep.values:
            point = {} if sweep.sweep_var == "none" else {sweep.sweep_var: value}
            label = _label(M, sweep.sweep_var, value)
            for mode in modes:
                scenario = cfg.scenario(M=M, sts_enabled=(mode == "sts"), **point)
                dispersion = None
                if mode == "sts":
                    dispersion, best, scores = select_dispersion_set(
                        scenario, cfg.n_candidates, seed=(cfg.seed, 1), pilot_trials=cfg.pilot_trials,
                        target_pf0=0.01)
                    result.dispersion[label] = dispersion
                    result.selection_scores[label] = {"selected": best, "scores": scores}
                if progress:
                    progress(f"{label} [{mode}]")
                batch = run_trials(scenario, rules, cfg.trials, seed=cfg.seed, dispersion=dispersion,
                                   workers=workers)
                pd_at = {}
                for rule in rules:
                    s0, s1 = batch.stats_h0[rule], batch.stats_h1[rule]
                    pd_at[rule] = {pf: detection_probability(s0, s1, pf) for pf in
                                   sorted(set(GAIN_PF0) | {cfg.target_pf0}) if pf * cfg.trials >= 20}
                result.detection[(mode, series, value)] = pd_at
                common = dict(mode=mode, series=series, sweep_var=sweep.sweep_var,
                              sweep_value="" if value is None else value, n_trials=cfg.trials, seed=cfg.seed)
                if sweep.sweep_var == "none":
                    for rule, curve in estimate_roc(batch, cfg.roc_points, rules).items():
                        for pf, pd, hw in zip(curve.P_F0, curve.P_D0, curve.ci_pd):
                            result.rows.append(dict(rule=rule, P_F0=pf, P_D0=pd, ci_halfwidth=hw, **common))
                else:
                    for rule in rules:
                        pd = pd_at[rule][cfg.target_pf0]
                        result.rows.append(dict(rule=rule, P_F0=cfg.target_pf0, P_D0=pd,
                                                ci_halfwidth=float(wilson_halfwidth(pd, cfg.trials)), **common))
            if "baseline" in modes and "sts" in modes:
                sts = result.detection[("sts", series, value)]
                base = result.detection[("baseline", series, value)]
                result.gains[label] = {
                    str(pf): {r: (sts[r][pf] / base[r][pf] if base[r][pf] > 0 else None) for r in rules}
                    for pf in GAIN_PF0 if pf in sts[rules[0]]
                }
    return result
