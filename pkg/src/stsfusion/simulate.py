"""Monte-Carlo engine: trial generation, ROC estimation and threshold calibration."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel as ch
from .channel import ChannelParams
from .errors import InsufficientTrials
from .fusion import EXHAUSTIVE_LIMIT, RULE_NAMES, FusionInput, evaluate
from .model import DispersionSet, SystemConfig, effective_matrix, generate_dispersion_set, vec
from .sensors import H0, H1, SensorProfile, draw_decisions

WILSON_Z = 1.959963984540054
# cap on complex entries of GA held in memory per evaluation chunk
CHUNK_ENTRIES = 1 << 21


@dataclass(frozen=True)
class Scenario:
    """Everything a Monte-Carlo run needs apart from the seed and trial count."""

    system: SystemConfig
    channel: ChannelParams = field(default_factory=ChannelParams)
    profile: SensorProfile | None = None
    exhaustive_limit: int = EXHAUSTIVE_LIMIT
    fixed_deployment: bool = False

    def __post_init__(self):
        if self.profile is None:
            object.__setattr__(self, "profile", SensorProfile.iid(self.system.M))

    def with_system(self, **changes) -> "Scenario":
        return replace(self, system=replace(self.system, **changes))


@dataclass
class TrialBatch:
    n_trials: int
    stats_h0: dict
    stats_h1: dict
    master_seed: int

    @property
    def rules(self):
        return tuple(self.stats_h0)


@dataclass
class RocCurve:
    rule: str
    P_F0: np.ndarray
    P_D0: np.ndarray
    n_trials: int
    ci_pf: np.ndarray
    ci_pd: np.ndarray


@dataclass
class DetectionCurve:
    sweep_var: str
    values: list
    target_pf0: float
    P_D0: dict  # rule -> array over the sweep
    ci: dict
    n_trials: int


def wilson_halfwidth(p, n: int, z: float = WILSON_Z):
    p = np.asarray(p, dtype=float)
    return z / (1 + z * z / n) * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n))


def _frame_rng(seed: int, *key) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


_DEPLOYMENT_KEY = 7
_SELECTION_KEY = 11


def _simulate_frames(scenario: Scenario, dispersion, hypothesis, frames, seed, n_blocks):
    """Draw ``frames`` and return ``(y_vec, GA)`` stacked over all their blocks."""
    sys_, chp = scenario.system, scenario.channel
    M, N, T = sys_.M, sys_.N, sys_.block_length
    if sys_.sts_enabled:
        A = dispersion.stacked()
    else:
        A = np.ones((1, M, 1), dtype=complex)
    fixed_geom = None
    if scenario.fixed_deployment:
        fixed_geom = ch.deploy_sensors(M, chp.phi_min, chp.phi_max, _frame_rng(seed, _DEPLOYMENT_KEY))

    ys, GAs = [], []
    sqrt_rho = np.sqrt(sys_.rho)
    for f in frames:
        rng = _frame_rng(seed, hypothesis, f)
        L = min(sys_.L_f, n_blocks - f * sys_.L_f)
        geom = fixed_geom or ch.deploy_sensors(M, chp.phi_min, chp.phi_max, rng)
        lam = ch.large_scale_fading(geom, chp, rng).lam
        H = ch.draw_fading(N, M, rng, blocks=L)
        x = draw_decisions(hypothesis, scenario.profile, rng, size=L)
        q = rng.integers(0, A.shape[0], size=L)
        W = ch.draw_noise(N, T, sys_.sigma_w2, rng, blocks=L)
        G = H * np.sqrt(lam)
        G_hat = ch.corrupt_csi(G, sys_.sigma_e2, rng)
        A_q = A[q]
        S = x[:, :, None] * A_q
        ys.append(vec(sqrt_rho * G @ S + W))
        GAs.append(effective_matrix(G_hat, A_q))
    return np.concatenate(ys), np.concatenate(GAs)


def _run_range(scenario, dispersion, rules, n_trials, seed, frame_lo, frame_hi):
    """Statistics for frames ``[frame_lo, frame_hi)`` under both hypotheses."""
    sys_ = scenario.system
    per_frame = sys_.L_f * sys_.N * sys_.block_length * sys_.M
    chunk = max(1, CHUNK_ENTRIES // per_frame)
    out = {}
    for hyp in (H0, H1):
        parts = {r: [] for r in rules}
        for lo in range(frame_lo, frame_hi, chunk):
            frames = range(lo, min(lo + chunk, frame_hi))
            y, GA = _simulate_frames(scenario, dispersion, hyp, frames, seed, n_trials)
            inp = FusionInput(y, GA, sys_.rho, sys_.sigma_w2, scenario.profile,
                              N=sys_.N, exhaustive_limit=scenario.exhaustive_limit)
            for name, values in evaluate(inp, rules).items():
                parts[name].append(values)
        out[hyp] = {r: np.concatenate(v) for r, v in parts.items()}
    return out


def run_trials(scenario: Scenario, rules=RULE_NAMES, n_trials: int = 1000, seed: int = 0,
               dispersion: DispersionSet | None = None, workers: int = 1) -> TrialBatch:
    """Conditioned Monte-Carlo run: ``n_trials`` blocks under H0 and under H1.

    Results depend only on ``(scenario, dispersion, rules, n_trials, seed)``,
    never on ``workers``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    sys_ = scenario.system
    rules = tuple(rules)
    if sys_.sts_enabled and dispersion is None:
        dispersion = generate_dispersion_set(sys_.M, sys_.T, sys_.Q, _frame_rng(seed, _SELECTION_KEY))
    if sys_.sts_enabled and (dispersion.M, dispersion.T, dispersion.Q) != (sys_.M, sys_.T, sys_.Q):
        raise ValueError("dispersion set does not match (M, T, Q) of the system")
    n_frames = math.ceil(n_trials / sys_.L_f)

    if workers <= 1 or n_frames < 2 * workers:
        res = _run_range(scenario, dispersion, rules, n_trials, seed, 0, n_frames)
    else:
        bounds = np.linspace(0, n_frames, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_range, scenario, dispersion, rules, n_trials, seed, lo, hi)
                       for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
            pieces = [f.result() for f in futures]
        res = {h: {r: np.concatenate([p[h][r] for p in pieces]) for r in rules} for h in (H0, H1)}
    return TrialBatch(n_trials=n_trials, stats_h0=res[H0], stats_h1=res[H1], master_seed=seed)


def calibrate_threshold(stats_h0, target_pf0: float, min_exceedances: int = 20) -> float:
    """Empirical ``(1 - target)`` quantile of the H0 statistic.

    The returned threshold satisfies ``mean(stats_h0 > gamma) <= target_pf0``.
    """
    if not 0 < target_pf0 < 1:
        raise ValueError("target_pf0 must lie in (0, 1)")
    s = np.sort(np.asarray(stats_h0, dtype=float))
    n = s.size
    if target_pf0 * n < min_exceedances:
        raise InsufficientTrials(
            f"{n} H0 trials give {target_pf0 * n:.1f} expected exceedances; need {min_exceedances}"
        )
    k = int(math.floor(n * target_pf0 + 1e-9))
    return float(s[n - k - 1])


def detection_probability(stats_h0, stats_h1, target_pf0: float, min_exceedances: int = 20) -> float:
    """``P_D0`` of the Neyman-Pearson test with false-alarm rate ``target_pf0``.

    Ties at the threshold are resolved by randomization so that discrete
    statistics reach the target exactly (a point on the linearly
    interpolated ROC).
    """
    s0 = np.asarray(stats_h0, dtype=float)
    s1 = np.asarray(stats_h1, dtype=float)
    gamma = calibrate_threshold(s0, target_pf0, min_exceedances)
    above0 = np.mean(s0 > gamma)
    at0 = np.mean(s0 == gamma)
    kappa = 0.0 if at0 == 0 else min(1.0, max(0.0, (target_pf0 - above0) / at0))
    return float(np.mean(s1 > gamma) + kappa * np.mean(s1 == gamma))


def estimate_roc(batch: TrialBatch, n_points: int = 200, rules=None) -> dict:
    """Empirical ROC per rule, thresholds on a quantile grid of the H0 sample."""
    rules = batch.rules if rules is None else rules
    curves = {}
    n = batch.n_trials
    for rule in rules:
        s0 = np.asarray(batch.stats_h0[rule])
        s1 = np.asarray(batch.stats_h1[rule])
        gammas = np.unique(np.quantile(s0, np.linspace(0, 1, n_points)))[::-1]
        pf = (s0[None, :] > gammas[:, None]).mean(axis=1)
        pd = (s1[None, :] > gammas[:, None]).mean(axis=1)
        pf = np.concatenate([[0.0], pf, [1.0]])
        pd = np.concatenate([[0.0], pd, [1.0]])
        curves[rule] = RocCurve(rule, pf, pd, n, wilson_halfwidth(pf, n), wilson_halfwidth(pd, n))
    return curves


def roc_detection_at(curve: RocCurve, target_pf0: float) -> float:
    """``P_D0`` read off a ROC by linear interpolation."""
    return float(np.interp(target_pf0, curve.P_F0, curve.P_D0))


def select_dispersion_set(scenario: Scenario, n_candidates: int = 10, seed: int = 0, pilot_trials: int = 2000,
                          target_pf0: float = 0.01, candidates=None, score=None):
    """Pick the random dispersion set with the best optimum-rule ``P_D0``.

    Every candidate is scored on the same pilot seed. Returns
    ``(best_set, best_index, scores)``; ties go to the lowest index.
    """
    sys_ = scenario.system
    if candidates is None:
        rng = _frame_rng(seed, _SELECTION_KEY)
        candidates = [generate_dispersion_set(sys_.M, sys_.T, sys_.Q, rng) for _ in range(n_candidates)]
    if score is None:
        def score(cand):
            batch = run_trials(scenario, ("opt",), pilot_trials, seed, dispersion=cand)
            return detection_probability(batch.stats_h0["opt"], batch.stats_h1["opt"], target_pf0)
    scores = [float(score(c)) for c in candidates]
    best = int(np.argmax(scores))
    return candidates[best], best, scores
