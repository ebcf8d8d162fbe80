"""Local sensor decisions and their conditional priors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

H0, H1 = 0, 1


@dataclass(frozen=True)
class SensorProfile:
    """Per-sensor operating points ``(P_D, P_F)``."""

    P_D: np.ndarray
    P_F: np.ndarray

    def __post_init__(self):
        pd = np.atleast_1d(np.asarray(self.P_D, dtype=float))
        pf = np.atleast_1d(np.asarray(self.P_F, dtype=float))
        if pd.shape != pf.shape or pd.ndim != 1:
            raise ValidationError("sensor_pf", f"shape {pf.shape} does not match sensor_pd {pd.shape}")
        for key, p in (("sensor_pd", pd), ("sensor_pf", pf)):
            if np.any((p < 0) | (p > 1)):
                raise ValidationError(key, "probabilities must lie in [0, 1]")
        pd.setflags(write=False)
        pf.setflags(write=False)
        object.__setattr__(self, "P_D", pd)
        object.__setattr__(self, "P_F", pf)

    @classmethod
    def iid(cls, M: int, P_D: float = 0.5, P_F: float = 0.05) -> "SensorProfile":
        return cls(np.full(M, P_D), np.full(M, P_F))

    @property
    def M(self) -> int:
        return self.P_D.size

    @property
    def informative(self) -> bool:
        return bool(np.all(self.P_F <= self.P_D))

    def p_plus(self, hypothesis: int) -> np.ndarray:
        """Probability that each sensor reports +1 under ``hypothesis``."""
        return self.P_D if hypothesis == H1 else self.P_F


@dataclass(frozen=True)
class TrialTruth:
    hypothesis: int
    x: np.ndarray


def draw_decisions(hypothesis: int, profile: SensorProfile, rng: np.random.Generator, size=None) -> np.ndarray:
    p = profile.p_plus(hypothesis)
    shape = p.shape if size is None else (size, p.size)
    return np.where(rng.random(shape) < p, 1.0, -1.0)


def log_decision_prior(x, hypothesis: int, profile: SensorProfile) -> np.ndarray:
    """``ln P(x | H)``; rows of a 2-D ``x`` are evaluated independently.

    Impossible vectors (perfect sensors) give ``-inf``.
    """
    x = np.asarray(x, dtype=float)
    p = profile.p_plus(hypothesis)
    with np.errstate(divide="ignore"):
        terms = np.where(x > 0, np.log(p), np.log1p(-p))
    return terms.sum(axis=-1)


def decision_prior(x, hypothesis: int, profile: SensorProfile):
    return np.exp(log_decision_prior(x, hypothesis, profile))


def all_decision_vectors(M: int) -> np.ndarray:
    """All ``2**M`` BPSK vectors, lexicographic with +1 before -1."""
    return np.array(list(itertools.product((1.0, -1.0), repeat=M)))
