"""Optimum and sub-optimum fusion statistics at the fusion center.

Every rule works on a :class:`FusionInput` holding the vectorized received
block ``y`` (``NT``) and the effective matrix ``GA = kron(I_T, G_hat) A_hat_q``
(``NT x M``). Leading axes of ``y`` and ``GA`` are batch axes, so one call
evaluates a whole batch of trials. All statistics follow the convention that
larger values favour H1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DegenerateProfile,
    DimensionMismatch,
    ExhaustiveLimitExceeded,
    SingularChannel,
    SingularCovariance,
)
from .sensors import H0, H1, SensorProfile, all_decision_vectors, log_decision_prior

EXHAUSTIVE_LIMIT = 12
DIAG_TOL = 1e-12
PROB_EPS = 1e-12


@dataclass(frozen=True)
class FusionInput:
    y_vec: np.ndarray
    GA: np.ndarray
    rho: float
    sigma_w2: float
    profile: SensorProfile
    N: int | None = None  # receive antennas; defaults to the row count of GA
    exhaustive_limit: int = EXHAUSTIVE_LIMIT

    def __post_init__(self):
        y = np.asarray(self.y_vec, dtype=complex)
        GA = np.asarray(self.GA, dtype=complex)
        if GA.ndim < 2 or y.shape != GA.shape[:-1]:
            raise DimensionMismatch(f"y {y.shape} incompatible with GA {GA.shape}")
        if GA.shape[-1] != self.profile.M:
            raise DimensionMismatch(f"GA has {GA.shape[-1]} columns, profile has {self.profile.M} sensors")
        object.__setattr__(self, "y_vec", y)
        object.__setattr__(self, "GA", GA)

    @property
    def M(self) -> int:
        return self.GA.shape[-1]

    @property
    def n_antennas(self) -> int:
        return self.N if self.N is not None else self.GA.shape[-2]

    @cached_property
    def matched(self) -> np.ndarray:
        """``GA^H y``, shape ``(..., M)``."""
        return np.einsum("...nm,...n->...m", self.GA.conj(), self.y_vec)

    @cached_property
    def gram(self) -> np.ndarray:
        """``GA^H GA``, shape ``(..., M, M)``."""
        return np.einsum("...nm,...nk->...mk", self.GA.conj(), self.GA)

    @cached_property
    def D_g(self) -> np.ndarray:
        return self.gram / self.n_antennas


@dataclass(frozen=True)
class AugmentedView:
    y_aug: np.ndarray
    GA_aug: np.ndarray


@dataclass(frozen=True)
class FusionOutcome:
    gamma_opt: np.ndarray
    gamma_mrc: np.ndarray
    gamma_mmrc: np.ndarray
    gamma_wl0: np.ndarray
    gamma_wl1: np.ndarray
    gamma_maxlog: np.ndarray
    gamma_cv_ml: np.ndarray
    gamma_cv_mmse: np.ndarray


def augment(u: np.ndarray) -> np.ndarray:
    """Stack ``u`` on top of its conjugate along the first non-batch axis."""
    axis = -1 if u.ndim == 1 else -2
    return np.concatenate([u, u.conj()], axis=axis)


def augmented_view(inp: FusionInput) -> AugmentedView:
    return AugmentedView(y_aug=augment(inp.y_vec), GA_aug=augment(inp.GA))


def _check_exhaustive(inp: FusionInput) -> None:
    if inp.M > inp.exhaustive_limit:
        raise ExhaustiveLimitExceeded(
            f"M={inp.M} needs 2**{inp.M} hypotheses; limit is M <= {inp.exhaustive_limit}"
        )


def _scaled_distances(inp: FusionInput, X: np.ndarray) -> np.ndarray:
    """``(||y - sqrt(rho) GA x||^2 - ||y||^2) / sigma_w2`` for every row of ``X``.

    The dropped ``||y||^2`` is common to all candidates and cancels in every
    rule that uses these distances.
    """
    b = inp.matched.real
    R = inp.gram.real
    lin = b @ X.T
    quad = np.einsum("...km,km->...k", X @ R, X)
    d = -2 * np.sqrt(inp.rho) * lin + inp.rho * quad
    return d / np.asarray(inp.sigma_w2)[..., None]


def _log_priors(inp: FusionInput, X: np.ndarray):
    return log_decision_prior(X, H1, inp.profile), log_decision_prior(X, H0, inp.profile)


def llr_optimum(inp: FusionInput) -> np.ndarray:
    """Log-likelihood ratio marginalized over all decision vectors.

    Both sums are evaluated with log-sum-exp; impossible decision vectors
    carry a ``-inf`` log-prior and drop out of the reduction.
    """
    _check_exhaustive(inp)
    X = all_decision_vectors(inp.M)
    d = _scaled_distances(inp, X)
    lp1, lp0 = _log_priors(inp, X)
    return logsumexp(lp1 - d, axis=-1) - logsumexp(lp0 - d, axis=-1)


def maxlog_statistic(inp: FusionInput) -> np.ndarray:
    """Max-log approximation: H0 minimum-distance search minus the H1 one."""
    _check_exhaustive(inp)
    X = all_decision_vectors(inp.M)
    d = _scaled_distances(inp, X)
    lp1, lp0 = _log_priors(inp, X)
    return np.min(d - lp0, axis=-1) - np.min(d - lp1, axis=-1)


def mrc_statistic(inp: FusionInput) -> np.ndarray:
    return inp.matched.real.sum(axis=-1)


def mmrc_statistic(inp: FusionInput) -> np.ndarray:
    """MRC after per-sensor normalization by ``diag(D_g)``."""
    diag = np.diagonal(inp.D_g, axis1=-2, axis2=-1).real
    if np.any(diag < DIAG_TOL):
        raise SingularChannel("D_g has a (near-)zero diagonal entry")
    return (inp.matched.real / diag).sum(axis=-1)


def deflection_mean(profile: SensorProfile) -> np.ndarray:
    """Mean shift of the decision vector between hypotheses, ``2 (P_D - P_F)``."""
    mu = 2 * (profile.P_D - profile.P_F)
    if np.all(mu == 0):
        raise DegenerateProfile("P_D == P_F for every sensor; no deflection direction exists")
    return mu


def decision_covariance(profile: SensorProfile, i: int) -> np.ndarray:
    """Diagonal of the conditional covariance of the BPSK decisions under H_i."""
    p = profile.p_plus(i)
    return 1 - (2 * p - 1) ** 2


def augmented_covariance(inp: FusionInput, i: int) -> np.ndarray:
    """``rho GA_aug Sigma_x GA_aug^H + sigma_w2 I`` (single instance)."""
    U = augment(inp.GA)
    var = decision_covariance(inp.profile, i)
    return inp.rho * (U * var) @ U.conj().T + inp.sigma_w2 * np.eye(U.shape[0])


def _solve_regularized(A, b):
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        dim = A.shape[-1]
        ridge = 1e-10 * np.trace(A, axis1=-2, axis2=-1).real / dim
        try:
            return np.linalg.solve(A + ridge[..., None, None] * np.eye(dim), b)
        except np.linalg.LinAlgError as exc:
            raise SingularCovariance("covariance solve failed after ridge regularization") from exc


def wl_combiner(inp: FusionInput, i: int) -> np.ndarray:
    """Unit-norm deflection-maximizing combiner on the augmented vector.

    Computed directly from the ``2NT x 2NT`` augmented covariance; intended
    for single instances and diagnostics.
    """
    U = augment(inp.GA)
    r = _solve_regularized(augmented_covariance(inp, i), U @ deflection_mean(inp.profile))
    return r / np.linalg.norm(r)


def _wl_coefficients(inp: FusionInput, i: int) -> np.ndarray:
    # Sigma^-1 U mu = U (sigma_w2 I + rho Sigma_x U^H U)^-1 mu, with U^H U = 2 Re(GA^H GA)
    mu = deflection_mean(inp.profile)
    var = decision_covariance(inp.profile, i)
    UhU = 2 * inp.gram.real
    sigma_w2 = np.asarray(inp.sigma_w2)[..., None, None]
    A = sigma_w2 * np.eye(inp.M) + inp.rho * var[:, None] * UhU
    c = _solve_regularized(A, np.broadcast_to(mu, A.shape[:-1])[..., None])[..., 0]
    norm = np.sqrt(np.einsum("...m,...mk,...k->...", c, UhU, c))
    return c / norm[..., None]


def wl_statistic(inp: FusionInput, i: int) -> np.ndarray:
    """Widely-linear statistic ``r^H [y; conj(y)]``; ``i`` selects the deflection (0 normal, 1 modified)."""
    if i not in (0, 1):
        raise ValueError(f"deflection kind must be 0 or 1, got {i!r}")
    c = _wl_coefficients(inp, i)
    return 2 * np.einsum("...m,...m->...", c, inp.matched.real)


def deflection(r: np.ndarray, inp: FusionInput, i: int) -> float:
    """Closed-form deflection of the linear statistic ``r^H y_aug`` under H_i."""
    m = np.sqrt(inp.rho) * augment(inp.GA) @ deflection_mean(inp.profile)
    num = abs(np.vdot(r, m)) ** 2
    return float(num / np.vdot(r, augmented_covariance(inp, i) @ r).real)


def decode_ml(inp: FusionInput) -> np.ndarray:
    """Exhaustive ML estimate of the decision vector (first minimizer wins)."""
    _check_exhaustive(inp)
    X = all_decision_vectors(inp.M)
    return X[np.argmin(_scaled_distances(inp, X), axis=-1)]


def decode_mmse(inp: FusionInput) -> np.ndarray:
    """Soft MMSE estimate ``Re{(GA (D_g + sigma_w2/sqrt(rho) I)^-1)^H y}``."""
    alpha = np.asarray(inp.sigma_w2) / np.sqrt(inp.rho)
    A = inp.D_g + alpha[..., None, None] * np.eye(inp.M)
    # A is Hermitian, so (GA A^-1)^H y = A^-1 GA^H y
    return np.linalg.solve(A, inp.matched[..., None])[..., 0].real


def hard_decision(soft) -> np.ndarray:
    return np.where(np.asarray(soft) >= 0, 1.0, -1.0)


def cv_statistic(x_bar, profile: SensorProfile) -> np.ndarray:
    """Chair-Varshney fusion of hard decisions (log arguments clamped at 1e-12)."""
    pd = np.clip(profile.P_D, PROB_EPS, 1 - PROB_EPS)
    pf = np.clip(profile.P_F, PROB_EPS, 1 - PROB_EPS)
    bits = (np.asarray(x_bar, dtype=float) + 1) / 2
    return bits @ np.log(pd / pf) + (1 - bits) @ np.log((1 - pd) / (1 - pf))


def cv_ml_statistic(inp: FusionInput) -> np.ndarray:
    return cv_statistic(decode_ml(inp), inp.profile)


def cv_mmse_statistic(inp: FusionInput) -> np.ndarray:
    return cv_statistic(hard_decision(decode_mmse(inp)), inp.profile)


RULES = {
    "opt": llr_optimum,
    "mrc": mrc_statistic,
    "mmrc": mmrc_statistic,
    "wl0": lambda inp: wl_statistic(inp, 0),
    "wl1": lambda inp: wl_statistic(inp, 1),
    "maxlog": maxlog_statistic,
    "cv-ml": cv_ml_statistic,
    "cv-mmse": cv_mmse_statistic,
}
RULE_NAMES = tuple(RULES)


def evaluate(inp: FusionInput, rules=RULE_NAMES) -> dict:
    unknown = [r for r in rules if r not in RULES]
    if unknown:
        raise KeyError(f"unknown fusion rule(s): {', '.join(unknown)}")
    return {name: np.asarray(RULES[name](inp), dtype=float) for name in rules}


def fuse_all(inp: FusionInput) -> FusionOutcome:
    out = evaluate(inp)
    return FusionOutcome(**{"gamma_" + k.replace("-", "_"): v for k, v in out.items()})
