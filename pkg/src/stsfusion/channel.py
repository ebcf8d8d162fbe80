"""Deployment geometry, large-scale fading, Rayleigh block fading and noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGeometry, ValidationError
from .model import complex_normal


@dataclass(frozen=True)
class ChannelParams:
    eta: float = 2.0
    mu_lambda_dB: float = 4.0
    sigma_lambda_dB: float = 2.0
    phi_min: float = 100.0
    phi_max: float = 1000.0

    def __post_init__(self):
        if not self.phi_min > 0:
            raise ValidationError("phi_min", "must be > 0")
        if self.phi_max < self.phi_min:
            raise ValidationError("phi_max", "must be >= phi_min")
        if self.sigma_lambda_dB < 0:
            raise ValidationError("sigma_lambda_dB", "must be >= 0")


@dataclass(frozen=True)
class DeploymentGeometry:
    phi_min: float
    phi_max: float
    positions: np.ndarray  # per-sensor distance to the fusion center, metres


@dataclass(frozen=True)
class LargeScaleFading:
    eta: float
    mu_lambda_dB: float
    sigma_lambda_dB: float
    lam: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.lam)


@dataclass(frozen=True)
class ChannelRealization:
    H: np.ndarray
    G: np.ndarray
    G_hat: np.ndarray
    sigma_w2: float


def deploy_sensors(M: int, phi_min: float, phi_max: float, rng: np.random.Generator) -> DeploymentGeometry:
    """Distances of ``M`` sensors dropped uniformly over the annulus area."""
    if M < 1:
        raise InvalidGeometry(f"need at least one sensor, got M={M}")
    if not (0 < phi_min <= phi_max):
        raise InvalidGeometry(f"need 0 < phi_min <= phi_max, got ({phi_min}, {phi_max})")
    # inverse CDF of density proportional to phi
    u = rng.random(M)
    phi = np.sqrt(phi_min**2 + u * (phi_max**2 - phi_min**2))
    return DeploymentGeometry(phi_min, phi_max, np.clip(phi, phi_min, phi_max))


def draw_shadowing(mu_lambda_dB: float, sigma_lambda_dB: float, rng: np.random.Generator, size=None):
    """Log-normal shadowing ``psi = 10**(z/10)``, ``z ~ N(mu, sigma^2)`` in dB."""
    z = mu_lambda_dB + sigma_lambda_dB * rng.standard_normal(size)
    return 10.0 ** (z / 10.0)


def pathloss(phi_m, phi_min: float, eta: float, psi):
    phi_m = np.asarray(phi_m, dtype=float)
    if np.any(phi_m < phi_min) or phi_min <= 0:
        raise InvalidGeometry("sensor closer than phi_min")
    return psi * (phi_min / phi_m) ** eta


def large_scale_fading(geometry: DeploymentGeometry, params: ChannelParams, rng) -> LargeScaleFading:
    psi = draw_shadowing(params.mu_lambda_dB, params.sigma_lambda_dB, rng, size=geometry.positions.shape)
    lam = pathloss(geometry.positions, geometry.phi_min, params.eta, psi)
    return LargeScaleFading(params.eta, params.mu_lambda_dB, params.sigma_lambda_dB, lam)


def draw_fading(N: int, M: int, rng: np.random.Generator, blocks=None) -> np.ndarray:
    """Unit-variance Rayleigh coefficients; ``blocks`` prepends a block axis."""
    shape = (N, M) if blocks is None else (blocks, N, M)
    return complex_normal(rng, shape)


def corrupt_csi(G, sigma_e2: float, rng: np.random.Generator) -> np.ndarray:
    G = np.asarray(G)
    if sigma_e2 == 0:
        return G.copy()
    return G + complex_normal(rng, G.shape, sigma_e2)


def draw_noise(N: int, T: int, sigma_w2: float, rng: np.random.Generator, blocks=None) -> np.ndarray:
    shape = (N, T) if blocks is None else (blocks, N, T)
    return complex_normal(rng, shape, sigma_w2)


def noise_variance(rho: float, snr_db: float) -> float:
    """Noise level giving ``10 log10(rho / sigma_w2) = snr_db``."""
    return rho / 10.0 ** (snr_db / 10.0)


def realize_channel(N: int, fading: LargeScaleFading, sigma_w2: float, sigma_e2: float, rng) -> ChannelRealization:
    H = draw_fading(N, fading.lam.size, rng)
    G = H * np.sqrt(fading.lam)
    return ChannelRealization(H=H, G=G, G_hat=corrupt_csi(G, sigma_e2, rng), sigma_w2=sigma_w2)
