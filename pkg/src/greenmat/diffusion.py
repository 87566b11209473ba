"""DDPM coefficient schedule, noise loss, latent estimation, total loss."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import save_tensor

DEFAULT_T = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-timestep coefficient tables beta, alpha = 1 - beta, and the
    running product alpha_bar."""

    beta: np.ndarray
    alpha: np.ndarray = field(repr=False, default=None)
    alpha_bar: np.ndarray = field(repr=False, default=None)

    @property
    def T(self) -> int:
        return len(self.beta)

    def save(self, beta_path, alpha_path, alpha_bar_path) -> None:
        save_tensor(beta_path, self.beta)
        save_tensor(alpha_path, self.alpha)
        save_tensor(alpha_bar_path, self.alpha_bar)


def build_schedule(
    T: int = DEFAULT_T,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Linear beta schedule; alpha_bar computed by cumulative product in
    float64 so it stays strictly decreasing and positive."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise ValueError("need 0 < beta_start <= beta_end < 1")
    beta = np.linspace(beta_start, beta_end, T, dtype=np.float64)
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    return NoiseSchedule(beta=beta, alpha=alpha, alpha_bar=alpha_bar)


def _check_t(t: int, s: NoiseSchedule) -> int:
    t = int(t)
    if not 0 <= t < s.T:
        raise ValueError(f"timestep {t} outside [0, {s.T})")
    return t


def add_noise(z0: np.ndarray, eps: np.ndarray, t: int, s: NoiseSchedule) -> np.ndarray:
    """Forward noising: z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps."""
    z0 = np.asarray(z0)
    eps = np.asarray(eps)
    if z0.shape != eps.shape:
        raise ValueError(f"shape mismatch: {z0.shape} vs {eps.shape}")
    t = _check_t(t, s)
    abar = s.alpha_bar[t]
    return math.sqrt(abar) * z0 + math.sqrt(1.0 - abar) * eps


def estimate_z0(zt: np.ndarray, eps_pred: np.ndarray, t: int, s: NoiseSchedule) -> np.ndarray:
    """Closed-form latent estimate (zt - sqrt(1 - abar_t) eps) / sqrt(abar_t),
    the exact inverse of add_noise when eps_pred matches the injected noise."""
    zt = np.asarray(zt)
    eps_pred = np.asarray(eps_pred)
    if zt.shape != eps_pred.shape:
        raise ValueError(f"shape mismatch: {zt.shape} vs {eps_pred.shape}")
    t = _check_t(t, s)
    abar = s.alpha_bar[t]
    if abar < 1e-12:
        raise ValueError("degenerate schedule")
    return (zt - math.sqrt(1.0 - abar) * eps_pred) / math.sqrt(abar)


def noise_loss(eps_pred: np.ndarray, eps: np.ndarray) -> float:
    """Mean squared error between predicted and injected noise."""
    eps_pred = np.asarray(eps_pred)
    eps = np.asarray(eps)
    if eps_pred.shape != eps.shape:
        raise ValueError(f"shape mismatch: {eps_pred.shape} vs {eps.shape}")
    d = eps_pred.astype(np.float64) - eps.astype(np.float64)
    return float(np.mean(d * d))


def noise_loss_grad(eps_pred: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """d noise_loss / d eps_pred = 2 (eps_pred - eps) / N."""
    eps_pred = np.asarray(eps_pred)
    eps = np.asarray(eps)
    if eps_pred.shape != eps.shape:
        raise ValueError(f"shape mismatch: {eps_pred.shape} vs {eps.shape}")
    return 2.0 * (eps_pred - eps) / eps_pred.size


def total_loss(l_noise: float, l_g: float, l_detail: float, l_latent: float) -> float:
    """Unweighted sum of the four training terms."""
    parts = (l_noise, l_g, l_detail, l_latent)
    if not all(math.isfinite(p) for p in parts):
        raise ValueError("loss terms must be finite")
    return float(l_noise + l_g + l_detail + l_latent)
