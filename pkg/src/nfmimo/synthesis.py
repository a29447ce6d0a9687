"""Noise/clutter models and received-data synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky

from .channel import EXACT, effective_reflections, steering_bundle
from .geometry import ArrayGeometry, TargetScene, check_separation
from .waveform import Waveform, complex_normal


@dataclass(frozen=True)
class WgnNoise:
    """Spatially white noise with per-antenna power sigma2."""

    sigma2: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError("sigma2 must be positive and finite")


@dataclass(frozen=True)
class StructuredNoise:
    """General Hermitian positive-definite clutter covariance."""

    covariance: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.covariance, dtype=complex)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("covariance must be square")
        if np.linalg.norm(q - q.conj().T) > 1e-12 * np.linalg.norm(q):
            raise ValueError("covariance must be Hermitian")
        try:
            cholesky(q, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance must be positive definite") from exc
        q = np.ascontiguousarray(q)
        q.setflags(write=False)
        object.__setattr__(self, "covariance", q)


@dataclass(frozen=True)
class ReceivedData:
    """Received snapshot matrix Y (M x L)."""

    snapshots: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.snapshots, dtype=complex)
        if y.ndim != 2:
            raise ValueError("snapshots must be an M x L matrix")
        if not np.all(np.isfinite(y)):
            raise ValueError("snapshots must be finite")
        y = np.ascontiguousarray(y)
        y.setflags(write=False)
        object.__setattr__(self, "snapshots", y)


def structured_clutter_cov(n_antennas: int, rho: float, phase_step: float) -> np.ndarray:
    """Exponentially correlated clutter covariance with a linear phase ramp.

    Entry (p, q) is rho^|p-q| * exp(j*(p-q)*phase_step); unit diagonal, always
    Hermitian positive definite for 0 < rho < 1.
    """
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must lie strictly between 0 and 1")
    idx = np.arange(n_antennas)
    delta = idx[:, None] - idx[None, :]
    return rho ** np.abs(delta) * np.exp(1j * delta * phase_step)


def noise_covariance_factor(noise, n_antennas: int) -> np.ndarray:
    """Lower-triangular factor used to color white noise draws."""
    if isinstance(noise, WgnNoise):
        return np.sqrt(noise.sigma2) * np.eye(n_antennas, dtype=complex)
    if isinstance(noise, StructuredNoise):
        if noise.covariance.shape[0] != n_antennas:
            raise ValueError("noise covariance size does not match the Rx array")
        return cholesky(noise.covariance, lower=True)
    raise ValueError(f"unknown noise model: {noise!r}")


def signal_matrix(geometry: ArrayGeometry, scene: TargetScene, waveform: Waveform, mode=EXACT) -> np.ndarray:
    """Noiseless received signal A diag(b) V^T X under the chosen amplitude model."""
    if waveform.n_antennas != geometry.n_tx:
        raise ValueError("waveform antenna count does not match the Tx array")
    bundle = steering_bundle(geometry, scene, mode)
    coeffs = effective_reflections(scene, mode)
    return (bundle.a_mat * coeffs) @ (bundle.v_mat.T @ waveform.snapshots)


def synthesize(
    geometry: ArrayGeometry,
    scene: TargetScene,
    waveform: Waveform,
    noise,
    mode=EXACT,
    seed=None,
    noiseless: bool = False,
) -> ReceivedData:
    """Synthesize the received matrix Y = A diag(b) V^T X + Z.

    Noise columns are i.i.d. CSCG with the covariance of `noise`, generated by
    coloring white draws with the lower Cholesky factor; deterministic given
    `seed`. `noiseless=True` drops Z entirely (for exactness oracles).
    """
    check_separation(geometry, scene)
    signal = signal_matrix(geometry, scene, waveform, mode)
    if noiseless:
        return ReceivedData(signal)
    factor = noise_covariance_factor(noise, geometry.n_rx)
    rng = np.random.default_rng(seed)
    z = factor @ complex_normal(rng, (geometry.n_rx, waveform.n_snapshots))
    return ReceivedData(signal + z)
