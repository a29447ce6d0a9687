"""Transmit snapshot generation and sample covariance.

All generators use numpy's default PCG64 bit generator seeded explicitly, so a
given seed reproduces the snapshot matrix bit for bit. Real and imaginary
parts are drawn as two (N, L) standard-normal blocks in that order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, eigh

from .errors import NumericalError


@dataclass(frozen=True)
class Waveform:
    """Transmit snapshots X (N x L); sample covariance is X X^H / L."""

    snapshots: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.snapshots, dtype=complex)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("snapshots must be a non-empty N x L matrix")
        if not np.all(np.isfinite(x)):
            raise ValueError("snapshots must be finite")
        x = np.ascontiguousarray(x)
        x.setflags(write=False)
        object.__setattr__(self, "snapshots", x)

    @property
    def n_antennas(self) -> int:
        return self.snapshots.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.snapshots.shape[1]

    @property
    def sample_covariance(self) -> np.ndarray:
        x = self.snapshots
        return (x @ x.conj().T) / self.n_snapshots


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CSCG draws with unit variance (real/imag each variance 1/2)."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def isotropic_waveform(n_antennas: int, n_snapshots: int, seed) -> Waveform:
    """Snapshots with i.i.d. CSCG columns of identity covariance."""
    if n_antennas < 1 or n_snapshots < 1:
        raise ValueError("antenna and snapshot counts must be positive")
    rng = np.random.default_rng(seed)
    return Waveform(complex_normal(rng, (n_antennas, n_snapshots)))


def covariance_factor(cov: np.ndarray, clip_tol: float = 1e-10) -> np.ndarray:
    """Matrix F with F F^H = cov; Cholesky when PD, clipped eigh otherwise."""
    cov = np.asarray(cov, dtype=complex)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be square")
    scale = np.linalg.norm(cov)
    if scale == 0.0:
        return np.zeros_like(cov)
    if np.linalg.norm(cov - cov.conj().T) > 1e-12 * scale:
        raise ValueError("covariance must be Hermitian")
    try:
        return cholesky(cov, lower=True)
    except np.linalg.LinAlgError:
        pass
    w, u = eigh(cov)
    wmax = max(w.max(), 0.0)
    if w.min() < -clip_tol * wmax:
        raise ValueError("covariance is indefinite")
    w = np.clip(w, 0.0, None)
    return u * np.sqrt(w)


def directed_waveform(target_cov: np.ndarray, n_snapshots: int, seed) -> Waveform:
    """Snapshots with i.i.d. CSCG columns of the given Hermitian PSD covariance."""
    factor = covariance_factor(target_cov)
    if n_snapshots < 1:
        raise ValueError("snapshot count must be positive")
    rng = np.random.default_rng(seed)
    white = complex_normal(rng, (factor.shape[0], n_snapshots))
    return Waveform(factor @ white)


def build_nonisotropic_cov(v1: np.ndarray, v2: np.ndarray, n_antennas: int) -> np.ndarray:
    """Rank-2-boosted covariance focused on two Tx steering directions.

    Returns I/2 + t1 t1^H / 2 + t2 t2^H / 2 with t1, t2 the conjugated unit
    steering columns scaled to powers 3M/4 and M/4, so the trace equals M and
    the total transmit power matches isotropic transmission.
    """
    v1 = np.asarray(v1, dtype=complex).ravel()
    v2 = np.asarray(v2, dtype=complex).ravel()
    if v1.shape != v2.shape:
        raise ValueError("steering columns must have the same length")
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("steering columns must be non-zero")
    t1 = np.sqrt(3.0 * n_antennas / 4.0) * v1.conj() / n1
    t2 = np.sqrt(n_antennas / 4.0) * v2.conj() / n2
    cov = 0.5 * np.eye(v1.size, dtype=complex)
    cov += 0.5 * np.outer(t1, t1.conj())
    cov += 0.5 * np.outer(t2, t2.conj())
    return cov
