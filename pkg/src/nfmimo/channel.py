"""Near-field steering vectors and their spatial derivatives.

The channel uses the exact spherical wavefront: each antenna sees a
per-distance phase exp(-j*nu*r) and, in exact mode, the free-space amplitude
lambda/(4*pi*r). The constant-amplitude comparison model keeps the phase but
pins every amplitude to 1; the round-trip path loss is then folded into the
reflection coefficients relative to a pair of reference points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, CarrierSpec, TargetScene

EXACT = "exact"


@dataclass(frozen=True)
class ConstantAmplitude:
    """Phase-only steering with path loss normalized at fixed reference points."""

    reference_rx: tuple
    reference_tx: tuple

    def __post_init__(self):
        for name in ("reference_rx", "reference_tx"):
            ref = np.asarray(getattr(self, name), dtype=float)
            if ref.shape != (3,) or not np.all(np.isfinite(ref)):
                raise ValueError(f"{name} must be a finite 3D coordinate")
            object.__setattr__(self, name, tuple(ref))


def is_exact(mode) -> bool:
    if mode == EXACT:
        return True
    if isinstance(mode, ConstantAmplitude):
        return False
    raise ValueError(f"unknown amplitude mode: {mode!r}")


@dataclass(frozen=True)
class SteeringBundle:
    """Steering matrices and their per-target spatial derivatives.

    `a_mat` is M x K (Rx side), `v_mat` is N x K (Tx side); `da` and `dv`
    stack the x/y/z derivatives along the leading axis.
    """

    a_mat: np.ndarray  # (M, K)
    v_mat: np.ndarray  # (N, K)
    da: np.ndarray  # (3, M, K)
    dv: np.ndarray  # (3, N, K)
    mode: object


def steering_matrix(antennas: np.ndarray, points: np.ndarray, carrier: CarrierSpec, mode=EXACT) -> np.ndarray:
    """Steering responses of `antennas` to each point; shape (n_antennas, n_points)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    diff = antennas[:, None, :] - points[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2))
    if np.any(r <= 0.0):
        raise ValueError("point coincides with an antenna (zero distance)")
    phase = np.exp(-1j * carrier.wavenumber * r)
    if is_exact(mode):
        return (carrier.wavelength / (4.0 * np.pi * r)) * phase
    return phase


def steering_rx(geometry: ArrayGeometry, target_position, carrier: CarrierSpec, mode=EXACT) -> np.ndarray:
    """Rx steering vector for one target, length M."""
    return steering_matrix(geometry.rx_positions, target_position, carrier, mode)[:, 0]


def steering_tx(geometry: ArrayGeometry, target_position, carrier: CarrierSpec, mode=EXACT) -> np.ndarray:
    """Tx steering vector for one target, length N."""
    return steering_matrix(geometry.tx_positions, target_position, carrier, mode)[:, 0]


def _steering_with_derivatives(antennas, points, carrier, exact):
    diff = antennas[:, None, :] - points[None, :, :]  # (n, P, 3)
    r = np.sqrt(np.sum(diff * diff, axis=2))
    if np.any(r <= 0.0):
        raise ValueError("point coincides with an antenna (zero distance)")
    phase = np.exp(-1j * carrier.wavenumber * r)
    steer = (carrier.wavelength / (4.0 * np.pi * r)) * phase if exact else phase
    # d/du of the steering entry: amplitude term (exact mode only) plus phase term.
    factor = 1j * carrier.wavenumber * diff / r[:, :, None]
    if exact:
        factor = factor + diff / (r * r)[:, :, None]
    deriv = steer[None, :, :] * np.moveaxis(factor, 2, 0)  # (3, n, P)
    return steer, deriv


def steering_bundle(geometry: ArrayGeometry, scene: TargetScene, mode=EXACT) -> SteeringBundle:
    """Steering matrices A, V and derivative stacks for every target."""
    exact = is_exact(mode)
    a_mat, da = _steering_with_derivatives(geometry.rx_positions, scene.positions, scene.carrier, exact)
    v_mat, dv = _steering_with_derivatives(geometry.tx_positions, scene.positions, scene.carrier, exact)
    return SteeringBundle(a_mat=a_mat, v_mat=v_mat, da=da, dv=dv, mode=mode)


def effective_reflections(scene: TargetScene, mode=EXACT) -> np.ndarray:
    """Reflection coefficients as seen by the chosen amplitude model.

    Exact mode returns the physical coefficients. The constant-amplitude model
    absorbs the round-trip path loss, evaluated at the reference points, into
    each coefficient.
    """
    if is_exact(mode):
        return np.array(scene.reflections, copy=True)
    ref_rx = np.asarray(mode.reference_rx, dtype=float)
    ref_tx = np.asarray(mode.reference_tx, dtype=float)
    d_rx = np.linalg.norm(scene.positions - ref_rx, axis=1)
    d_tx = np.linalg.norm(scene.positions - ref_tx, axis=1)
    if np.any(d_rx <= 0.0) or np.any(d_tx <= 0.0):
        raise ValueError("a target coincides with a constant-amplitude reference point")
    scale = (scene.carrier.wavelength / (4.0 * np.pi)) ** 2 / (d_rx * d_tx)
    return scale * scene.reflections
