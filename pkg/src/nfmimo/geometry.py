"""Antenna array layouts, carrier parameters, and target scenes.

Coordinates are Cartesian, in meters, double precision. Antennas inside a UPA
are ordered row-major with the first in-plane axis fastest; every downstream
matrix indexes antennas in this order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299792458.0  # m/s, exact

_PLANE_AXES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


def _as_points(value, name):
    pts = np.asarray(value, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must be an (n, 3) array of 3D coordinates")
    if pts.shape[0] == 0:
        raise ValueError(f"{name} must contain at least one point")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return pts


def _freeze(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CarrierSpec:
    """Narrowband carrier: frequency plus derived wavelength and wavenumber."""

    carrier_hz: float

    def __post_init__(self):
        if not (np.isfinite(self.carrier_hz) and self.carrier_hz > 0):
            raise ValueError("carrier_hz must be a positive finite frequency")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength


@dataclass(frozen=True)
class ArrayGeometry:
    """Explicit Tx and Rx antenna positions.

    Tx and Rx lists may coincide (monostatic), but within one array no two
    antennas may share a position.
    """

    tx_positions: np.ndarray
    rx_positions: np.ndarray

    def __post_init__(self):
        tx = _as_points(self.tx_positions, "tx_positions")
        rx = _as_points(self.rx_positions, "rx_positions")
        for name, pts in (("tx_positions", tx), ("rx_positions", rx)):
            if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
                raise ValueError(f"{name} contains duplicate antenna positions")
        object.__setattr__(self, "tx_positions", _freeze(tx))
        object.__setattr__(self, "rx_positions", _freeze(rx))

    @property
    def n_tx(self) -> int:
        return self.tx_positions.shape[0]

    @property
    def n_rx(self) -> int:
        return self.rx_positions.shape[0]


@dataclass(frozen=True)
class TargetScene:
    """Point targets (3D positions and complex reflection coefficients)."""

    positions: np.ndarray
    reflections: np.ndarray
    carrier: CarrierSpec

    def __post_init__(self):
        pos = _as_points(self.positions, "target positions")
        refl = np.atleast_1d(np.asarray(self.reflections, dtype=complex))
        if refl.shape != (pos.shape[0],):
            raise ValueError("reflections must have one entry per target")
        if not np.all(np.isfinite(refl)):
            raise ValueError("reflection coefficients must be finite")
        object.__setattr__(self, "positions", _freeze(pos))
        refl = np.ascontiguousarray(refl)
        refl.setflags(write=False)
        object.__setattr__(self, "reflections", refl)

    @property
    def n_targets(self) -> int:
        return self.positions.shape[0]


def check_separation(geometry: ArrayGeometry, scene: TargetScene) -> None:
    """Raise if any target coincides with any antenna (path loss diverges)."""
    for name, antennas in (("tx", geometry.tx_positions), ("rx", geometry.rx_positions)):
        diff = scene.positions[:, None, :] - antennas[None, :, :]
        dmin = np.sqrt(np.sum(diff * diff, axis=2)).min()
        if dmin <= 0.0:
            raise ValueError(f"a target coincides with a {name} antenna (zero distance)")


def build_upa(n_x: int, n_y: int, spacing: float, center=(0.0, 0.0, 0.0), plane: str = "xy") -> np.ndarray:
    """Positions of an n_x-by-n_y uniform planar array.

    The grid lies in the given axis-aligned plane, is symmetric about
    `center`, and is returned row-major with the first in-plane axis index
    running fastest. For odd counts the central antenna sits on `center`.
    """
    if not (isinstance(n_x, (int, np.integer)) and isinstance(n_y, (int, np.integer))):
        raise ValueError("antenna counts must be integers")
    if n_x < 1 or n_y < 1:
        raise ValueError("antenna counts must be positive")
    if not (np.isfinite(spacing) and spacing > 0):
        raise ValueError("spacing must be positive")
    if plane not in _PLANE_AXES:
        raise ValueError(f"plane must be one of {sorted(_PLANE_AXES)}")
    center = np.asarray(center, dtype=float)
    if center.shape != (3,) or not np.all(np.isfinite(center)):
        raise ValueError("center must be a finite 3D coordinate")

    ax_a, ax_b = _PLANE_AXES[plane]
    offs_a = (np.arange(n_x) - (n_x - 1) / 2.0) * spacing
    offs_b = (np.arange(n_y) - (n_y - 1) / 2.0) * spacing
    grid_a, grid_b = np.meshgrid(offs_a, offs_b)  # (n_y, n_x), a varies fastest
    pts = np.tile(center, (n_x * n_y, 1))
    pts[:, ax_a] += grid_a.ravel()
    pts[:, ax_b] += grid_b.ravel()
    return pts


def _parse_array_section(section, carrier: CarrierSpec, name: str) -> np.ndarray:
    if not isinstance(section, dict):
        raise ConfigError(f"arrays.{name} must be an object")
    kind = section.get("type", "upa")
    if kind != "upa":
        raise ConfigError(f"arrays.{name}.type: only 'upa' is supported, got {kind!r}")
    try:
        n_x = int(section["nx"])
        n_y = int(section["ny"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"arrays.{name}: nx and ny are required integers") from exc
    if section.get("spacing_half_wavelength"):
        spacing = carrier.wavelength / 2.0
    elif "spacing_m" in section:
        spacing = float(section["spacing_m"])
    else:
        raise ConfigError(f"arrays.{name}: provide spacing_m or spacing_half_wavelength")
    center = section.get("center", [0.0, 0.0, 0.0])
    plane = section.get("plane", "xy")
    try:
        return build_upa(n_x, n_y, spacing, center=center, plane=plane)
    except ValueError as exc:
        raise ConfigError(f"arrays.{name}: {exc}") from exc


def scene_from_config(config: dict) -> tuple[ArrayGeometry, TargetScene]:
    """Build a validated geometry and scene from a scenario config document.

    Reads the `carrier_hz`, `arrays`, and `targets` sections; see the CLI
    module for the full schema.
    """
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    try:
        carrier = CarrierSpec(float(config["carrier_hz"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"carrier_hz missing or invalid: {exc}") from exc

    arrays = config.get("arrays")
    if not isinstance(arrays, dict) or "tx" not in arrays or "rx" not in arrays:
        raise ConfigError("arrays section with tx and rx entries is required")
    tx = _parse_array_section(arrays["tx"], carrier, "tx")
    rx = _parse_array_section(arrays["rx"], carrier, "rx")

    targets = config.get("targets")
    if not isinstance(targets, list) or len(targets) == 0:
        raise ConfigError("targets must be a non-empty list")
    positions = []
    reflections = []
    for i, entry in enumerate(targets):
        if not isinstance(entry, dict) or "position_m" not in entry:
            raise ConfigError(f"targets[{i}]: position_m is required")
        pos = np.asarray(entry["position_m"], dtype=float)
        if pos.shape != (3,) or not np.all(np.isfinite(pos)):
            raise ConfigError(f"targets[{i}].position_m must be a finite 3D coordinate")
        b = entry.get("b", [1.0, 0.0])
        if np.shape(b) != (2,):
            raise ConfigError(f"targets[{i}].b must be a [re, im] pair")
        positions.append(pos)
        reflections.append(complex(float(b[0]), float(b[1])))

    try:
        geometry = ArrayGeometry(tx, rx)
        scene = TargetScene(np.array(positions), np.array(reflections), carrier)
        check_separation(geometry, scene)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return geometry, scene
