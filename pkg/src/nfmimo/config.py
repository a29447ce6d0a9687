"""Scenario configuration parsing.

A scenario is one JSON document with sections: carrier_hz, arrays, targets
(consumed by geometry.scene_from_config), waveform, noise, amplitude_mode,
estimator, and sweep. Every consumer validates eagerly and raises ConfigError
with the offending field named.
"""

from __future__ import annotations

import json

import numpy as np

from .channel import EXACT, ConstantAmplitude, steering_tx
from .errors import ConfigError
from .estimators import ACO, CO_WGN, GridSchedule
from .geometry import ArrayGeometry, TargetScene, scene_from_config
from .synthesis import StructuredNoise, WgnNoise, structured_clutter_cov
from .waveform import Waveform, directed_waveform, isotropic_waveform

SCHEMA_VERSION = 1


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    version = config.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    return config


def directed_covariance(geometry: ArrayGeometry, scene: TargetScene, target_indices) -> np.ndarray:
    """Transmit covariance concentrating power toward chosen targets.

    I/2 plus rank-one boosts along the conjugated Tx steering directions of
    the listed targets; weights split the remaining half of the total power
    3:1 for two targets (all of it for one). Trace equals N either way.
    """
    n = geometry.n_tx
    if len(target_indices) == 1:
        weights = [float(n)]
    elif len(target_indices) == 2:
        weights = [3.0 * n / 4.0, n / 4.0]
    else:
        raise ConfigError("directed_targets must list one or two target indices")
    cov = 0.5 * np.eye(n, dtype=complex)
    for idx, w in zip(target_indices, weights):
        v = steering_tx(geometry, scene.positions[idx], scene.carrier, EXACT)
        t = np.sqrt(w) * v.conj() / np.linalg.norm(v)
        cov += 0.5 * np.outer(t, t.conj())
    return cov


def parse_waveform(config, geometry: ArrayGeometry, scene: TargetScene):
    """Build the transmit snapshots; returns (Waveform, ensemble covariance).

    The covariance is None for isotropic transmission (identity) and the
    directed matrix otherwise; CRB overlays use it, while the snapshots
    themselves carry the finite-L sample covariance.
    """
    section = config.get("waveform")
    if not isinstance(section, dict):
        raise ConfigError("waveform section is required")
    kind = section.get("type", "isotropic")
    try:
        n_snapshots = int(section["L"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("waveform.L is a required integer") from exc
    seed = section.get("seed", 0)
    if kind == "isotropic":
        return isotropic_waveform(geometry.n_tx, n_snapshots, seed), None
    if kind == "directed":
        indices = section.get("directed_targets")
        if not isinstance(indices, list) or len(indices) < 1:
            raise ConfigError("waveform.directed_targets must list at least one target index")
        for idx in indices:
            if not isinstance(idx, int) or not (0 <= idx < scene.n_targets):
                raise ConfigError(f"waveform.directed_targets entry {idx!r} out of range")
        cov = directed_covariance(geometry, scene, indices)
        return directed_waveform(cov, n_snapshots, seed), cov
    raise ConfigError(f"waveform.type must be 'isotropic' or 'directed', got {kind!r}")


def parse_noise(config, n_rx: int):
    """Noise model from the config; structured covariances get unit diagonal
    times an optional 'power' factor."""
    section = config.get("noise")
    if not isinstance(section, dict):
        raise ConfigError("noise section is required")
    kind = section.get("type")
    if kind == "wgn":
        try:
            sigma2 = float(section["sigma2"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("noise.sigma2 is a required number for wgn noise") from exc
        try:
            return WgnNoise(sigma2)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "structured":
        try:
            rho = float(section["rho"])
            phase_step = float(section["phase_step_rad"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("noise.rho and noise.phase_step_rad are required numbers") from exc
        power = float(section.get("power", 1.0))
        if power <= 0:
            raise ConfigError("noise.power must be positive")
        try:
            return StructuredNoise(power * structured_clutter_cov(n_rx, rho, phase_step))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"noise.type must be 'wgn' or 'structured', got {kind!r}")


def parse_amplitude_mode(config, geometry: ArrayGeometry):
    """Amplitude model for estimation and CRBs; constant mode defaults its
    reference points to the array centroids."""
    section = config.get("amplitude_mode", {"type": "exact"})
    if isinstance(section, str):
        section = {"type": section}
    if not isinstance(section, dict):
        raise ConfigError("amplitude_mode must be a string or object")
    kind = section.get("type", "exact")
    if kind == "exact":
        return EXACT
    if kind == "constant":
        ref_rx = section.get("reference_rx", geometry.rx_positions.mean(axis=0).tolist())
        ref_tx = section.get("reference_tx", geometry.tx_positions.mean(axis=0).tolist())
        try:
            return ConstantAmplitude(tuple(ref_rx), tuple(ref_tx))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"amplitude_mode references invalid: {exc}") from exc
    raise ConfigError(f"amplitude_mode.type must be 'exact' or 'constant', got {kind!r}")


def parse_estimator(config):
    """Estimator settings; returns (criterion, k_max, epsilon, GridSchedule)."""
    section = config.get("estimator")
    if not isinstance(section, dict):
        raise ConfigError("estimator section is required")
    kind = section.get("type", ACO)
    if kind not in (ACO, CO_WGN):
        raise ConfigError(f"estimator.type must be '{ACO}' or '{CO_WGN}', got {kind!r}")
    k_max = section.get("k_max", 1)
    if not isinstance(k_max, int) or k_max < 1:
        raise ConfigError("estimator.k_max must be a positive integer")
    epsilon = float(section.get("epsilon", 1e-5))
    region = section.get("region_m")
    if not isinstance(region, dict) or "min" not in region or "max" not in region:
        raise ConfigError("estimator.region_m with min and max coordinates is required")
    grid = section.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("estimator.grid must be an object")
    try:
        schedule = GridSchedule(
            region_min=tuple(region["min"]),
            region_max=tuple(region["max"]),
            initial_points_per_axis=int(grid.get("points_per_axis", 21)),
            refine_levels=int(grid.get("levels", 3)),
            refine_factor=int(grid.get("factor", 5)),
            refine_span=int(grid.get("span", 2)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"estimator grid settings invalid: {exc}") from exc
    return kind, k_max, epsilon, schedule


def parse_sweep(config):
    """Sweep axis settings; returns (snr_grid_db, trials, base_seed)."""
    section = config.get("sweep")
    if not isinstance(section, dict):
        raise ConfigError("sweep section is required")
    snr = section.get("snr_db")
    if not isinstance(snr, list) or len(snr) == 0:
        raise ConfigError("sweep.snr_db must be a non-empty list")
    try:
        snr = tuple(float(s) for s in snr)
    except (TypeError, ValueError) as exc:
        raise ConfigError("sweep.snr_db entries must be numbers") from exc
    trials = section.get("trials", 100)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("sweep.trials must be a positive integer")
    base_seed = section.get("base_seed", 0)
    if not isinstance(base_seed, int):
        raise ConfigError("sweep.base_seed must be an integer")
    return snr, trials, base_seed


def parse_scenario(config):
    """Parse the full document into a dict of built objects."""
    geometry, scene = scene_from_config(config)
    waveform, tx_cov = parse_waveform(config, geometry, scene)
    noise = parse_noise(config, geometry.n_rx)
    mode = parse_amplitude_mode(config, geometry)
    criterion, k_max, epsilon, schedule = parse_estimator(config)
    return {
        "geometry": geometry,
        "scene": scene,
        "waveform": waveform,
        "tx_cov": tx_cov,
        "noise": noise,
        "mode": mode,
        "criterion": criterion,
        "k_max": k_max,
        "epsilon": epsilon,
        "schedule": schedule,
    }
