"""Monte Carlo MSE-versus-SNR evaluation with CRB overlays.

SNR here is the received signal-to-noise power ratio,
10*log10(||A diag(b) V^T X||_F^2 / (L*M*sigma2)); for structured noise the
unit-diagonal covariance template is scaled so its mean diagonal power plays
the role of sigma2. Sweeps are pure functions of their spec including the base
seed: each trial's noise seed is derived from (base_seed, snr_index, trial),
and parallel execution reduces trial results in fixed order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channel import EXACT, is_exact
from .crb import crb_from_fim, fim_multi
from .errors import DegenerateSceneError, NumericalError
from .estimators import ACO, CO_WGN, GridSchedule, localize
from .geometry import ArrayGeometry, TargetScene
from .synthesis import StructuredNoise, WgnNoise, signal_matrix, synthesize
from .waveform import Waveform

_MAX_FAIL_FRACTION = 0.2


def mode_label(mode) -> str:
    return "exact" if is_exact(mode) else "constant"


@dataclass(frozen=True)
class SweepSpec:
    """Everything that determines a sweep: scene, SNR axis, estimators, seeds.

    `noise_template` is None for white noise or a unit-diagonal Hermitian PD
    matrix scaled per SNR point for structured noise. `estimation_modes` are
    the amplitude models the estimators and CRBs are evaluated under; the data
    itself is always synthesized with the exact model.
    """

    geometry: ArrayGeometry
    scene: TargetScene
    waveform: Waveform
    snr_grid_db: tuple
    trials: int
    estimators: tuple = (ACO,)
    estimation_modes: tuple = (EXACT,)
    noise_template: object = None
    schedule: GridSchedule = None
    k_max: int = 1
    epsilon: float = 1e-5
    base_seed: int = 0
    max_workers: int = 1

    def __post_init__(self):
        snr = tuple(float(s) for s in self.snr_grid_db)
        if len(snr) == 0 or any(b <= a for a, b in zip(snr, snr[1:])):
            raise ValueError("snr_grid_db must be non-empty and strictly increasing")
        object.__setattr__(self, "snr_grid_db", snr)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for est in self.estimators:
            if est not in (ACO, CO_WGN):
                raise ValueError(f"unknown estimator {est!r}")
        if self.schedule is None:
            raise ValueError("a GridSchedule is required")
        if self.k_max < self.scene.n_targets:
            raise ValueError("k_max must cover all scene targets")


@dataclass(frozen=True)
class SweepRecord:
    """One CSV row: MSE and CRB for a (SNR, estimator, mode, target) cell."""

    snr_db: float
    sigma2: float
    estimator: str
    amplitude_mode: str
    target_index: int
    mse_m2: float
    crb_m2: float
    trials_used: int
    failed_trials: int


class SweepAborted(NumericalError):
    """Raised when too many trials fail at one SNR point; carries the records
    completed so far in `records`."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


def signal_power(geometry, scene, waveform, mode=EXACT) -> float:
    """Mean received signal power per antenna per snapshot."""
    sig = signal_matrix(geometry, scene, waveform, mode)
    return float(np.sum(np.abs(sig) ** 2)) / sig.size


def sigma2_for_snr(geometry, scene, waveform, snr_db) -> float:
    return signal_power(geometry, scene, waveform) / 10.0 ** (snr_db / 10.0)


def _noise_model(spec, sigma2):
    if spec.noise_template is None:
        return WgnNoise(sigma2)
    return StructuredNoise(sigma2 * np.asarray(spec.noise_template, dtype=complex))


def matched_squared_errors(estimated, truth) -> np.ndarray:
    """Per-truth-target squared position errors under minimum-cost matching."""
    estimated = np.asarray(estimated, dtype=float).reshape(-1, 3)
    truth = np.asarray(truth, dtype=float).reshape(-1, 3)
    cost = np.sum((truth[:, None, :] - estimated[None, :, :]) ** 2, axis=2)
    rows, cols = linear_sum_assignment(cost)
    errors = np.empty(truth.shape[0])
    errors[rows] = cost[rows, cols]
    return errors


def trial_seed(base_seed, snr_index, trial_index):
    """Seed sequence for one trial's noise draw; distinct per grid cell."""
    return [int(base_seed), int(snr_index), int(trial_index)]


def run_trial(spec: SweepSpec, snr_index: int, trial_index: int) -> dict:
    """Squared position errors for every (estimator, mode) pair on one draw.

    Returns {(estimator, mode_label): per-target errors}; raises the
    estimator's degeneracy error if the draw is unusable.
    """
    snr_db = spec.snr_grid_db[snr_index]
    sigma2 = sigma2_for_snr(spec.geometry, spec.scene, spec.waveform, snr_db)
    noise = _noise_model(spec, sigma2)
    data = synthesize(
        spec.geometry, spec.scene, spec.waveform, noise,
        mode=EXACT, seed=trial_seed(spec.base_seed, snr_index, trial_index),
    )
    out = {}
    for mode in spec.estimation_modes:
        for est in spec.estimators:
            result = localize(
                data.snapshots, spec.waveform.snapshots, spec.geometry,
                spec.scene.carrier, spec.k_max, spec.schedule,
                criterion=est, epsilon=spec.epsilon, mode=mode,
            )
            out[(est, mode_label(mode))] = matched_squared_errors(
                result.positions, spec.scene.positions
            )
    return out


def _crb_for(spec, mode, sigma2):
    noise = _noise_model(spec, sigma2)
    noise_arg = noise.sigma2 if isinstance(noise, WgnNoise) else noise
    fim = fim_multi(
        spec.geometry, spec.scene, spec.waveform.sample_covariance,
        noise_arg, spec.waveform.n_snapshots, mode=mode,
    )
    return crb_from_fim(fim).crb_sum


def mse_sweep(spec: SweepSpec) -> list:
    """Run all trials over the SNR grid and aggregate per-target MSEs.

    Trials may run in `max_workers` threads; results are reduced in trial
    order, so parallel and serial sweeps agree. A point where more than 20%
    of trials fail aborts the sweep with partial records attached.
    """
    records = []
    k = spec.scene.n_targets
    for snr_index, snr_db in enumerate(spec.snr_grid_db):
        sigma2 = sigma2_for_snr(spec.geometry, spec.scene, spec.waveform, snr_db)
        crbs = {mode_label(m): _crb_for(spec, m, sigma2) for m in spec.estimation_modes}

        def one(trial):
            try:
                return run_trial(spec, snr_index, trial)
            except (DegenerateSceneError, NumericalError):
                return None

        if spec.max_workers > 1:
            with ThreadPoolExecutor(max_workers=spec.max_workers) as pool:
                results = list(pool.map(one, range(spec.trials)))
        else:
            results = [one(t) for t in range(spec.trials)]

        failed = sum(r is None for r in results)
        if failed > _MAX_FAIL_FRACTION * spec.trials:
            raise SweepAborted(
                f"{failed}/{spec.trials} trials failed at {snr_db} dB SNR", records
            )
        used = spec.trials - failed
        for mode in spec.estimation_modes:
            label = mode_label(mode)
            for est in spec.estimators:
                total = np.zeros(k)
                for r in results:
                    if r is not None:
                        total = total + r[(est, label)]
                mse = total / used
                for t in range(k):
                    records.append(SweepRecord(
                        snr_db=snr_db, sigma2=sigma2, estimator=est,
                        amplitude_mode=label, target_index=t,
                        mse_m2=float(mse[t]), crb_m2=float(crbs[label][t]),
                        trials_used=used, failed_trials=failed,
                    ))
    return records
