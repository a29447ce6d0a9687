"""Command-line driver: CRB tables, data synthesis, estimation, MSE sweeps.

All numeric CSV output uses repr() of the double, the shortest representation
that round-trips, with a locale-independent decimal point. Exit codes: 0 on
success, 2 for configuration errors, 3 for numerical failures, 4 for I/O.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from .channel import is_exact
from .config import load_config, parse_scenario, parse_sweep
from .crb import crb_asymptotic_far, crb_from_fim, crb_monostatic_axis, crb_single_wgn, fim_multi
from .errors import ConfigError, NumericalError
from .estimators import localize
from .datafile import read_datafile, write_datafile
from .geometry import TargetScene
from .harness import SweepAborted, SweepSpec, mode_label, mse_sweep
from .synthesis import StructuredNoise, WgnNoise, synthesize

SWEEP_HEADER = "snr_db,sigma2,estimator,amplitude_mode,target,mse_m2,crb_m2,trials_used,failed_trials"


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(body):
    try:
        body()
    except ConfigError as exc:
        _fail(2, exc)
    except NumericalError as exc:
        _fail(3, exc)
    except OSError as exc:
        _fail(4, exc)


def _open_out(out):
    if out is None or out == "-":
        return sys.stdout, False
    return open(out, "w", encoding="utf-8", newline="\n"), True


@click.group()
def main():
    """Near-field MIMO radar localization toolkit."""


def _noise_for_crb(noise):
    return noise.sigma2 if isinstance(noise, WgnNoise) else noise


def _square_upa_params(config, geometry):
    """n and spacing when the scene is a monostatic square odd-count UPA."""
    arrays = config.get("arrays", {})
    tx, rx = arrays.get("tx", {}), arrays.get("rx", {})
    if tx != rx:
        raise ConfigError("asymptotic method requires a monostatic setup (tx == rx)")
    n_x, n_y = int(tx.get("nx", 0)), int(tx.get("ny", 0))
    if n_x != n_y or n_x % 2 == 0:
        raise ConfigError("asymptotic method requires a square UPA with odd antenna counts")
    spacing = geometry.tx_positions[1] - geometry.tx_positions[0]
    return n_x, float(np.linalg.norm(spacing))


def _parse_distance_sweep(text):
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise ConfigError("--distance-sweep must be START:STOP:NUM or START:STOP:NUM:log")
    try:
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"--distance-sweep: {exc}") from exc
    if start <= 0 or stop <= start or num < 2:
        raise ConfigError("--distance-sweep needs 0 < START < STOP and NUM >= 2")
    if len(parts) == 4:
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)


def _crb_rows(config, scenario, methods, distances):
    geometry = scenario["geometry"]
    base_scene = scenario["scene"]
    noise = scenario["noise"]
    mode = scenario["mode"]
    tx_cov = scenario["tx_cov"]
    ell = scenario["waveform"].n_snapshots
    label = mode_label(mode)

    if distances is not None:
        if base_scene.n_targets != 1:
            raise ConfigError("--distance-sweep requires a single-target scene")
        direction = base_scene.positions[0]
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise ConfigError("--distance-sweep requires a target away from the origin")
        direction = direction / norm
        scenes = [
            (d, TargetScene(direction * d, base_scene.reflections, base_scene.carrier))
            for d in distances
        ]
    else:
        scenes = [(None, base_scene)]

    rows = []
    for d, scene in scenes:
        prefix = [] if d is None else [float(d)]
        if "matrix" in methods:
            report = crb_from_fim(fim_multi(geometry, scene, tx_cov, _noise_for_crb(noise), ell, mode))
            for t in range(scene.n_targets):
                rows.append(prefix + [t, report.crb_x[t], report.crb_y[t], report.crb_z[t],
                                      report.crb_sum[t], label, "matrix"])
        if "closed_form" in methods:
            if scene.n_targets != 1 or not isinstance(noise, WgnNoise):
                raise ConfigError("closed_form method requires one target and wgn noise")
            p = crb_single_wgn(geometry, scene, tx_cov, noise.sigma2, ell, mode)
            rows.append(prefix + [0, p.x, p.y, p.z, p.total, label, "closed_form"])
        if "on_axis" in methods or "asymptotic" in methods:
            if scene.n_targets != 1 or not isinstance(noise, WgnNoise) or not is_exact(mode):
                raise ConfigError("summation methods require one target, wgn noise, exact mode")
            n, spacing = _square_upa_params(config, geometry)
            dist = float(np.linalg.norm(scene.positions[0] - geometry.tx_positions.mean(axis=0)))
            b2 = float(np.abs(base_scene.reflections[0]) ** 2)
            if "on_axis" in methods:
                p = crb_monostatic_axis(n, spacing, dist, scene.carrier, noise.sigma2, b2, ell)
                rows.append(prefix + [0, p.x, p.y, p.z, p.total, label, "on_axis"])
            if "asymptotic" in methods:
                p = crb_asymptotic_far(n, spacing, dist, scene.carrier, noise.sigma2, b2, ell)
                rows.append(prefix + [0, p.x, p.x, p.z, 2.0 * p.x + p.z, label, "asymptotic"])
    return rows


@main.command("crb")
@click.argument("config_path", type=click.Path())
@click.option("--distance-sweep", default=None, help="Sweep the target distance: START:STOP:NUM[:log].")
@click.option("--methods", default="matrix", help="Comma list from matrix,closed_form,on_axis,asymptotic.")
@click.option("--out", default=None, help="Output CSV path (default: stdout).")
def cmd_crb(config_path, distance_sweep, methods, out):
    """Print position CRBs for the configured scene."""

    def body():
        config = load_config(config_path)
        scenario = parse_scenario(config)
        method_set = set(m.strip() for m in methods.split(",") if m.strip())
        unknown = method_set - {"matrix", "closed_form", "on_axis", "asymptotic"}
        if unknown:
            raise ConfigError(f"unknown CRB methods: {sorted(unknown)}")
        distances = None if distance_sweep is None else _parse_distance_sweep(distance_sweep)
        rows = _crb_rows(config, scenario, method_set, distances)
        header = ("d_m," if distances is not None else "") + "target,crb_x,crb_y,crb_z,crb_sum,mode,method"
        fh, close = _open_out(out)
        try:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        finally:
            if close:
                fh.close()

    _guarded(body)


@main.command("synth")
@click.argument("config_path", type=click.Path())
@click.option("--out", required=True, help="Output data file path.")
@click.option("--noiseless", is_flag=True, help="Skip the noise term.")
def cmd_synth(config_path, out, noiseless):
    """Synthesize received snapshots and store them with their config."""

    def body():
        config = load_config(config_path)
        scenario = parse_scenario(config)
        seed = config.get("noise", {}).get("seed", 0)
        data = synthesize(
            scenario["geometry"], scenario["scene"], scenario["waveform"],
            scenario["noise"], mode="exact", seed=seed, noiseless=noiseless,
        )
        write_datafile(out, scenario["waveform"].snapshots, data.snapshots,
                       n_targets=scenario["scene"].n_targets, config=config)

    _guarded(body)


@main.command("estimate")
@click.argument("data_path", type=click.Path())
@click.argument("config_path", type=click.Path())
@click.option("--out", default=None, help="Output JSON path (default: stdout).")
def cmd_estimate(data_path, config_path, out):
    """Localize targets in a stored data file."""

    def body():
        config = load_config(config_path)
        scenario = parse_scenario(config)
        x, y, _, _ = read_datafile(data_path)
        result = localize(
            y, x, scenario["geometry"], scenario["scene"].carrier,
            scenario["k_max"], scenario["schedule"], criterion=scenario["criterion"],
            epsilon=scenario["epsilon"], mode=scenario["mode"],
        )
        doc = {
            "positions_m": [list(p) for p in result.positions],
            "coefficients": [[c.real, c.imag] for c in result.coefficients],
            "converged": result.converged,
            "criterion": result.criterion,
            "objective_final": result.objective_trace[-1][1],
        }
        if "sigma2_hat" in result.noise_estimate:
            doc["sigma2_hat"] = result.noise_estimate["sigma2_hat"]
        else:
            doc["q_hat_trace"] = float(np.trace(result.noise_estimate["q_hat"]).real)
        truth = scenario["scene"].positions
        if truth.shape[0] <= result.positions.shape[0]:
            from .harness import matched_squared_errors

            doc["matched_sq_errors_m2"] = list(matched_squared_errors(result.positions, truth))
        fh, close = _open_out(out)
        try:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
        finally:
            if close:
                fh.close()

    _guarded(body)


@main.command("sweep")
@click.argument("config_path", type=click.Path())
@click.option("--out", default=None, help="Output CSV path (default: stdout).")
@click.option("--threads", default=1, type=int, help="Worker threads for trials.")
@click.option("--seed", default=None, type=int, help="Override sweep.base_seed.")
def cmd_sweep(config_path, out, threads, seed):
    """Monte Carlo MSE versus SNR with CRB overlay, as CSV."""

    def body():
        config = load_config(config_path)
        scenario = parse_scenario(config)
        snr_grid, trials, base_seed = parse_sweep(config)
        if seed is not None:
            base_seed = seed
        noise = scenario["noise"]
        template = None
        if isinstance(noise, StructuredNoise):
            q = noise.covariance
            template = q / (np.trace(q).real / q.shape[0])
        spec = SweepSpec(
            geometry=scenario["geometry"], scene=scenario["scene"],
            waveform=scenario["waveform"], snr_grid_db=snr_grid, trials=trials,
            estimators=(scenario["criterion"],), estimation_modes=(scenario["mode"],),
            noise_template=template, schedule=scenario["schedule"],
            k_max=scenario["k_max"], epsilon=scenario["epsilon"],
            base_seed=base_seed, max_workers=max(1, threads),
        )
        partial = None
        try:
            records = mse_sweep(spec)
        except SweepAborted as exc:
            records = exc.records
            partial = exc
        fh, close = _open_out(out)
        try:
            fh.write(SWEEP_HEADER + "\n")
            for r in records:
                fh.write(",".join([
                    _fmt(r.snr_db), _fmt(r.sigma2), r.estimator, r.amplitude_mode,
                    str(r.target_index), _fmt(r.mse_m2), _fmt(r.crb_m2),
                    str(r.trials_used), str(r.failed_trials),
                ]) + "\n")
        finally:
            if close:
                fh.close()
        if partial is not None:
            raise partial

    _guarded(body)


if __name__ == "__main__":
    main()
