"""Configuration parsing and bit-stable result serialization.

Configs are flat key=value text files; every key has a matching CLI
flag and flags override the file.  Each CSV is written with a fixed
column order, a unit comment line, and 17-significant-digit floats, and
is accompanied by exactly one manifest JSON that reproduces the run.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import FINITE_BIAS, INFINITE_BIAS, SystemParams
from .diffusive import TrajectoryRecord
from .exceptions import ConfigError, StabilityError
from .harness import (DEFAULT_CORRELATE_DELTAS, ExperimentConfig,
                      EnsembleStats)
from .jump import JumpTrajectory
from .observables import DetectorModel

# every recognized config key with (type, destination)
_PARAM_KEYS = {
    "omega": float,
    "delta": float,
    "epsilon": float,
    "gamma": float,       # measurement strength
    "gamma_l": float,
    "gamma_r": float,
    "dt": float,
    "bias_mode": str,
    "mu_l": float,
    "kt_l": float,
    "mu_r": float,
    "kt_r": float,
}
_DETECTOR_KEYS = {"t0": float, "t1": float, "v_bias": float, "s_i": float}
_RUN_KEYS = {
    "mode": str,
    "n_traj": int,
    "t_final": float,
    "seed": int,
    "out": str,
    "decimate": int,
    "threads": int,
    "t_burn": float,
    "t_cut": float,
    "delta_grid": str,
    "gamma_grid": str,
}
KNOWN_KEYS = {**_PARAM_KEYS, **_DETECTOR_KEYS, **_RUN_KEYS}


def read_config_file(path):
    """Flat key=value file -> dict of raw strings; '#' starts a comment."""
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _parse_grid(text):
    try:
        values = tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad grid specification {text!r}") from exc
    if not values:
        raise ConfigError(f"empty grid specification {text!r}")
    return values


def parse_config(path=None, overrides=None):
    """Assemble a fully validated :class:`ExperimentConfig`.

    ``overrides`` (typically CLI flags) win over the file.  Unknown keys
    are rejected with the offending name.
    """
    raw = read_config_file(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    unknown = sorted(set(raw) - set(KNOWN_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    typed = {}
    for key, value in raw.items():
        want = KNOWN_KEYS[key]
        try:
            typed[key] = want(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"key {key!r}: cannot read {value!r} as {want.__name__}") from exc

    pkw = {}
    for key in _PARAM_KEYS:
        if key in typed and key not in ("mu_l", "kt_l", "mu_r", "kt_r", "gamma"):
            pkw[key] = typed[key]
    if "gamma" in typed:
        pkw["gamma_meas"] = typed["gamma"]
    if typed.get("bias_mode", INFINITE_BIAS) == FINITE_BIAS:
        try:
            pkw["bath"] = [(typed["mu_l"], typed["kt_l"]),
                           (typed["mu_r"], typed["kt_r"])]
        except KeyError as exc:
            raise ConfigError("finite-bias mode needs mu_l, kt_l, mu_r, kt_r") from exc
    try:
        params = SystemParams(**pkw)
    except StabilityError as exc:
        # a too-coarse step in a config is a configuration problem
        raise ConfigError(str(exc)) from exc

    det = DetectorModel(**{k: typed[k] for k in _DETECTOR_KEYS if k in typed})

    ckw = {"params": params, "detector": det}
    for key, dest in (("mode", "mode"), ("n_traj", "n_traj"),
                      ("t_final", "t_final"), ("seed", "seed"),
                      ("out", "output_path"), ("decimate", "decimate"),
                      ("threads", "threads"), ("t_burn", "t_burn"),
                      ("t_cut", "t_cut")):
        if key in typed:
            ckw[dest] = typed[key]
    if "delta_grid" in typed:
        ckw["delta_values"] = _parse_grid(typed["delta_grid"])
    if "gamma_grid" in typed:
        ckw["gamma_values"] = _parse_grid(typed["gamma_grid"])
    if ckw.get("mode") == "correlate" and "delta_grid" not in typed:
        ckw["delta_values"] = DEFAULT_CORRELATE_DELTAS
    return ExperimentConfig(**ckw)


def config_to_dict(config):
    """Flat key/value echo of a config; parse_config inverts it."""
    p = config.params
    out = {
        "mode": config.mode,
        "omega": p.omega, "delta": p.delta, "epsilon": p.epsilon,
        "gamma": p.gamma_meas, "gamma_l": p.gamma_l, "gamma_r": p.gamma_r,
        "dt": p.dt, "bias_mode": p.bias_mode,
        "t0": config.detector.t0, "t1": config.detector.t1,
        "v_bias": config.detector.v_bias, "s_i": config.detector.s_i,
        "n_traj": config.n_traj, "t_final": config.t_final,
        "seed": config.seed, "out": config.output_path,
        "decimate": config.decimate, "threads": config.threads,
        "t_burn": config.t_burn, "t_cut": config.t_cut,
        "delta_grid": ",".join(_fmt(v) for v in config.delta_values),
        "gamma_grid": ",".join(_fmt(v) for v in config.gamma_values),
    }
    if p.bias_mode == FINITE_BIAS:
        (out["mu_l"], out["kt_l"]), (out["mu_r"], out["kt_r"]) = p.bath
    return out


def _fmt(value):
    """17-significant-digit text for floats; plain text otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


TOLERANCES = {
    "trace_tol": 1e-9,
    "eig_floor": -1e-6,
    "nullspace_tol": 1e-10,
    "clamp_limit": 1e-3,
    "stability_limit": 0.1,
}


def write_manifest(csv_path, config, runtime_s):
    manifest = {
        "software": f"tqdsim {__version__}",
        "seed": config.seed,
        "runtime_s": runtime_s,
        "tolerances": TOLERANCES,
        "config": {k: _fmt(v) for k, v in config_to_dict(config).items()},
    }
    path = Path(str(csv_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def config_from_manifest(path):
    manifest = json.loads(Path(path).read_text())
    return parse_config(overrides=manifest["config"])


def _write_csv(path, unit_comment, header, rows):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# units: {unit_comment}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def emit(results, output_path, config=None, runtime_s=0.0):
    """Serialize a result object to CSV (+ manifest if config given).

    Dispatches on the result type; empty results are rejected before
    any file is written.
    """
    writers = {
        TrajectoryRecord: _emit_trajectory,
        JumpTrajectory: _emit_jump,
        EnsembleStats: _emit_ensemble,
    }
    writer = writers.get(type(results))
    if writer is None:
        if isinstance(results, list) and results:
            from .harness import CorrelationCell, SweepCell
            if isinstance(results[0], SweepCell):
                writer = _emit_sweep
            elif isinstance(results[0], CorrelationCell):
                writer = _emit_correlation
        if writer is None:
            raise ConfigError(f"nothing to write for {type(results).__name__}")
    paths = [writer(results, output_path)]
    if config is not None:
        paths.append(write_manifest(output_path, config, runtime_s))
    return paths


def _emit_trajectory(rec, path):
    rows = zip(rec.times, rec.rho_ll, rec.rho_cc, rec.rho_rr,
               rec.record_z, rec.i_t)
    return _write_csv(
        path,
        "t [1/Omega]; rho_* dimensionless; z dimensionless; i_t [Omega]",
        ("t", "rho_ll", "rho_cc", "rho_rr", "z", "i_t"), rows)


def _emit_jump(traj, path):
    csv_path = _write_csv(
        path, "t [1/Omega]; rho_cc dimensionless; n_detected [electrons]",
        ("t", "rho_cc", "n_detected"),
        zip(traj.times, traj.rho_cc, traj.n_detected))
    sidecar = {
        "jump_times": [float(t) for t in traj.jump_times],
        "seed": traj.seed,
        "stream_id": traj.stream_id,
        "dt": traj.dt,
        "decimate": traj.decimate,
    }
    Path(str(path) + ".jumps.json").write_text(
        json.dumps(sidecar, indent=2) + "\n")
    return csv_path


def _emit_ensemble(stats, path):
    rows = ((t, m, e, mi, ei, stats.n_traj) for t, m, e, mi, ei in zip(
        stats.times, stats.mean_rho_cc, stats.err_rho_cc,
        stats.mean_i_t, stats.err_i_t))
    return _write_csv(
        path, "t [1/Omega]; rho_cc dimensionless; i_t [Omega]",
        ("t", "mean_rho_cc", "err_rho_cc", "mean_i_t", "err_i_t", "n_traj"),
        rows)


def _emit_sweep(cells, path):
    rows = ((c.delta, c.gamma, c.rho_cc_ss, c.i_t_ss, c.degenerate)
            for c in cells)
    return _write_csv(
        path, "delta, gamma [Omega]; rho_cc dimensionless; i_t [Omega]",
        ("delta", "gamma", "rho_cc_ss", "i_t_ss", "degenerate"), rows)


def _emit_correlation(cells, path):
    rows = ((c.gamma, c.delta, c.s_tq, c.s_tq_err, c.s_tt, c.s_qq,
             c.pearson, c.pearson_err, c.noisy) for c in cells)
    return _write_csv(
        path,
        "gamma, delta [Omega]; spectral densities [Omega^-1, internal "
        "record units]; pearson dimensionless",
        ("gamma", "delta", "s_tq", "s_tq_err", "s_tt", "s_qq",
         "pearson", "pearson_err", "noisy"), rows)
