"""Ensemble orchestration, steady-state sweeps, and correlation scans.

Trajectories are embarrassingly parallel tasks keyed by
(seed, stream_id); aggregation always reduces serially over sorted
stream ids, so results depend only on the configuration and master
seed, never on worker count or scheduling.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import SystemParams, steady_state
from .diffusive import DEFAULT_DECIMATE, run_diffusive_trajectory
from .exceptions import (ConfigError, EnsembleError, EstimatorError,
                         NonUniqueSteadyStateError, TrajectoryDivergedError)
from .jump import run_jump_trajectory
from .observables import (DEFAULT_BURN_IN, DEFAULT_LAG_CUT, DetectorModel,
                          correlate_currents, tqd_current)
from .state import DensityMatrix
from .streams import WienerStream

MODES = ("master", "steady", "diffusive", "jump", "sweep", "correlate")

# Default sweep grids bracketing the regimes of interest.
DEFAULT_DELTA_GRID = tuple(np.geomspace(2.0, 30.0, 15))
DEFAULT_GAMMA_GRID = tuple(np.geomspace(0.1, 100.0, 20))
DEFAULT_CORRELATE_DELTAS = (10.0, 14.0, 20.0)

# Fraction of invalid trajectories an ensemble tolerates before failing.
MAX_INVALID_FRACTION = 0.01


@dataclass
class ExperimentConfig:
    """Everything one run needs: mode, physics, detector, and grids."""

    mode: str = "diffusive"
    params: SystemParams = field(default_factory=SystemParams)
    detector: DetectorModel = field(default_factory=DetectorModel)
    n_traj: int = 100
    t_final: float = 5.0
    seed: int = 2024
    output_path: str = ""
    delta_values: tuple = DEFAULT_DELTA_GRID
    gamma_values: tuple = DEFAULT_GAMMA_GRID
    decimate: int = DEFAULT_DECIMATE
    threads: int = 1
    t_burn: float = DEFAULT_BURN_IN
    t_cut: float = DEFAULT_LAG_CUT

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_traj < 1:
            raise ConfigError("n_traj must be >= 1")
        if self.t_final <= 0:
            raise ConfigError("t_final must be > 0")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.mode in ("sweep", "correlate"):
            if len(self.delta_values) == 0 or len(self.gamma_values) == 0:
                raise ConfigError(f"{self.mode} mode needs non-empty grids")


@dataclass
class EnsembleStats:
    """Per-time-bin means and standard errors over an ensemble."""

    times: np.ndarray
    mean_rho_cc: np.ndarray
    err_rho_cc: np.ndarray
    mean_rho_ll: np.ndarray
    err_rho_ll: np.ndarray
    mean_rho_rr: np.ndarray
    err_rho_rr: np.ndarray
    mean_i_t: np.ndarray
    err_i_t: np.ndarray
    n_traj: int
    n_invalid: int

    @property
    def stderr_defined(self):
        return self.n_traj >= 2


def _run_one_trajectory(args):
    kind, params, t_final, seed, stream_id, decimate = args
    stream = WienerStream(seed=seed, stream_id=stream_id, dt=params.dt)
    rho0 = DensityMatrix.basis_state("L")
    runner = run_diffusive_trajectory if kind == "diffusive" else run_jump_trajectory
    try:
        traj = runner(rho0, params, t_final, stream, decimate=decimate)
    except TrajectoryDivergedError:
        return stream_id, None
    if not traj.valid:
        return stream_id, None
    return stream_id, (traj.times, traj.rho_cc, traj.rho_ll, traj.rho_rr, traj.i_t)


def _trajectory_results(config, kind):
    """Yield (stream_id, payload) in sorted stream order."""
    args = [(kind, config.params, config.t_final, config.seed, i, config.decimate)
            for i in range(config.n_traj)]
    if config.threads == 1:
        for a in args:
            yield _run_one_trajectory(a)
    else:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            chunk = max(1, len(args) // (4 * config.threads))
            yield from pool.map(_run_one_trajectory, args, chunksize=chunk)


def run_ensemble(config):
    """Mean and standard error of an ensemble of trajectories.

    Trajectories use stream ids 0..n_traj-1 under the master seed.
    Invalid realizations (clamping or divergence) are excluded and
    counted; more than 1% of them fails the run.
    """
    kind = config.mode
    if kind not in ("diffusive", "jump"):
        raise ConfigError("run_ensemble needs mode 'diffusive' or 'jump'")
    times = None
    acc = None
    acc_sq = None
    n_ok = 0
    n_invalid = 0
    for _sid, payload in _trajectory_results(config, kind):
        if payload is None:
            n_invalid += 1
            continue
        t, pcc, pll, prr, i_t = payload
        stack = np.vstack([pcc, pll, prr, i_t])
        if acc is None:
            times = t
            acc = np.zeros_like(stack)
            acc_sq = np.zeros_like(stack)
        acc += stack
        acc_sq += stack * stack
        n_ok += 1
    if n_invalid > MAX_INVALID_FRACTION * config.n_traj:
        raise EnsembleError(
            f"{n_invalid}/{config.n_traj} trajectories invalid "
            f"(limit {MAX_INVALID_FRACTION:.0%})")
    if n_ok == 0:
        raise EnsembleError("no valid trajectories")
    mean = acc / n_ok
    if n_ok >= 2:
        var = np.maximum(acc_sq / n_ok - mean * mean, 0.0) * n_ok / (n_ok - 1)
        err = np.sqrt(var / n_ok)
    else:
        err = np.full_like(mean, np.nan)
    return EnsembleStats(
        times=times,
        mean_rho_cc=mean[0], err_rho_cc=err[0],
        mean_rho_ll=mean[1], err_rho_ll=err[1],
        mean_rho_rr=mean[2], err_rho_rr=err[2],
        mean_i_t=mean[3], err_i_t=err[3],
        n_traj=n_ok, n_invalid=n_invalid,
    )


@dataclass
class SweepCell:
    """Stationary-state observables at one (delta, gamma) grid point."""

    delta: float
    gamma: float
    rho_cc_ss: float
    i_t_ss: float
    degenerate: bool


def sweep_steady_state(config):
    """Stationary rho_CC and junction current over the (delta, gamma) grid.

    Degenerate cells (non-unique stationary state) are marked rather
    than fatal and carry NaN observables.
    """
    cells = []
    for delta in config.delta_values:
        for gamma in config.gamma_values:
            params = replace(config.params, delta=float(delta),
                             gamma_meas=float(gamma))
            try:
                rho = steady_state(params)
            except NonUniqueSteadyStateError:
                cells.append(SweepCell(float(delta), float(gamma),
                                       np.nan, np.nan, True))
                continue
            cells.append(SweepCell(
                float(delta), float(gamma),
                float(rho.rho_cc), float(tqd_current(rho, params)), False))
    return cells


@dataclass
class CorrelationCell:
    """Correlation estimates at one (delta, gamma) grid point."""

    delta: float
    gamma: float
    s_tq: float
    s_tq_err: float
    s_tt: float
    s_qq: float
    pearson: float
    pearson_err: float
    noisy: bool
    error: str = ""


def correlation_experiment(config):
    """Current/record correlations over the (delta, gamma) grid.

    For each cell, ``n_traj`` diffusive trajectories of length
    ``t_final`` are run (cell-unique stream ids) and the three
    zero-frequency spectral densities estimated with identical lag
    windows.  Estimator failures (insufficient data) are recorded per
    cell instead of aborting the scan.
    """
    rho0 = DensityMatrix.basis_state("L")
    cells = []
    cell_index = 0
    for delta in config.delta_values:
        for gamma in config.gamma_values:
            params = replace(config.params, delta=float(delta),
                             gamma_meas=float(gamma))
            it_series = []
            z_series = []
            for j in range(config.n_traj):
                stream = WienerStream(seed=config.seed,
                                      stream_id=cell_index * config.n_traj + j,
                                      dt=params.dt)
                traj = run_diffusive_trajectory(
                    rho0, params, config.t_final, stream,
                    decimate=config.decimate)
                it_series.append(traj.i_t)
                z_series.append(traj.record_z)
            bin_dt = params.dt * config.decimate
            try:
                res = correlate_currents(
                    it_series, z_series, config.detector, bin_dt,
                    t_burn=config.t_burn, t_cut=config.t_cut)
            except EstimatorError as exc:
                cells.append(CorrelationCell(
                    float(delta), float(gamma), np.nan, np.nan, np.nan,
                    np.nan, np.nan, np.nan, True, error=str(exc)))
                cell_index += 1
                continue
            cells.append(CorrelationCell(
                float(delta), float(gamma),
                res.s_tq, res.s_tq_err, res.s_tt, res.s_qq,
                res.pearson, res.pearson_err, res.noisy))
            cell_index += 1
    return cells
