"""Diffusive (weakly responding detector) unraveling of the dynamics.

Ito Euler-Maruyama integration of the element-wise stochastic master
equation, the continuous detector record, and rectangular-window time
averaging for plotting.  One Wiener increment per step drives both the
state update and the contemporaneous record sample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import build_rates
from .exceptions import ConfigError, TrajectoryDivergedError
from .state import LC, LR, RC, ZC, ZL, ZR, DensityMatrix

# Trajectories whose single worst clamping event exceeds this are invalid.
CLAMP_LIMIT = 1e-3

DEFAULT_DECIMATE = 10


def _unpack(rho):
    return (rho.pop[1], rho.pop[2], rho.pop[3],
            rho.coh[LC], rho.coh[RC], rho.coh[LR],
            rho.coh[ZL], rho.coh[ZC], rho.coh[ZR])


def _pack(pll, pcc, prr, p00, clc, crc, clr, c0l, c0c, c0r):
    return DensityMatrix(
        np.array([p00, pll, pcc, prr]),
        np.array([clc, crc, clr, c0l, c0c, c0r], dtype=np.complex128),
    )


def _rate_args(params):
    r = build_rates(params)
    return (params.omega, params.delta, params.epsilon,
            r.gamma_L_in, r.gamma_L_out, r.gamma_R_in, r.gamma_R_out,
            params.gamma_meas, params.dt)


def sme_step(rho, params, dw):
    """Advance the conditioned state by one Euler-Maruyama step.

    The empty-state population is closed through the trace and the
    populations are clamped to [0, 1]; a non-finite result (noise
    blow-up) raises :class:`TrajectoryDivergedError`.
    """
    if not np.isfinite(dw):
        raise ConfigError("dW must be finite")
    out = _kernels.diffusive_step(*_unpack(rho), *_rate_args(params), dw)
    pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r = out
    if not np.all(np.isfinite([pll, pcc, prr])):
        raise TrajectoryDivergedError("non-finite element after step")
    pll, pcc, prr, p00, _clamp = _kernels.clamp_populations(pll, pcc, prr)
    return _pack(pll, pcc, prr, p00, clc, crc, clr, c0l, c0c, c0r)


def record_sample(rho_cc, dw, params):
    """Dimensionless detector record z = rho_CC + dW/(sqrt(gamma) dt).

    Must be fed the same dW that drives the contemporaneous sme_step.
    """
    if params.gamma_meas <= 0:
        raise ConfigError("record undefined without a detector (gamma_meas > 0)")
    return rho_cc + dw / (np.sqrt(params.gamma_meas) * params.dt)


@dataclass
class TrajectoryRecord:
    """Stored time series of one diffusive realization.

    ``times`` are bin-end times (the initial state is not stored);
    ``record_z`` is the within-bin mean of the per-step record, ``dw``
    the summed Wiener increment per bin, and ``i_t`` the instantaneous
    junction current at the bin end.
    """

    times: np.ndarray
    rho_ll: np.ndarray
    rho_cc: np.ndarray
    rho_rr: np.ndarray
    record_z: np.ndarray
    i_t: np.ndarray
    dw: np.ndarray
    max_clamp: float
    valid: bool
    seed: int
    stream_id: int
    dt: float
    decimate: int


def run_diffusive_trajectory(rho0, params, t_final, stream, decimate=DEFAULT_DECIMATE):
    """Integrate one conditioned trajectory and return its record.

    Identical (seed, stream_id, dt) replays bit-identically.  The run
    covers ``floor(t_final/dt/decimate)`` full output bins; a trailing
    partial bin is not integrated.
    """
    if t_final <= 0:
        raise ConfigError("t_final must be > 0")
    if decimate < 1:
        raise ConfigError("decimate must be >= 1")
    if abs(stream.dt - params.dt) > 1e-15 * params.dt:
        raise ConfigError("stream dt and params dt disagree")
    n_bins = int(round(t_final / params.dt)) // decimate
    if n_bins < 1:
        raise ConfigError("t_final shorter than one output bin")
    n_steps = n_bins * decimate
    dws = stream.generator().standard_normal(n_steps) * np.sqrt(params.dt)

    out = [np.empty(n_bins) for _ in range(5)]
    bad_step, max_clamp, *_final = _kernels.run_diffusive(
        *_unpack(rho0), *_rate_args(params), dws, decimate, *out)
    if bad_step >= 0:
        raise TrajectoryDivergedError(
            f"non-finite element at step {bad_step}", step=int(bad_step))
    pll, pcc, prr, z, dw = out
    times = params.dt * decimate * np.arange(1, n_bins + 1)
    rates = build_rates(params)
    p00 = 1.0 - pll - pcc - prr
    i_t = rates.gamma_R_out * prr - rates.gamma_R_in * p00
    return TrajectoryRecord(
        times=times, rho_ll=pll, rho_cc=pcc, rho_rr=prr,
        record_z=z, i_t=i_t, dw=dw,
        max_clamp=float(max_clamp), valid=bool(max_clamp <= CLAMP_LIMIT),
        seed=stream.seed, stream_id=stream.stream_id,
        dt=params.dt, decimate=decimate,
    )


def advance_conditioned(rho, params, dws):
    """Advance a state through the given Wiener increments; final state only."""
    scratch = [np.empty(max(1, dws.size)) for _ in range(5)]
    bad_step, _clamp, *final = _kernels.run_diffusive(
        *_unpack(rho), *_rate_args(params), np.asarray(dws, dtype=float),
        dws.size + 1, *scratch)
    if bad_step >= 0:
        raise TrajectoryDivergedError(
            f"non-finite element at step {bad_step}", step=int(bad_step))
    pll, pcc, prr = final[0], final[1], final[2]
    p00 = 1.0 - pll - pcc - prr
    return _pack(pll, pcc, prr, p00, *final[3:])


def time_average(signal, window, dt):
    """Centered moving mean over floor(window/dt) samples.

    Edge windows are truncated to the available samples, so a constant
    signal is returned unchanged everywhere.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.size == 0:
        raise ConfigError("cannot average an empty signal")
    if window < dt:
        raise ConfigError("window must be at least one sample (window >= dt)")
    w = int(np.floor(window / dt))
    if w <= 1:
        return signal.copy()
    half_l = (w - 1) // 2
    half_r = w // 2
    csum = np.concatenate([[0.0], np.cumsum(signal)])
    n = signal.size
    hi = np.minimum(np.arange(n) + half_r + 1, n)
    lo = np.maximum(np.arange(n) - half_l, 0)
    return (csum[hi] - csum[lo]) / (hi - lo)
