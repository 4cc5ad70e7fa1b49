"""Detection-counting (tunneling detector) unraveling.

Each detected electron projects the central dot empty; between
detections the state follows a smooth nonlinear no-detection evolution
whose normalization term conserves the trace exactly.  Includes the
short-time analytic form of the central occupation between detections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import build_rates
from .diffusive import _pack, _rate_args
from .exceptions import ConfigError, StabilityError, TrajectoryDivergedError
from .state import LC, LR, RC, ZC, ZL, ZR

DEFAULT_DECIMATE = 10

# gam*dt above this makes the one-detection-per-step approximation unsafe.
JUMP_DT_LIMIT = 0.1


def jump_probability(rho, params):
    """Probability gam*(1 - rho_CC)*dt of a detection in the next step."""
    if params.gamma_meas * params.dt > JUMP_DT_LIMIT:
        raise StabilityError("gamma_meas*dt too large for per-step detection sampling")
    p = params.gamma_meas * (1.0 - rho.rho_cc) * params.dt
    return float(min(max(p, 0.0), 1.0))


def apply_jump(rho):
    """Post-detection state: central component removed, rest renormalized."""
    if rho.rho_cc >= 1.0 - 1e-9:
        raise ConfigError("cannot project out a fully occupied central dot")
    p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r = _kernels.project_center_empty(
        rho.pop[0], rho.pop[1], rho.pop[2], rho.pop[3],
        rho.coh[LC], rho.coh[RC], rho.coh[LR],
        rho.coh[ZL], rho.coh[ZC], rho.coh[ZR])
    return _pack(pll, pcc, prr, p00, clc, crc, clr, c0l, c0c, c0r)


def no_jump_step(rho, params):
    """One Euler step of the no-detection evolution.

    All four populations advance explicitly; the nonlinear normalization
    term balances the detector decay, so the trace is conserved to
    rounding without renormalization.
    """
    out = _kernels.no_jump_step(
        rho.pop[0], rho.pop[1], rho.pop[2], rho.pop[3],
        rho.coh[LC], rho.coh[RC], rho.coh[LR],
        rho.coh[ZL], rho.coh[ZC], rho.coh[ZR],
        *_rate_args(params))
    p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r = out
    if not np.all(np.isfinite([p00, pll, pcc, prr])):
        raise TrajectoryDivergedError("non-finite element after no-detection step")
    return _pack(pll, pcc, prr, p00, clc, crc, clr, c0l, c0c, c0r)


@dataclass
class JumpTrajectory:
    """Stored time series of one detection-conditioned realization.

    ``n_detected`` is the cumulative electron count at each stored bin
    and ``jump_times`` the exact detection times (end of the step in
    which the detection fired).  With decimate=1 every stored entry at a
    detection time has rho_cc = 0 exactly.
    """

    times: np.ndarray
    rho_cc: np.ndarray
    rho_ll: np.ndarray
    rho_rr: np.ndarray
    i_t: np.ndarray
    n_detected: np.ndarray
    jump_times: np.ndarray
    seed: int
    stream_id: int
    dt: float
    decimate: int

    @property
    def valid(self):
        return True


def run_jump_trajectory(rho0, params, t_final, stream, decimate=DEFAULT_DECIMATE):
    """Integrate one detection-conditioned trajectory.

    Per step, dN in {0, 1} is drawn with P(1) = jump_probability from
    the pre-step state; a detection applies the projective update,
    otherwise a no-detection Euler step is taken.  Replays
    deterministically per (seed, stream_id).
    """
    if t_final <= 0:
        raise ConfigError("t_final must be > 0")
    if decimate < 1:
        raise ConfigError("decimate must be >= 1")
    if abs(stream.dt - params.dt) > 1e-15 * params.dt:
        raise ConfigError("stream dt and params dt disagree")
    if params.gamma_meas * params.dt > JUMP_DT_LIMIT:
        raise StabilityError("gamma_meas*dt too large for per-step detection sampling")
    n_bins = int(round(t_final / params.dt)) // decimate
    if n_bins < 1:
        raise ConfigError("t_final shorter than one output bin")
    n_steps = n_bins * decimate
    uniforms = stream.generator().random(n_steps)

    out_pll = np.empty(n_bins)
    out_pcc = np.empty(n_bins)
    out_prr = np.empty(n_bins)
    out_n = np.empty(n_bins, dtype=np.int64)
    jump_buf = np.empty(n_steps)
    bad_step, n_jumps = _kernels.run_jump(
        rho0.pop[0], rho0.pop[1], rho0.pop[2], rho0.pop[3],
        rho0.coh[LC], rho0.coh[RC], rho0.coh[LR],
        rho0.coh[ZL], rho0.coh[ZC], rho0.coh[ZR],
        *_rate_args(params), uniforms, decimate,
        out_pll, out_pcc, out_prr, out_n, jump_buf)
    if bad_step >= 0:
        raise TrajectoryDivergedError(
            f"non-finite element at step {bad_step}", step=int(bad_step))
    times = params.dt * decimate * np.arange(1, n_bins + 1)
    rates = build_rates(params)
    p00 = 1.0 - out_pll - out_pcc - out_prr
    i_t = rates.gamma_R_out * out_prr - rates.gamma_R_in * p00
    return JumpTrajectory(
        times=times, rho_cc=out_pcc, rho_ll=out_pll, rho_rr=out_prr,
        i_t=i_t, n_detected=out_n, jump_times=jump_buf[:n_jumps].copy(),
        seed=stream.seed, stream_id=stream.stream_id,
        dt=params.dt, decimate=decimate,
    )


def analytic_rho_cc(t_since_jump, params):
    """Short-time central occupation between detections.

    (2 omega^2/delta^2) e^{gam t/2} (1 - cos(delta t)), valid for
    omega, gam << delta and small t.  Accepts scalars or arrays.
    """
    if params.delta == 0:
        raise ConfigError("analytic form undefined at zero detuning")
    t = np.asarray(t_since_jump, dtype=float)
    amp = 2.0 * params.omega**2 / params.delta**2
    out = amp * np.exp(0.5 * params.gamma_meas * t) * (1.0 - np.cos(params.delta * t))
    return float(out) if np.isscalar(t_since_jump) else out
