"""Currents, the charge-detector model, and zero-frequency correlations.

The cross- and auto-correlation estimator is a symmetric-lag covariance
sum over stationary series with batch-means error bars.  Correlations
between the junction current and the detector record are computed on
dimensionless internal series; the detector gain enters only as an
overall sign and scale on output, so the Pearson coefficient depends on
the gain sign alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import build_rates
from .exceptions import ConfigError, EstimatorError

DEFAULT_BURN_IN = 10.0
DEFAULT_LAG_CUT = 5.0
MIN_BATCHES = 8

# estimates whose stderr exceeds this fraction of |value| are flagged noisy
NOISY_FRACTION = 0.5


@dataclass
class DetectorModel:
    """Point-contact charge detector: transmittances, bias, shot noise.

    ``t0`` (``t1``) is the transmission probability with the central dot
    empty (occupied).  The record-to-current gain is
    (e^2 V/h)(t1 - t0) with e = h = 1; its sign fixes the sign
    convention of every cross-correlation.  Default is the
    Coulomb-blockade ordering t0 > t1 (an occupied dot pinches the
    contact off), under which the detector current anti-tracks the
    central occupation.
    """

    t0: float = 0.6
    t1: float = 0.4
    v_bias: float = 1.0
    s_i: float = 1.0

    def __post_init__(self):
        for name in ("t0", "t1"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {val}")
        if self.s_i < 0:
            raise ConfigError(f"s_i must be >= 0, got {self.s_i}")

    @property
    def contrast_sign(self):
        return float(np.sign(self.t1 - self.t0))

    @property
    def gain(self):
        """Record gain (e^2 V/h)(t1 - t0) in e = h = 1 units."""
        return self.v_bias * (self.t1 - self.t0)

    @property
    def gamma(self):
        """Measurement rate implied by the detector settings."""
        return measurement_strength(self)


def measurement_strength(det):
    """Detector measurement rate e^4 V^2 (T0-T1)^2 / (2 h^2 S_I), e = h = 1."""
    if det.s_i <= 0:
        raise ConfigError("shot noise s_i must be > 0 to define a measurement rate")
    return det.v_bias**2 * (det.t0 - det.t1) ** 2 / (2.0 * det.s_i)


def tqd_current(rho, params):
    """Current through the junction, gamma_R * rho_RR at infinite bias.

    At finite bias this generalizes to the net right-lead flow
    gamma_R_out * rho_RR - gamma_R_in * rho_00.
    """
    rates = build_rates(params)
    return rates.gamma_R_out * rho.rho_rr - rates.gamma_R_in * rho.rho_00


def qpc_current(z, det):
    """Detector current (e^2 V/h)[T0 + (T1 - T0) z] for record z."""
    return det.v_bias * (det.t0 + (det.t1 - det.t0) * np.asarray(z, dtype=float))


def _windowed_sum(arr, lag):
    """Moving sum of arr over the truncated window [i-lag, i+lag]."""
    csum = np.concatenate([[0.0], np.cumsum(arr)])
    n = arr.size
    hi = np.minimum(np.arange(n) + lag + 1, n)
    lo = np.maximum(np.arange(n) - lag, 0)
    return csum[hi] - csum[lo]


def _lag_sum(x, y, lag, dt):
    """Symmetric-lag covariance sum dt * sum_{|tau|<=lag} cov(x_t, y_{t+tau}).

    Uses the biased (1/N) covariance estimator; the zero lag is counted
    once, so white noise of variance s^2 gives s^2*dt.  Symmetric in
    (x, y) by construction.
    """
    dx = x - x.mean()
    dy = y - y.mean()
    return dt * float(np.dot(dx, _windowed_sum(dy, lag))) / x.size


def _batch_bounds(n, n_batches):
    edges = (n // n_batches) * np.arange(n_batches + 1)
    return edges


def zero_freq_cross(x, y, dt, t_burn=DEFAULT_BURN_IN, t_cut=DEFAULT_LAG_CUT,
                    n_batches=MIN_BATCHES):
    """Zero-frequency cross-spectral density of two stationary series.

    Samples before ``t_burn`` are discarded, sample means subtracted,
    and the symmetric covariance sum taken over lags up to ``t_cut``.
    The value uses the full post-burn-in series; the standard error
    comes from ``n_batches`` contiguous batches, each of which must span
    the full lag window (else :class:`EstimatorError`).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ConfigError("x and y must be 1-d arrays of equal length")
    if n_batches < 2:
        raise ConfigError("need at least 2 batches for an error bar")
    skip = int(round(t_burn / dt))
    x = x[skip:]
    y = y[skip:]
    lag = int(round(t_cut / dt))
    batch_len = x.size // n_batches
    if batch_len < 2 * lag + 1:
        raise EstimatorError(
            f"only {x.size} samples after burn-in; {n_batches} batches of "
            f">= {2 * lag + 1} samples are required")
    value = _lag_sum(x, y, lag, dt)
    edges = _batch_bounds(x.size, n_batches)
    batch_vals = np.array([
        _lag_sum(x[a:b], y[a:b], lag, dt) for a, b in zip(edges[:-1], edges[1:])
    ])
    stderr = float(batch_vals.std(ddof=1) / np.sqrt(n_batches))
    return value, stderr


def pearson(s_tq, s_tt, s_qq):
    """Normalized cross-correlation s_tq / sqrt(s_tt * s_qq)."""
    if s_tt <= 0 or s_qq <= 0:
        raise EstimatorError("autocorrelations must be positive")
    return s_tq / np.sqrt(s_tt * s_qq)


@dataclass
class CorrelationResult:
    """Zero-frequency spectral densities and their Pearson coefficient."""

    s_tq: float
    s_tq_err: float
    s_tt: float
    s_tt_err: float
    s_qq: float
    s_qq_err: float
    pearson: float
    pearson_err: float
    noisy: bool


def correlate_currents(it_series, z_series, det, dt, t_burn=DEFAULT_BURN_IN,
                       t_cut=DEFAULT_LAG_CUT, min_batches=MIN_BATCHES):
    """Correlation estimates from one or more trajectory series.

    ``it_series`` and ``z_series`` are matching lists of per-trajectory
    junction-current and detector-record arrays sampled at ``dt``.  All
    three spectral densities use identical lag windows and batches; the
    batch pool concatenates across trajectories.  The detector gain of
    ``det`` scales the record channel on output.  Pearson uncertainty is
    a jackknife over batches.
    """
    if len(it_series) != len(z_series) or not it_series:
        raise ConfigError("need matching non-empty lists of series")
    lag = int(round(t_cut / dt))
    skip = int(round(t_burn / dt))
    per_series = max(1, -(-min_batches // len(it_series)))  # ceil division
    batches = []
    for it, z in zip(it_series, z_series):
        it = np.asarray(it, dtype=float)[skip:]
        z = np.asarray(z, dtype=float)[skip:]
        if it.size != z.size:
            raise ConfigError("series lengths disagree")
        batch_len = it.size // per_series
        if batch_len < 2 * lag + 1:
            raise EstimatorError(
                f"batch of {batch_len} samples cannot span the lag window "
                f"({2 * lag + 1} samples)")
        edges = _batch_bounds(it.size, per_series)
        for a, b in zip(edges[:-1], edges[1:]):
            batches.append((
                _lag_sum(it[a:b], z[a:b], lag, dt),
                _lag_sum(it[a:b], it[a:b], lag, dt),
                _lag_sum(z[a:b], z[a:b], lag, dt),
            ))
    vals = np.array(batches)
    n_b = vals.shape[0]
    gain = det.gain
    scale = np.array([gain, 1.0, gain * gain])
    means = vals.mean(axis=0) * scale
    errs = vals.std(axis=0, ddof=1) / np.sqrt(n_b) * np.abs(scale)
    if means[1] > 0 and means[2] > 0:
        eps = pearson(means[0], means[1], means[2])
        # jackknife over batches for the Pearson error
        jack = np.empty(n_b)
        totals = vals.sum(axis=0)
        for i in range(n_b):
            loo = (totals - vals[i]) / (n_b - 1) * scale
            if loo[1] > 0 and loo[2] > 0:
                jack[i] = pearson(loo[0], loo[1], loo[2])
            else:
                jack[i] = np.nan
        eps_err = float(np.sqrt((n_b - 1) / n_b
                                * np.nansum((jack - np.nanmean(jack)) ** 2)))
    else:
        # degenerate channel (e.g. frozen junction current): no Pearson
        eps = np.nan
        eps_err = np.nan
    noisy = bool(not np.isfinite(eps)
                 or errs[0] > NOISY_FRACTION * abs(means[0]))
    return CorrelationResult(
        s_tq=float(means[0]), s_tq_err=float(errs[0]),
        s_tt=float(means[1]), s_tt_err=float(errs[1]),
        s_qq=float(means[2]), s_qq_err=float(errs[2]),
        pearson=float(eps), pearson_err=eps_err, noisy=noisy,
    )
