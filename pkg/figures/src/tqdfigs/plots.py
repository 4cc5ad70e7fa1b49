"""Figure renderers for the simulator's CSV output.

Each renderer reads only documented file schemas and writes a PNG and
an SVG.  Styling is fixed (including the SVG hash salt), so
byte-identical inputs yield byte-identical images.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import SchemaError, read_jump_sidecar, read_manifest, read_table  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 130,
    "savefig.dpi": 130,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "tqdfigs",
}

FIGURE_IDS = ("2a", "2b", "3a", "3b", "4a", "4b", "s1")


@dataclass
class FigureSpec:
    """One render request: figure id, named input paths, output stem."""

    figure_id: str
    inputs: dict
    output: str
    style: dict = field(default_factory=dict)


def _save(fig, output):
    stem = Path(output)
    if stem.suffix.lower() in (".png", ".svg"):
        stem = stem.with_suffix("")
    stem.parent.mkdir(parents=True, exist_ok=True)
    paths = [stem.with_suffix(".png"), stem.with_suffix(".svg")]
    fig.savefig(paths[0])
    fig.savefig(paths[1], metadata={"Date": None})
    plt.close(fig)
    return paths


def _cell_edges(values):
    """Edges for pcolormesh on a log grid, tolerant of single-value axes."""
    values = np.asarray(values, dtype=float)
    if values.size == 1:
        v = values[0] if values[0] > 0 else 1.0
        return np.array([v / 1.5, v * 1.5])
    logs = np.log(np.where(values > 0, values, values[values > 0].min() / 10))
    mids = 0.5 * (logs[1:] + logs[:-1])
    first = logs[0] - (mids[0] - logs[0])
    last = logs[-1] + (logs[-1] - mids[-1])
    return np.exp(np.concatenate([[first], mids, [last]]))


def _heatmap(sweep_path, column, label, output):
    table = read_table(sweep_path, "sweep")
    deltas = np.unique(table["delta"])
    gammas = np.unique(table["gamma"])
    grid = np.full((gammas.size, deltas.size), np.nan)
    for d, g, v in zip(table["delta"], table["gamma"], table[column]):
        grid[np.searchsorted(gammas, g), np.searchsorted(deltas, d)] = v
    fig, ax = plt.subplots()
    positive_g = gammas.copy()
    if positive_g[0] == 0:  # log axis cannot show gamma = 0 at its value
        positive_g[0] = positive_g[1] / 10 if positive_g.size > 1 else 0.1
    mesh = ax.pcolormesh(_cell_edges(deltas), _cell_edges(positive_g), grid,
                         shading="flat", cmap="viridis")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"detuning $\Delta$ [$\Omega$]")
    ax.set_ylabel(r"measurement strength $\gamma$ [$\Omega$]")
    fig.colorbar(mesh, ax=ax, label=label)
    return _save(fig, output)


def fig_2a(spec):
    """Stationary central-dot occupation over the (detuning, strength) grid."""
    return _heatmap(spec.inputs["sweep"], "rho_cc_ss",
                    r"$\rho_{CC}$ (stationary)", spec.output)


def fig_s1(spec):
    """Stationary junction current over the (detuning, strength) grid."""
    return _heatmap(spec.inputs["sweep"], "i_t_ss",
                    r"$I_T$ (stationary) [$\Omega$]", spec.output)


def _centered_mean(signal, window_samples):
    w = max(int(window_samples), 1)
    half_l = (w - 1) // 2
    half_r = w // 2
    csum = np.concatenate([[0.0], np.cumsum(signal)])
    n = signal.size
    hi = np.minimum(np.arange(n) + half_r + 1, n)
    lo = np.maximum(np.arange(n) - half_l, 0)
    return (csum[hi] - csum[lo]) / (hi - lo)


def fig_2b(spec, smoothing_window=0.1):
    """Monitored-occupation realizations over the ensemble mean."""
    ensemble = read_table(spec.inputs["ensemble"], "ensemble")
    fig, ax = plt.subplots()
    for k, path in enumerate(spec.inputs["trajectories"]):
        traj = read_table(path, "trajectory")
        dt = traj["t"][1] - traj["t"][0] if traj["t"].size > 1 else 1.0
        smooth = _centered_mean(traj["rho_cc"], round(smoothing_window / dt))
        ax.plot(traj["t"], smooth, lw=0.8, alpha=0.8,
                label=f"realization {k}" if k < 3 else None)
    ax.plot(ensemble["t"], ensemble["mean_rho_cc"], "k", lw=2.0,
            label="ensemble mean")
    ax.set_xlabel(r"$t$ [$1/\Omega$]")
    ax.set_ylabel(r"$\rho_{CC}$")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="upper right", fontsize=8)
    return _save(fig, spec.output)


def _per_delta_curves(path):
    table = read_table(path, "correlation")
    for delta in np.unique(table["delta"]):
        sel = table["delta"] == delta
        order = np.argsort(table["gamma"][sel])
        yield delta, {k: v[sel][order] for k, v in table.items()}


def fig_3a(spec):
    """Zero-frequency current/record cross-correlation vs strength."""
    fig, ax = plt.subplots()
    for delta, cur in _per_delta_curves(spec.inputs["correlations"]):
        noisy = cur["noisy"] > 0.5
        ax.errorbar(cur["gamma"], cur["s_tq"], yerr=cur["s_tq_err"],
                    marker="o", ms=4, lw=1.0, capsize=2,
                    label=rf"$\Delta = {delta:g}\,\Omega$")
        if noisy.any():
            ax.plot(cur["gamma"][noisy], cur["s_tq"][noisy], "o", ms=9,
                    mfc="none", mec="crimson")
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xscale("log")
    ax.set_xlabel(r"measurement strength $\gamma$ [$\Omega$]")
    ax.set_ylabel(r"$S_{TQ}(0)$")
    ax.legend(fontsize=8)
    return _save(fig, spec.output)


def fig_3b(spec):
    """Pearson coefficient of the two currents vs strength."""
    fig, ax = plt.subplots()
    for delta, cur in _per_delta_curves(spec.inputs["correlations"]):
        ax.errorbar(cur["gamma"], cur["pearson"], yerr=cur["pearson_err"],
                    marker="s", ms=4, lw=1.0, capsize=2,
                    label=rf"$\Delta = {delta:g}\,\Omega$")
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xscale("log")
    ax.set_ylim(-1.0, 0.1)
    ax.set_xlabel(r"measurement strength $\gamma$ [$\Omega$]")
    ax.set_ylabel(r"Pearson coefficient")
    ax.legend(fontsize=8)
    return _save(fig, spec.output)


def analytic_between_detections(times, jump_times, omega, delta, gamma):
    """Piecewise short-time occupation, restarted at each detection."""
    times = np.asarray(times, dtype=float)
    starts = np.concatenate([[0.0], np.sort(np.asarray(jump_times, float))])
    last = starts[np.searchsorted(starts, times, side="right") - 1]
    t_rel = times - last
    return (2.0 * omega**2 / delta**2 * np.exp(0.5 * gamma * t_rel)
            * (1.0 - np.cos(delta * t_rel)))


def _detection_figure(spec, with_analytic):
    path = spec.inputs["jump"]
    table = read_table(path, "jump")
    sidecar = read_jump_sidecar(path)
    fig, ax = plt.subplots()
    ax.plot(table["t"], table["rho_cc"], "r-", lw=0.9, label="conditioned")
    if with_analytic:
        cfg = read_manifest(path)
        overlay = analytic_between_detections(
            table["t"], sidecar["jump_times"], float(cfg["omega"]),
            float(cfg["delta"]), float(cfg["gamma"]))
        ax.plot(table["t"], overlay, "k--", lw=1.0, label="analytic")
    ax.set_xlabel(r"$t$ [$1/\Omega$]")
    ax.set_ylabel(r"$\rho_{CC}$", color="r")
    ax.tick_params(axis="y", labelcolor="r")
    if with_analytic or table["rho_cc"].max() < 0.5:
        ax.set_ylim(0.0, max(1.5 * table["rho_cc"].max(), 1e-3))
    twin = ax.twinx()
    twin.step(table["t"], table["n_detected"], where="post", color="c",
              lw=1.2, label="detected electrons")
    twin.set_ylabel(r"$N(t)$", color="c")
    twin.tick_params(axis="y", labelcolor="c")
    twin.grid(False)
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, spec.output)


def fig_4a(spec):
    """Detection trace with the analytic between-detection overlay."""
    return _detection_figure(spec, with_analytic=True)


def fig_4b(spec):
    """Strong-monitoring detection trace (occupation plateaus, no overlay)."""
    return _detection_figure(spec, with_analytic=False)


_RENDERERS = {
    "2a": (fig_2a, ("sweep",)),
    "2b": (fig_2b, ("ensemble", "trajectories")),
    "3a": (fig_3a, ("correlations",)),
    "3b": (fig_3b, ("correlations",)),
    "4a": (fig_4a, ("jump",)),
    "4b": (fig_4b, ("jump",)),
    "s1": (fig_s1, ("sweep",)),
}


def plot_figure(spec):
    """Render one figure; returns the written image paths."""
    fid = spec.figure_id.lower()
    if fid not in _RENDERERS:
        raise SchemaError(f"unknown figure id {spec.figure_id!r}; "
                          f"expected one of {', '.join(FIGURE_IDS)}")
    renderer, required = _RENDERERS[fid]
    missing = [name for name in required if not spec.inputs.get(name)]
    if missing:
        raise SchemaError(
            f"figure {fid} needs input(s): {', '.join(missing)}")
    with plt.rc_context({**STYLE, **spec.style}):
        return renderer(spec)
