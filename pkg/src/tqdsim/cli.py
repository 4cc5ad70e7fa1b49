"""Command-line entry point.

Subcommands: steady, traj-diffusive, traj-jump, ensemble, sweep,
correlate, validate.  Every config key is available as a flag; flags
override a ``--config`` file.  The TQDSIM_OUTDIR environment variable
sets the default output directory.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 insufficient data for an estimator.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import validate
from .exceptions import (ConfigError, EnsembleError, EstimatorError,
                         NonUniqueSteadyStateError, PositivityError,
                         StabilityError, TqdsimError, TrajectoryDivergedError)
from .harness import (correlation_experiment, run_ensemble,
                      sweep_steady_state)
from .runio import emit, parse_config
from .state import DensityMatrix
from .streams import WienerStream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ESTIMATOR = 4

# per-subcommand defaults filled in before flag overrides
_SUBCOMMAND_DEFAULTS = {
    "steady": {"mode": "steady"},
    "traj-diffusive": {"mode": "diffusive"},
    "traj-jump": {"mode": "jump", "delta": "20", "gamma_l": "20",
                  "gamma_r": "16", "gamma": "0.5"},
    "ensemble": {},
    "sweep": {"mode": "sweep"},
    "correlate": {"mode": "correlate", "gamma_l": "20", "gamma_r": "16",
                  "n_traj": "8", "t_final": "90"},
    "validate": {"mode": "master"},
}


def _add_common_flags(sub):
    for key, help_text in (
        ("omega", "hopping (energy scale, default 1)"),
        ("delta", "central-dot detuning"),
        ("epsilon", "outer-dot onsite energy"),
        ("gamma", "measurement strength"),
        ("gamma_l", "left lead rate"),
        ("gamma_r", "right lead rate"),
        ("dt", "integration step (1/Omega)"),
        ("bias_mode", "infinite-bias or finite-bias"),
        ("mu_l", "left lead potential (finite bias)"),
        ("kt_l", "left lead temperature (finite bias)"),
        ("mu_r", "right lead potential (finite bias)"),
        ("kt_r", "right lead temperature (finite bias)"),
        ("t0", "detector transmittance, dot empty"),
        ("t1", "detector transmittance, dot occupied"),
        ("v_bias", "detector bias voltage"),
        ("s_i", "detector shot-noise density"),
        ("n_traj", "number of trajectories"),
        ("t_final", "run length (1/Omega)"),
        ("seed", "master seed"),
        ("decimate", "store every k-th step"),
        ("threads", "worker processes"),
        ("t_burn", "correlation burn-in (1/Omega)"),
        ("t_cut", "correlation lag cutoff (1/Omega)"),
        ("delta_grid", "comma-separated detuning grid"),
        ("gamma_grid", "comma-separated measurement-strength grid"),
        ("out", "output CSV path"),
    ):
        sub.add_argument(f"--{key.replace('_', '-')}", dest=key,
                         default=None, help=help_text)
    sub.add_argument("--config", default=None,
                     help="flat key=value config file (flags override)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tqdsim",
        description="Monte Carlo trajectory simulator for a monitored "
                    "triple-quantum-dot junction")
    subs = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "steady": "stationary state at one parameter point",
        "traj-diffusive": "one diffusive trajectory",
        "traj-jump": "one detection-counting trajectory",
        "ensemble": "trajectory ensemble statistics",
        "sweep": "stationary-state scan over (delta, gamma)",
        "correlate": "current/record correlation scan",
        "validate": "run the invariant suite",
    }
    for name, desc in descriptions.items():
        sub = subs.add_parser(name, help=desc)
        _add_common_flags(sub)
        if name == "ensemble":
            sub.add_argument("--kind", choices=("diffusive", "jump"),
                             default="diffusive", help="unraveling to run")
    return parser


def _config_from_args(args):
    overrides = dict(_SUBCOMMAND_DEFAULTS[args.command])
    for key in ("omega", "delta", "epsilon", "gamma", "gamma_l", "gamma_r",
                "dt", "bias_mode", "mu_l", "kt_l", "mu_r", "kt_r",
                "t0", "t1", "v_bias", "s_i", "n_traj", "t_final", "seed",
                "decimate", "threads", "t_burn", "t_cut", "delta_grid",
                "gamma_grid", "out"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if args.command == "ensemble":
        overrides["mode"] = args.kind
    return parse_config(args.config, overrides)


def _output_path(config, default_name):
    if config.output_path:
        path = Path(config.output_path)
    else:
        path = Path(default_name)
    if not path.is_absolute() and os.environ.get("TQDSIM_OUTDIR"):
        path = Path(os.environ["TQDSIM_OUTDIR"]) / path
    return path


def _cmd_steady(config):
    from .core import steady_state
    from .observables import tqd_current
    rho = steady_state(config.params)
    print(f"rho_00 = {rho.rho_00:.12g}")
    print(f"rho_ll = {rho.rho_ll:.12g}")
    print(f"rho_cc = {rho.rho_cc:.12g}")
    print(f"rho_rr = {rho.rho_rr:.12g}")
    print(f"i_t    = {tqd_current(rho, config.params):.12g}")
    return EXIT_OK


def _cmd_trajectory(config, runner, default_name):
    rho0 = DensityMatrix.basis_state("L")
    stream = WienerStream(seed=config.seed, stream_id=0, dt=config.params.dt)
    start = time.perf_counter()
    traj = runner(rho0, config.params, config.t_final, stream,
                  decimate=config.decimate)
    path = _output_path(config, default_name)
    emit(traj, path, config=config, runtime_s=time.perf_counter() - start)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_ensemble(config):
    start = time.perf_counter()
    stats = run_ensemble(config)
    path = _output_path(config, f"ensemble_{config.mode}.csv")
    emit(stats, path, config=config, runtime_s=time.perf_counter() - start)
    print(f"wrote {path} ({stats.n_traj} trajectories, "
          f"{stats.n_invalid} excluded)")
    return EXIT_OK


def _cmd_sweep(config):
    start = time.perf_counter()
    cells = sweep_steady_state(config)
    path = _output_path(config, "sweep.csv")
    emit(cells, path, config=config, runtime_s=time.perf_counter() - start)
    n_degenerate = sum(c.degenerate for c in cells)
    print(f"wrote {path} ({len(cells)} cells, {n_degenerate} degenerate)")
    return EXIT_OK


def _cmd_correlate(config):
    start = time.perf_counter()
    cells = correlation_experiment(config)
    path = _output_path(config, "correlations.csv")
    emit(cells, path, config=config, runtime_s=time.perf_counter() - start)
    n_err = sum(bool(c.error) for c in cells)
    if n_err:
        print(f"wrote {path} ({n_err}/{len(cells)} cells lacked data)")
        return EXIT_ESTIMATOR
    print(f"wrote {path}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "steady":
            return _cmd_steady(config)
        if args.command == "traj-diffusive":
            from .diffusive import run_diffusive_trajectory
            return _cmd_trajectory(config, run_diffusive_trajectory,
                                   "trajectory_diffusive.csv")
        if args.command == "traj-jump":
            from .jump import run_jump_trajectory
            return _cmd_trajectory(config, run_jump_trajectory,
                                   "trajectory_jump.csv")
        if args.command == "ensemble":
            return _cmd_ensemble(config)
        if args.command == "sweep":
            return _cmd_sweep(config)
        if args.command == "correlate":
            return _cmd_correlate(config)
        if args.command == "validate":
            return EXIT_OK if validate.run_all() else EXIT_NUMERICAL
        raise ConfigError(f"unhandled command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimatorError as exc:
        print(f"estimator error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR
    except (StabilityError, PositivityError, NonUniqueSteadyStateError,
            TrajectoryDivergedError, EnsembleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
