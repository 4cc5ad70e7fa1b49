"""Quantum-trajectory simulator for a continuously monitored triple-dot junction."""

__version__ = "0.1.0"

from .core import (RateSet, SystemParams, build_hamiltonian, build_rates,
                   dissipator, effective_coupling, evolve_master, fermi,
                   lindblad_rhs, liouvillian_matrix, steady_state)
from .diffusive import (TrajectoryRecord, record_sample,
                        run_diffusive_trajectory, sme_step, time_average)
from .harness import (CorrelationCell, EnsembleStats, ExperimentConfig,
                      SweepCell, correlation_experiment, run_ensemble,
                      sweep_steady_state)
from .jump import (JumpTrajectory, analytic_rho_cc, apply_jump,
                   jump_probability, no_jump_step, run_jump_trajectory)
from .observables import (CorrelationResult, DetectorModel,
                          correlate_currents, measurement_strength, pearson,
                          qpc_current, tqd_current, zero_freq_cross)
from .state import DensityMatrix
from .streams import WienerStream

__all__ = [
    "CorrelationCell", "CorrelationResult", "DensityMatrix", "DetectorModel",
    "EnsembleStats", "ExperimentConfig", "JumpTrajectory", "RateSet",
    "SweepCell", "SystemParams", "TrajectoryRecord", "WienerStream",
    "analytic_rho_cc", "apply_jump", "build_hamiltonian", "build_rates",
    "correlate_currents", "correlation_experiment", "dissipator",
    "effective_coupling", "evolve_master", "fermi", "jump_probability",
    "lindblad_rhs", "liouvillian_matrix", "measurement_strength",
    "no_jump_step", "pearson", "qpc_current", "record_sample",
    "run_diffusive_trajectory", "run_ensemble", "run_jump_trajectory",
    "sme_step", "steady_state", "sweep_steady_state", "time_average",
    "tqd_current", "zero_freq_cross",
]
