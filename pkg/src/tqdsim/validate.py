"""Invariant suite behind the ``validate`` subcommand.

Each check returns (name, passed, detail); the CLI prints one line per
check.  Checks cover conservation laws of the deterministic evolution,
noise-free measurement eigenstates, projective-update bookkeeping, the
measurement-induced dephasing rate, the unitary limit against a
matrix-exponential oracle, trajectory clamping, and the raw noise
moments.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .core import SystemParams, build_hamiltonian, evolve_master, lindblad_rhs
from .diffusive import CLAMP_LIMIT, run_diffusive_trajectory, sme_step
from .jump import no_jump_step, run_jump_trajectory
from .state import CENTER, LEFT, DensityMatrix
from .streams import WienerStream


def _superposition_lc():
    m = np.zeros((4, 4), dtype=np.complex128)
    m[LEFT, LEFT] = m[CENTER, CENTER] = 0.5
    m[LEFT, CENTER] = m[CENTER, LEFT] = 0.5
    return DensityMatrix.from_matrix(m)


def check_trace_hermiticity():
    """Trace drift < 1e-8 over 100/Omega; stored states exactly Hermitian."""
    params = SystemParams(dt=1e-3)
    ev = evolve_master(DensityMatrix.basis_state("L"), params, 100.0, store_every=100)
    drift = np.abs(ev.traces - 1.0).max()
    herm = max(np.abs(m - m.conj().T).max() for m in ev.matrices)
    ok = drift < 1e-8 and herm < 1e-12
    return "trace/hermiticity preservation", ok, f"trace drift {drift:.2e}, asymmetry {herm:.2e}"


def check_positivity():
    """Eigenvalues stay above the -1e-6 monitoring floor along evolution."""
    params = SystemParams(dt=1e-3)
    ev = evolve_master(DensityMatrix.basis_state("L"), params, 20.0, store_every=20)
    lam = min(np.linalg.eigvalsh(m).min() for m in ev.matrices)
    ok = lam >= -1e-6
    return "positivity monitor", ok, f"min eigenvalue {lam:.2e}"


def check_measurement_eigenstate_noise_free():
    """|C><C| acquires no stochastic increment: dW-dependence vanishes."""
    params = SystemParams()
    rho = DensityMatrix.basis_state("C")
    kicked = sme_step(rho, params, 0.05)
    quiet = sme_step(rho, params, 0.0)
    diff = max(np.abs(kicked.pop - quiet.pop).max(),
               np.abs(kicked.coh - quiet.coh).max())
    # stationary under the no-detection flow when nothing else acts
    frozen = SystemParams(omega=0.0, gamma_l=0.0, gamma_r=0.0, gamma_meas=5.0, delta=1.0)
    nj = no_jump_step(rho, frozen)
    drift = max(np.abs(nj.pop - rho.pop).max(), np.abs(nj.coh - rho.coh).max())
    ok = diff < 1e-15 and drift < 1e-15
    return "measurement eigenstate is noise-free", ok, f"dW sensitivity {diff:.1e}, no-detection drift {drift:.1e}"


def check_post_jump_projection():
    """Every stored entry at a detection time has rho_cc = 0 exactly."""
    params = SystemParams(delta=20.0, gamma_l=20.0, gamma_r=16.0, gamma_meas=5.0)
    traj = run_jump_trajectory(DensityMatrix.basis_state("L"), params, 5.0,
                               WienerStream(seed=3, stream_id=0, dt=params.dt),
                               decimate=1)
    idx = np.searchsorted(traj.times, traj.jump_times)
    worst = np.abs(traj.rho_cc[idx]).max() if idx.size else 0.0
    ok = worst < 1e-12 and idx.size > 0
    return "post-detection projection", ok, f"{idx.size} detections, max residual rho_cc {worst:.1e}"


def check_dephasing_rate():
    """Coherence of (|L>+|C>)/sqrt(2) decays as exp(-gamma t/2) within 1%."""
    gamma = 5.0
    params = SystemParams(omega=0.0, delta=1.0, gamma_l=0.0, gamma_r=0.0,
                          gamma_meas=gamma, dt=1e-4)
    ev = evolve_master(_superposition_lc(), params, 4.0 / gamma, store_every=80)
    coh = np.abs(ev.matrices[:, LEFT, CENTER])
    expected = 0.5 * np.exp(-0.5 * gamma * ev.times)
    rel = np.abs(coh - expected) / expected
    ok = rel.max() < 0.01
    return "measurement-induced dephasing rate", ok, f"max relative deviation {rel.max():.2e}"


def check_unitary_limit():
    """Closed-chain rho_cc(t) matches the matrix-exponential oracle."""
    params = SystemParams(delta=20.0, gamma_l=0.0, gamma_r=0.0, gamma_meas=0.0)
    rho0 = DensityMatrix.basis_state("L")
    ev = evolve_master(rho0, params, 1.0, store_every=100)
    h = build_hamiltonian(params)
    worst = 0.0
    for t, m in zip(ev.times, ev.matrices):
        u = scipy.linalg.expm(-1j * h * t)
        exact = u @ rho0.matrix @ u.conj().T
        worst = max(worst, abs(m[CENTER, CENTER].real - exact[CENTER, CENTER].real))
    ok = worst < 1e-8
    return "unitary limit vs expm oracle", ok, f"max |rho_cc error| {worst:.2e}"


def check_steady_state_residual():
    """Stationary state really is a fixed point of the equation of motion."""
    from .core import steady_state
    worst = 0.0
    for gamma in (0.0, 1.0, 100.0):
        params = SystemParams(gamma_meas=gamma)
        rho = steady_state(params)
        worst = max(worst, np.linalg.norm(lindblad_rhs(rho, params)))
    ok = worst < 1e-10
    return "stationary-state residual", ok, f"max residual {worst:.2e}"


def check_trajectory_clamping(n_traj=50):
    """No diffusive realization clamps beyond the validity limit."""
    params = SystemParams()
    rho0 = DensityMatrix.basis_state("L")
    worst = 0.0
    flagged = 0
    for i in range(n_traj):
        traj = run_diffusive_trajectory(
            rho0, params, 2.0, WienerStream(seed=17, stream_id=i, dt=params.dt))
        worst = max(worst, traj.max_clamp)
        flagged += 0 if traj.valid else 1
    ok = flagged == 0 and worst <= CLAMP_LIMIT
    return "diffusive clamping", ok, f"{flagged}/{n_traj} flagged, worst clamp {worst:.2e}"


def check_no_jump_trace():
    """No-detection steps conserve the trace without renormalization."""
    params = SystemParams(delta=20.0, gamma_l=20.0, gamma_r=16.0, gamma_meas=5.0)
    rho = DensityMatrix.basis_state("L")
    worst = 0.0
    for _ in range(2000):
        rho = no_jump_step(rho, params)
        worst = max(worst, abs(rho.trace() - 1.0))
    ok = worst < 1e-9
    return "no-detection trace conservation", ok, f"max |trace - 1| {worst:.1e}"


def check_wiener_moments(n=10**6):
    """Increment sample moments: |mean| < 3 sqrt(dt/n), |var/dt - 1| < 1%."""
    dt = 1e-4
    dws = WienerStream(seed=20260810, stream_id=0, dt=dt).increments(n)
    mean_ok = abs(dws.mean()) < 3.0 * np.sqrt(dt / n)
    var = dws.var()
    var_ok = abs(var - dt) / dt < 0.01
    ok = mean_ok and var_ok
    return "wiener increment moments", ok, f"mean {dws.mean():.2e}, var/dt {var / dt:.5f}"


ALL_CHECKS = (
    check_trace_hermiticity,
    check_positivity,
    check_measurement_eigenstate_noise_free,
    check_post_jump_projection,
    check_dephasing_rate,
    check_unitary_limit,
    check_steady_state_residual,
    check_trajectory_clamping,
    check_no_jump_trace,
    check_wiener_moments,
)


def run_all(report=print):
    """Run every invariant check; returns True when all pass."""
    all_ok = True
    for check in ALL_CHECKS:
        name, ok, detail = check()
        all_ok &= ok
        report(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
