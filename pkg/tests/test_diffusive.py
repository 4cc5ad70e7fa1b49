"""Diffusive unraveling: stepper, record, trajectories, time averaging."""

import numpy as np
import pytest

from tqdsim import (DensityMatrix, SystemParams, WienerStream, evolve_master,
                    lindblad_rhs, record_sample, run_diffusive_trajectory,
                    sme_step, time_average)
from tqdsim.exceptions import ConfigError
from tqdsim.state import CENTER, LEFT


def superposition_lc():
    m = np.zeros((4, 4), complex)
    m[LEFT, LEFT] = m[CENTER, CENTER] = 0.5
    m[LEFT, CENTER] = m[CENTER, LEFT] = 0.5
    return DensityMatrix.from_matrix(m)


# -- single step ---------------------------------------------------------------

def test_step_reduces_to_deterministic_euler_without_noise(seeded_rng):
    # dW = 0 and gamma = 0: one Euler step of the ensemble equation
    p = SystemParams(gamma_meas=0.0)
    for _ in range(25):
        x = seeded_rng.normal(size=(4, 4)) + 1j * seeded_rng.normal(size=(4, 4))
        m = x @ x.conj().T
        rho = DensityMatrix.from_matrix(m / m.trace().real)
        stepped = sme_step(rho, p, 0.0)
        euler = rho.matrix + p.dt * lindblad_rhs(rho, p)
        np.testing.assert_allclose(stepped.matrix, euler, atol=1e-12)


def test_step_measurement_eigenstate_is_noise_free():
    p = SystemParams()
    rho = DensityMatrix.basis_state("C")
    with_noise = sme_step(rho, p, 0.07)
    without = sme_step(rho, p, 0.0)
    np.testing.assert_array_equal(with_noise.pop, without.pop)
    np.testing.assert_array_equal(with_noise.coh, without.coh)


def test_step_stochastic_term_magnitude():
    # d(rho_cc) noise part at rho_cc = 1/2: 2 sqrt(gamma) * 1/4 * dW
    p = SystemParams(gamma_meas=10.0, omega=0.0, delta=1.0,
                     gamma_l=0.0, gamma_r=0.0)
    m = np.diag([0.5, 0.0, 0.5, 0.0]).astype(complex)
    rho = DensityMatrix.from_matrix(m)
    dw = 0.01
    kicked = sme_step(rho, p, dw)
    quiet = sme_step(rho, p, 0.0)
    assert kicked.rho_cc - quiet.rho_cc == pytest.approx(0.0158113883008419,
                                                         rel=1e-12)


def test_step_rejects_nonfinite_noise():
    with pytest.raises(ConfigError):
        sme_step(DensityMatrix.basis_state("L"), SystemParams(), np.nan)


# -- detector record -------------------------------------------------------------

def test_record_quiescent():
    assert record_sample(0.0, 0.0, SystemParams()) == 0.0


def test_record_noise_scaling():
    p = SystemParams(gamma_meas=10.0)
    assert record_sample(0.3, 0.02, p) == pytest.approx(63.545553203367575,
                                                        rel=1e-14)


def test_record_requires_detector():
    with pytest.raises(ConfigError):
        record_sample(0.3, 0.0, SystemParams(gamma_meas=0.0))


def test_record_time_average_tracks_occupation():
    # stationary stretch: the stored record's mean sits on the mean
    # occupation within a few standard errors
    p = SystemParams()
    traj = run_diffusive_trajectory(DensityMatrix.basis_state("L"), p, 60.0,
                                    WienerStream(seed=31, stream_id=0, dt=p.dt))
    skip = np.searchsorted(traj.times, 10.0)
    z = traj.record_z[skip:]
    occ = traj.rho_cc[skip:]
    stderr = z.std() / np.sqrt(z.size / 100)  # generous correlation allowance
    assert abs(z.mean() - occ.mean()) < 3 * stderr


# -- trajectories -----------------------------------------------------------------

def test_trajectory_replay_is_bit_identical():
    p = SystemParams()
    rho0 = DensityMatrix.basis_state("L")
    a = run_diffusive_trajectory(rho0, p, 1.0, WienerStream(seed=5, stream_id=2, dt=p.dt))
    b = run_diffusive_trajectory(rho0, p, 1.0, WienerStream(seed=5, stream_id=2, dt=p.dt))
    np.testing.assert_array_equal(a.rho_cc, b.rho_cc)
    np.testing.assert_array_equal(a.record_z, b.record_z)
    np.testing.assert_array_equal(a.dw, b.dw)


def test_trajectory_distinct_streams_differ():
    p = SystemParams()
    rho0 = DensityMatrix.basis_state("L")
    a = run_diffusive_trajectory(rho0, p, 0.5, WienerStream(seed=5, stream_id=0, dt=p.dt))
    b = run_diffusive_trajectory(rho0, p, 0.5, WienerStream(seed=5, stream_id=1, dt=p.dt))
    assert not np.array_equal(a.rho_cc, b.rho_cc)


def test_trajectory_matches_chain_of_single_steps():
    p = SystemParams()
    rho = DensityMatrix.basis_state("L")
    stream = WienerStream(seed=9, stream_id=0, dt=p.dt)
    traj = run_diffusive_trajectory(rho, p, 0.02, stream, decimate=1)
    dws = stream.increments(traj.times.size)
    for k, dw in enumerate(dws):
        rho = sme_step(rho, p, dw)
        assert rho.rho_cc == pytest.approx(traj.rho_cc[k], abs=1e-14)


def test_trajectory_no_measurement_limit_matches_master():
    p = SystemParams(gamma_meas=0.0)
    rho0 = DensityMatrix.basis_state("L")
    traj = run_diffusive_trajectory(rho0, p, 2.0,
                                    WienerStream(seed=1, stream_id=0, dt=p.dt))
    master = evolve_master(rho0, p, 2.0, store_every=10)
    # Euler vs RK4 at dt = 1e-4: small but nonzero discretization gap
    np.testing.assert_allclose(traj.rho_cc, master.rho_cc[1:], atol=5e-4)
    np.testing.assert_allclose(traj.rho_ll, master.rho_ll[1:], atol=5e-4)


def test_trajectory_occasionally_reaches_high_occupation():
    # strong-monitoring realizations pin the central dot near full
    # occupation now and then
    p = SystemParams()  # delta=10, gamma=10, rates 10/8
    rho0 = DensityMatrix.basis_state("L")
    high = 0.0
    for sid in range(12):
        traj = run_diffusive_trajectory(
            rho0, p, 10.0, WienerStream(seed=77, stream_id=sid, dt=p.dt))
        high = max(high, traj.rho_cc.max())
    assert high > 0.9


def test_trajectory_populations_stay_in_range():
    p = SystemParams(gamma_meas=30.0)
    traj = run_diffusive_trajectory(DensityMatrix.basis_state("L"), p, 5.0,
                                    WienerStream(seed=13, stream_id=0, dt=p.dt))
    for arr in (traj.rho_ll, traj.rho_cc, traj.rho_rr):
        assert arr.min() >= -1e-6 and arr.max() <= 1 + 1e-6
    assert traj.valid


def _max_purity_error(gamma, dt, seed, t_total=10.0):
    from tqdsim.diffusive import advance_conditioned
    p = SystemParams(gamma_l=0.0, gamma_r=0.0, gamma_meas=gamma,
                     delta=5.0, dt=dt)
    rng = np.random.default_rng(seed)
    rho = superposition_lc()
    worst = 0.0
    for _ in range(10):
        dws = rng.standard_normal(int(t_total / 10 / dt)) * np.sqrt(dt)
        rho = advance_conditioned(rho, p, dws)
        worst = max(worst, abs(1.0 - rho.purity()))
    return worst


def test_trajectory_purity_preserved_without_leads():
    # measurement unraveling alone does not mix: the purity deviation
    # over 10/Omega is a discretization artifact that shrinks with dt
    coarse = [_max_purity_error(0.1, 1e-4, s) for s in range(3)]
    fine = [_max_purity_error(0.1, 1e-5, s) for s in range(3)]
    assert max(fine) < 2e-3
    assert np.mean(coarse) / np.mean(fine) > 2.0


def test_trajectory_i_t_definition():
    p = SystemParams()
    traj = run_diffusive_trajectory(DensityMatrix.basis_state("L"), p, 0.5,
                                    WienerStream(seed=2, stream_id=0, dt=p.dt))
    np.testing.assert_allclose(traj.i_t, p.gamma_r * traj.rho_rr, atol=1e-14)


def test_trajectory_bin_record_reconstruction():
    # stored z is the bin mean: the noise part must equal the stored
    # summed increment scaled by 1/(sqrt(gamma) k dt)
    p = SystemParams()
    k = 10
    traj = run_diffusive_trajectory(DensityMatrix.basis_state("L"), p, 0.1,
                                    WienerStream(seed=8, stream_id=0, dt=p.dt),
                                    decimate=k)
    noise = traj.dw / (np.sqrt(p.gamma_meas) * k * p.dt)
    state_part = traj.record_z - noise
    assert state_part.min() > -1e-9 and state_part.max() < 1 + 1e-9


# -- time averaging -----------------------------------------------------------------

def test_time_average_constant_unchanged():
    out = time_average(np.full(50, 3.7), window=0.1, dt=0.01)
    np.testing.assert_allclose(out, 3.7, atol=1e-14)


def test_time_average_window_of_one_sample_is_identity():
    sig = np.arange(20.0)
    np.testing.assert_array_equal(time_average(sig, window=0.01, dt=0.01), sig)


def test_time_average_impulse_spread():
    sig = np.zeros(21)
    sig[10] = 1.0
    out = time_average(sig, window=0.5, dt=0.1)  # 5-sample window
    np.testing.assert_allclose(out[8:13], 0.2, atol=1e-14)
    assert np.all(out[:8] == 0) and np.all(out[13:] == 0)


def test_time_average_rejects_empty():
    with pytest.raises(ConfigError):
        time_average(np.array([]), window=0.1, dt=0.01)
