"""Model construction and deterministic evolution."""

import numpy as np
import pytest
import scipy.linalg

from tqdsim import (DensityMatrix, SystemParams, build_hamiltonian,
                    build_rates, dissipator, effective_coupling,
                    evolve_master, fermi, lindblad_rhs, liouvillian_matrix,
                    steady_state)
from tqdsim.core import FINITE_BIAS
from tqdsim.exceptions import (ConfigError, NonUniqueSteadyStateError,
                               StabilityError)
from tqdsim.state import CENTER, EMPTY, LEFT, RIGHT


def random_density_matrix(rng):
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = x @ x.conj().T
    return DensityMatrix.from_matrix(m / m.trace().real)


# -- hamiltonian ------------------------------------------------------------

def test_hamiltonian_entries():
    h = build_hamiltonian(SystemParams(omega=1, delta=10, epsilon=0))
    assert h[CENTER, CENTER] == 10
    assert h[LEFT, CENTER] == h[CENTER, LEFT] == 1
    assert h[RIGHT, CENTER] == h[CENTER, RIGHT] == 1
    assert h[LEFT, RIGHT] == 0
    assert np.all(h[EMPTY, :] == 0) and np.all(h[:, EMPTY] == 0)


def test_hamiltonian_zero_detuning():
    h = build_hamiltonian(SystemParams(omega=1, delta=0, epsilon=0, gamma_meas=1))
    assert h[CENTER, CENTER] == 0


def test_hamiltonian_substitution():
    h = build_hamiltonian(SystemParams(omega=2, delta=10, epsilon=3))
    assert h[LEFT, LEFT] == 3
    assert h[CENTER, CENTER] == 13
    assert abs(h[LEFT, CENTER]) == 2


def test_hopping_sign_is_a_gauge_choice():
    # populations are invariant under omega -> -omega (|C> -> -|C|>);
    # flipping the sign of the built hopping entries by hand must leave
    # every population trajectory unchanged
    params = SystemParams(dt=1e-3)
    h_plus = build_hamiltonian(params)
    gauge = np.diag([1.0, 1.0, -1.0, 1.0])
    h_minus = gauge @ h_plus @ gauge
    assert h_minus[LEFT, CENTER] == -h_plus[LEFT, CENTER]
    rho = DensityMatrix.basis_state("L").matrix
    for h in (h_plus, h_minus):
        u = scipy.linalg.expm(-1j * h * 0.7)
        rho_t = u @ rho @ u.conj().T
        if h is h_plus:
            ref = rho_t.diagonal().real
        else:
            np.testing.assert_allclose(rho_t.diagonal().real, ref, atol=1e-14)


# -- fermi function and rates ----------------------------------------------

def test_fermi_symmetry_point():
    assert fermi(0.0, 1.0) == 0.5


def test_fermi_particle_hole_symmetry():
    rng = np.random.default_rng(1)
    for e in rng.normal(scale=5.0, size=50):
        assert fermi(e, 0.7) + fermi(-e, 0.7) == pytest.approx(1.0, abs=1e-15)


def test_fermi_tail_against_high_precision_oracle():
    # mpmath: 1/(1+e^100) = 3.720075976020835963e-44
    assert fermi(10.0, 0.1) == pytest.approx(3.720075976020836e-44, rel=1e-12)


def test_fermi_zero_temperature_step():
    assert fermi(-1.0, 0.0) == 1.0
    assert fermi(0.0, 0.0) == 0.5
    assert fermi(2.0, 0.0) == 0.0


def test_fermi_rejects_negative_temperature():
    with pytest.raises(ConfigError):
        fermi(1.0, -0.5)


def test_rates_infinite_bias():
    r = build_rates(SystemParams(gamma_l=10, gamma_r=8))
    assert (r.gamma_L_in, r.gamma_L_out, r.gamma_R_in, r.gamma_R_out) == (10, 0, 0, 8)


def test_rates_finite_bias_resonant_lead():
    p = SystemParams(epsilon=2.0, bias_mode=FINITE_BIAS,
                     bath=[(2.0, 0.5), (-50.0, 0.5)])
    r = build_rates(p)
    assert r.gamma_L_in == pytest.approx(p.gamma_l / 2)
    assert r.gamma_L_out == pytest.approx(p.gamma_l / 2)


def test_rates_finite_bias_large_potential_limit():
    p = SystemParams(bias_mode=FINITE_BIAS, bath=[(1e4, 1.0), (-1e4, 1.0)])
    r = build_rates(p)
    assert r.gamma_L_in == pytest.approx(p.gamma_l)
    assert r.gamma_L_out == pytest.approx(0.0, abs=1e-12)
    assert r.gamma_R_in == pytest.approx(0.0, abs=1e-12)
    assert r.gamma_R_out == pytest.approx(p.gamma_r)


# -- params validation -------------------------------------------------------

def test_params_stability_guard():
    with pytest.raises(StabilityError):
        SystemParams(gamma_meas=10.0, dt=1.0)


def test_params_negative_rate_rejected():
    with pytest.raises(ConfigError):
        SystemParams(gamma_l=-1.0)


# -- dissipator ---------------------------------------------------------------

def test_dissipator_single_decay_channel():
    gamma_r = 8.0
    op = np.zeros((4, 4), complex)
    op[EMPTY, RIGHT] = np.sqrt(gamma_r)
    rho = DensityMatrix.basis_state("R")
    out = dissipator(op, rho)
    expected = np.zeros((4, 4), complex)
    expected[EMPTY, EMPTY] = gamma_r
    expected[RIGHT, RIGHT] = -gamma_r
    np.testing.assert_allclose(out, expected, atol=1e-14)


def test_dissipator_measurement_eigenstate():
    op = np.zeros((4, 4), complex)
    op[CENTER, CENTER] = np.sqrt(3.0)
    out = dissipator(op, DensityMatrix.basis_state("C"))
    np.testing.assert_allclose(out, 0, atol=1e-14)


def test_dissipator_dephasing_of_lc_coherence():
    gamma = 6.0
    op = np.zeros((4, 4), complex)
    op[CENTER, CENTER] = np.sqrt(gamma)
    x = 0.21 + 0.13j
    m = np.zeros((4, 4), complex)
    m[LEFT, LEFT] = m[CENTER, CENTER] = 0.5
    m[LEFT, CENTER] = x
    m[CENTER, LEFT] = np.conj(x)
    out = dissipator(op, DensityMatrix.from_matrix(m))
    assert out[LEFT, CENTER] == pytest.approx(-0.5 * gamma * x)


def test_dissipator_traceless(seeded_rng):
    op = seeded_rng.normal(size=(4, 4)) + 1j * seeded_rng.normal(size=(4, 4))
    rho = random_density_matrix(seeded_rng)
    assert abs(np.trace(dissipator(op, rho))) < 1e-12


# -- lindblad right-hand side -------------------------------------------------

def test_rhs_coherence_growth_from_left():
    p = SystemParams(gamma_l=0, gamma_r=0, gamma_meas=0, delta=10)
    out = lindblad_rhs(DensityMatrix.basis_state("L"), p)
    assert out[LEFT, CENTER] == pytest.approx(1j * p.omega)


def test_rhs_filling_from_empty():
    p = SystemParams(gamma_l=10, gamma_r=8)
    out = lindblad_rhs(DensityMatrix.basis_state("0"), p)
    assert out[LEFT, LEFT].real == pytest.approx(10.0)
    assert out[EMPTY, EMPTY].real == pytest.approx(-10.0)


def test_rhs_vanishes_at_steady_state():
    p = SystemParams()
    rho = steady_state(p)
    assert np.linalg.norm(lindblad_rhs(rho, p)) < 1e-10


def test_rhs_traceless_and_hermitian_property():
    # randomized property sweep, 1000 draws
    rng = np.random.default_rng(7)
    p = SystemParams(gamma_meas=3.0, delta=5.0)
    for _ in range(1000):
        out = lindblad_rhs(random_density_matrix(rng), p)
        assert abs(np.trace(out)) < 1e-12
        assert np.abs(out - out.conj().T).max() < 1e-12


def test_liouvillian_matches_rhs(seeded_rng):
    p = SystemParams(gamma_meas=4.0)
    sup = liouvillian_matrix(p)
    for _ in range(20):
        rho = random_density_matrix(seeded_rng)
        lhs = (sup @ rho.matrix.flatten(order="F")).reshape(4, 4, order="F")
        np.testing.assert_allclose(lhs, lindblad_rhs(rho, p), atol=1e-12)


# -- deterministic evolution ---------------------------------------------------

def test_evolve_master_unitary_limit_against_expm_oracle():
    # closed chain, delta = 20: first oscillation peak of the central
    # occupation; expm oracle value frozen at t = pi/20
    p = SystemParams(delta=20.0, gamma_l=0.0, gamma_r=0.0, gamma_meas=0.0,
                     dt=np.pi / 20 / 1000)
    ev = evolve_master(DensityMatrix.basis_state("L"), p, np.pi / 20,
                       store_every=10)
    assert ev.rho_cc[-1] == pytest.approx(0.00980152663498041, rel=1e-8)
    # consistent with the large-detuning estimate 2 (omega/delta)^2 (1 - cos)
    assert ev.rho_cc[-1] == pytest.approx(0.01, rel=0.05)


def test_evolve_master_trace_preservation():
    p = SystemParams(dt=1e-3)
    ev = evolve_master(DensityMatrix.basis_state("L"), p, 100.0, store_every=100)
    assert np.abs(ev.traces - 1.0).max() < 1e-8


def test_evolve_master_fig2b_rise_and_plateau():
    p = SystemParams(dt=1e-3)  # gamma = 10, delta = 10, rates 10/8
    ev = evolve_master(DensityMatrix.basis_state("L"), p, 60.0, store_every=10)
    ss = steady_state(p)
    assert ev.rho_cc[0] == pytest.approx(0.0, abs=1e-6)
    assert ev.rho_cc[-1] == pytest.approx(ss.rho_cc, abs=1e-6)
    assert ev.rho_cc[-1] > 0.25


def test_evolve_master_against_expm_of_liouvillian(seeded_rng):
    p = SystemParams(gamma_meas=7.0, dt=1e-4)
    rho0 = random_density_matrix(seeded_rng)
    ev = evolve_master(rho0, p, 0.5, store_every=5000)
    prop = scipy.linalg.expm(liouvillian_matrix(p) * 0.5)
    exact = (prop @ rho0.matrix.flatten(order="F")).reshape(4, 4, order="F")
    np.testing.assert_allclose(ev.matrices[-1], exact, atol=1e-10)


def test_evolve_master_rejects_nonpositive_time():
    with pytest.raises(ConfigError):
        evolve_master(DensityMatrix.basis_state("L"), SystemParams(), -1.0)


# -- steady state ---------------------------------------------------------------

def test_steady_state_suppressed_without_measurement():
    rho = steady_state(SystemParams(gamma_meas=0.0))
    assert rho.rho_cc < 0.02


def test_steady_state_zeno_saturation_value():
    rho = steady_state(SystemParams(gamma_meas=100.0))
    assert abs(rho.rho_cc - 1.0 / 3.0) < 0.05


def test_steady_state_is_fixed_point_of_evolution():
    p = SystemParams(gamma_meas=10.0, dt=1e-3)
    rho = steady_state(p)
    ev = evolve_master(rho, p, 10.0, store_every=1000)
    assert np.abs(ev.matrices[-1] - rho.matrix).max() < 1e-8


def test_steady_state_virtual_suppression_at_large_detuning():
    rho = steady_state(SystemParams(delta=25.0, gamma_meas=0.0))
    assert rho.rho_cc < rho.rho_ll / 10


def test_steady_state_degenerate_chain_detected():
    with pytest.raises(NonUniqueSteadyStateError):
        steady_state(SystemParams(omega=0.0, delta=1.0, gamma_meas=0.0))


def test_effective_coupling_values():
    assert effective_coupling(SystemParams(omega=1, delta=10)) == pytest.approx(0.1)
    assert effective_coupling(SystemParams(omega=2, delta=10)) == pytest.approx(0.4)
    assert effective_coupling(SystemParams(omega=1, delta=20)) == pytest.approx(0.05)
    with pytest.raises(ConfigError):
        effective_coupling(SystemParams(omega=1, delta=0, gamma_meas=1))
