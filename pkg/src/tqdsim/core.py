"""Model construction and deterministic (ensemble-averaged) dynamics.

Covers the Hamiltonian of the three-dot chain, lead tunneling rates,
Lindblad dissipators (leads plus charge-detector dephasing), fixed-step
4th-order integration of the master equation, and the stationary state
via the vectorized Liouvillian null space.

Units: hbar = e = 1, energies and rates in units of the hopping Omega,
times in 1/Omega.

Sign convention: the nearest-neighbor hopping enters the Hamiltonian
matrix with a positive sign.  The overall sign of the hopping is a gauge
choice (absorbed by |C> -> -|C>) with no effect on populations, currents,
or any measured record; this convention makes the element-wise equations
of motion used by the stochastic steppers hold verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.special

from .exceptions import ConfigError, NonUniqueSteadyStateError, StabilityError
from .state import CENTER, EMPTY, LEFT, RIGHT, DensityMatrix

# dt * max(rates, detuning) must stay below this for every integrator.
STABILITY_LIMIT = 0.1

# Eigenvalues of the Liouvillian with |lambda| below this count as null space.
NULLSPACE_TOL = 1e-10

INFINITE_BIAS = "infinite-bias"
FINITE_BIAS = "finite-bias"


@dataclass
class SystemParams:
    """Physical rates and couplings of the monitored dot chain.

    Parameters
    ----------
    omega : float
        Nearest-neighbor hopping; sets the energy/time scale (typically 1).
    delta : float
        Detuning of the central dot relative to the outer dots.
    epsilon : float
        Common onsite energy of the outer dots.  Irrelevant at infinite
        bias; kept for finite-bias rate evaluation.
    gamma_l, gamma_r : float
        Bare lead tunneling rates of the left / right dot.
    gamma_meas : float
        Measurement strength of the charge detector on the central dot.
    dt : float
        Integration step for all fixed-step integrators.
    bias_mode : str
        ``"infinite-bias"`` (default; left lead full, right lead empty) or
        ``"finite-bias"`` with Fermi factors from ``bath``.
    bath : list[tuple[float, float]] | None
        Per-lead ``(mu, kT)`` for finite-bias mode, ordered (left, right).
    """

    omega: float = 1.0
    delta: float = 10.0
    epsilon: float = 0.0
    gamma_l: float = 10.0
    gamma_r: float = 8.0
    gamma_meas: float = 10.0
    dt: float = 1e-4
    bias_mode: str = INFINITE_BIAS
    bath: list = field(default=None)

    def __post_init__(self):
        # omega = 0 is allowed for decoupled-chain diagnostics
        if self.omega < 0:
            raise ConfigError(f"omega must be >= 0, got {self.omega}")
        for name in ("gamma_l", "gamma_r", "gamma_meas"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.bias_mode not in (INFINITE_BIAS, FINITE_BIAS):
            raise ConfigError(f"unknown bias_mode {self.bias_mode!r}")
        if self.bias_mode == FINITE_BIAS:
            if self.bath is None or len(self.bath) != 2:
                raise ConfigError("finite-bias mode needs bath=[(mu_L, kT_L), (mu_R, kT_R)]")
        scale = max(self.gamma_l, self.gamma_r, self.gamma_meas, abs(self.delta))
        if self.dt * scale >= STABILITY_LIMIT:
            raise StabilityError(
                f"dt*max(rates, |delta|) = {self.dt * scale:.3g} exceeds "
                f"{STABILITY_LIMIT}; reduce dt"
            )


@dataclass(frozen=True)
class RateSet:
    """Directed lead tunneling rates (in/out of the left and right dot)."""

    gamma_L_in: float
    gamma_L_out: float
    gamma_R_in: float
    gamma_R_out: float

    def __post_init__(self):
        for name in ("gamma_L_in", "gamma_L_out", "gamma_R_in", "gamma_R_out"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")


def fermi(energy, kt):
    """Fermi occupation [1 + exp(energy/kt)]^-1; kt=0 gives a step function."""
    if kt < 0:
        raise ConfigError(f"temperature must be >= 0, got {kt}")
    if kt == 0:
        return 1.0 if energy < 0 else (0.5 if energy == 0 else 0.0)
    # expit form avoids overflow for large |energy|/kt
    return float(scipy.special.expit(-energy / kt))


def build_rates(params):
    """Directed tunneling rates for the configured bias mode.

    Infinite bias: the left lead only fills and the right lead only
    drains.  Finite bias: Fermi factors are evaluated at the bare
    outer-dot level ``epsilon``.
    """
    if params.bias_mode == INFINITE_BIAS:
        return RateSet(params.gamma_l, 0.0, 0.0, params.gamma_r)
    (mu_l, kt_l), (mu_r, kt_r) = params.bath
    f_l = fermi(params.epsilon - mu_l, kt_l)
    f_r = fermi(params.epsilon - mu_r, kt_r)
    return RateSet(
        params.gamma_l * f_l,
        params.gamma_l * (1.0 - f_l),
        params.gamma_r * f_r,
        params.gamma_r * (1.0 - f_r),
    )


def build_hamiltonian(params):
    """4x4 Hamiltonian of the chain; the empty state carries zero energy."""
    h = np.zeros((4, 4), dtype=np.complex128)
    h[LEFT, LEFT] = params.epsilon
    h[RIGHT, RIGHT] = params.epsilon
    h[CENTER, CENTER] = params.epsilon + params.delta
    h[LEFT, CENTER] = h[CENTER, LEFT] = params.omega
    h[RIGHT, CENTER] = h[CENTER, RIGHT] = params.omega
    return h


def jump_operators(params):
    """All Lindblad jump operators: four lead channels plus dephasing."""
    rates = build_rates(params)
    ops = []
    for rate, (row, col) in (
        (rates.gamma_L_in, (LEFT, EMPTY)),
        (rates.gamma_L_out, (EMPTY, LEFT)),
        (rates.gamma_R_in, (RIGHT, EMPTY)),
        (rates.gamma_R_out, (EMPTY, RIGHT)),
    ):
        if rate > 0:
            op = np.zeros((4, 4), dtype=np.complex128)
            op[row, col] = np.sqrt(rate)
            ops.append(op)
    if params.gamma_meas > 0:
        op = np.zeros((4, 4), dtype=np.complex128)
        op[CENTER, CENTER] = np.sqrt(params.gamma_meas)
        ops.append(op)
    return ops


def dissipator(jump_op, rho):
    """Lindblad dissipator L rho L^dag - (L^dag L rho + rho L^dag L)/2."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    ld = jump_op.conj().T
    ldl = ld @ jump_op
    return jump_op @ m @ ld - 0.5 * (ldl @ m + m @ ldl)


def lindblad_rhs(rho, params):
    """Ensemble-averaged equation of motion d(rho)/dt as a 4x4 matrix."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    h = build_hamiltonian(params)
    out = -1j * (h @ m - m @ h)
    for op in jump_operators(params):
        out += dissipator(op, m)
    return out


def liouvillian_matrix(params):
    """Vectorized generator: 16x16 matrix acting on column-stacked rho."""
    ident = np.eye(4, dtype=np.complex128)
    h = build_hamiltonian(params)
    sup = -1j * (np.kron(ident, h) - np.kron(h.T, ident))
    for op in jump_operators(params):
        ldl = op.conj().T @ op
        sup += np.kron(op.conj(), op) - 0.5 * (np.kron(ident, ldl) + np.kron(ldl.T, ident))
    return sup


def _vec(matrix):
    return np.asarray(matrix, dtype=np.complex128).flatten(order="F")


def _unvec(vec):
    return vec.reshape(4, 4, order="F")


@dataclass
class MasterEvolution:
    """Deterministic state history on a uniform grid of stored times."""

    times: np.ndarray
    matrices: np.ndarray  # (n, 4, 4) complex

    @property
    def rho_cc(self):
        return self.matrices[:, CENTER, CENTER].real

    @property
    def rho_ll(self):
        return self.matrices[:, LEFT, LEFT].real

    @property
    def rho_rr(self):
        return self.matrices[:, RIGHT, RIGHT].real

    @property
    def traces(self):
        return np.einsum("nii->n", self.matrices).real

    def final_state(self):
        return DensityMatrix.from_matrix(self.matrices[-1])


def evolve_master(rho0, params, t_final, store_every=1):
    """Integrate the ensemble-averaged master equation with classical RK4.

    The generator is linear, so one RK4 step is a fixed 16x16 matrix
    polynomial; steps between stored points are folded into a single
    matrix power.  Stored states are trace-exact (every RK4 stage is
    traceless) and positivity is the caller's concern to monitor.

    Returns a :class:`MasterEvolution` sampled every ``store_every`` steps.
    """
    if t_final <= 0:
        raise ConfigError("t_final must be > 0")
    if store_every < 1:
        raise ConfigError("store_every must be >= 1")
    n_steps = int(round(t_final / params.dt))
    if n_steps < 1:
        raise ConfigError("t_final shorter than one step")
    gen = liouvillian_matrix(params) * params.dt
    # one-step RK4 propagator: I + A + A^2/2 + A^3/6 + A^4/24
    prop = np.eye(16, dtype=np.complex128)
    term = np.eye(16, dtype=np.complex128)
    for k in (1, 2, 3, 4):
        term = term @ gen / k
        prop += term
    prop_block = np.linalg.matrix_power(prop, store_every)

    n_bins = n_steps // store_every
    leftover = n_steps - n_bins * store_every
    m0 = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, np.complex128)
    vec = _vec(m0)
    times = np.empty(n_bins + 1 + (1 if leftover else 0))
    mats = np.empty((times.size, 4, 4), dtype=np.complex128)
    times[0] = 0.0
    mats[0] = m0
    for j in range(1, n_bins + 1):
        vec = prop_block @ vec
        times[j] = j * store_every * params.dt
        mats[j] = _unvec(vec)
    if leftover:
        vec = np.linalg.matrix_power(prop, leftover) @ vec
        times[-1] = n_steps * params.dt
        mats[-1] = _unvec(vec)
    return MasterEvolution(times, mats)


def steady_state(params):
    """Stationary state from the null space of the vectorized generator.

    Uniqueness is checked by counting eigenvalues with |lambda| below
    ``NULLSPACE_TOL``; a degenerate null space raises.  The returned
    state is refined by a trace-constrained least-squares solve so the
    residual of the equation of motion is at the rounding floor.
    """
    sup = liouvillian_matrix(params)
    eigvals = np.linalg.eigvals(sup)
    n_null = int(np.sum(np.abs(eigvals) < NULLSPACE_TOL))
    if n_null > 1:
        raise NonUniqueSteadyStateError(
            f"null space dimension {n_null}; stationary state is not unique"
        )
    if n_null == 0:
        raise NonUniqueSteadyStateError(
            "no eigenvalue within tolerance of zero; generator looks defective"
        )
    # minimize ||L x|| subject to trace(x) = 1 via one stacked least squares
    trace_row = _vec(np.eye(4)).conj()
    stacked = np.vstack([sup, trace_row[None, :]])
    target = np.zeros(17, dtype=np.complex128)
    target[-1] = 1.0
    sol, *_ = np.linalg.lstsq(stacked, target, rcond=None)
    rho = _unvec(sol)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= rho.trace().real
    residual = np.linalg.norm(lindblad_rhs(rho, params))
    if residual > NULLSPACE_TOL:
        raise NonUniqueSteadyStateError(
            f"stationary-state residual {residual:.3g} above {NULLSPACE_TOL}"
        )
    return DensityMatrix.from_matrix(rho).validate()


def effective_coupling(params):
    """Virtual-tunneling coupling omega^2/delta between the outer dots."""
    if params.delta == 0:
        raise ConfigError("effective coupling undefined at zero detuning")
    return params.omega**2 / params.delta
