"""Density matrix over the four-state transport basis {empty, L, C, R}.

Hermiticity is exact by construction: only four real populations and six
complex coherences are stored, and the full 4x4 matrix is assembled with
conjugate mirror entries on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, PositivityError

# Basis indices, fixed ordering (empty, left, center, right).
EMPTY, LEFT, CENTER, RIGHT = 0, 1, 2, 3
BASIS_LABELS = ("0", "L", "C", "R")

# Stored coherence slots as (row, col) index pairs; the mirrored entries
# are conjugates.  Slot order matches the element-wise steppers.
COH_PAIRS = (
    (LEFT, CENTER),   # rho_LC
    (RIGHT, CENTER),  # rho_RC
    (LEFT, RIGHT),    # rho_LR
    (EMPTY, LEFT),    # rho_0L
    (EMPTY, CENTER),  # rho_0C
    (EMPTY, RIGHT),   # rho_0R
)
LC, RC, LR, ZL, ZC, ZR = range(6)

TRACE_TOL = 1e-9
EIG_FLOOR = -1e-6


@dataclass
class DensityMatrix:
    """State of the dot chain: populations ``pop`` (basis order 0, L, C, R)
    and coherences ``coh`` (slot order of :data:`COH_PAIRS`)."""

    pop: np.ndarray
    coh: np.ndarray

    def __post_init__(self):
        self.pop = np.asarray(self.pop, dtype=np.float64).copy()
        self.coh = np.asarray(self.coh, dtype=np.complex128).copy()
        if self.pop.shape != (4,) or self.coh.shape != (6,):
            raise ConfigError("DensityMatrix needs 4 populations and 6 coherences")

    # -- constructors ------------------------------------------------------

    @classmethod
    def basis_state(cls, label):
        """Pure state |label><label| for label in {'0', 'L', 'C', 'R'}."""
        if label not in BASIS_LABELS:
            raise ConfigError(f"unknown basis label {label!r}")
        pop = np.zeros(4)
        pop[BASIS_LABELS.index(label)] = 1.0
        return cls(pop, np.zeros(6, dtype=np.complex128))

    @classmethod
    def from_matrix(cls, matrix, tol=TRACE_TOL):
        """Build from a full 4x4 matrix; rejects non-Hermitian or trace != 1."""
        m = np.asarray(matrix, dtype=np.complex128)
        if m.shape != (4, 4):
            raise ConfigError("expected a 4x4 matrix")
        if np.abs(m - m.conj().T).max() > 1e-8:
            raise ConfigError("matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if abs(m.trace().real - 1.0) > tol:
            raise ConfigError(f"trace {m.trace().real} deviates from 1 beyond {tol}")
        pop = m.diagonal().real.copy()
        coh = np.array([m[i, j] for i, j in COH_PAIRS], dtype=np.complex128)
        return cls(pop, coh)

    # -- element accessors -------------------------------------------------

    @property
    def rho_00(self):
        return self.pop[EMPTY]

    @property
    def rho_ll(self):
        return self.pop[LEFT]

    @property
    def rho_cc(self):
        return self.pop[CENTER]

    @property
    def rho_rr(self):
        return self.pop[RIGHT]

    @property
    def rho_lc(self):
        return self.coh[LC]

    @property
    def rho_rc(self):
        return self.coh[RC]

    @property
    def rho_lr(self):
        return self.coh[LR]

    @property
    def matrix(self):
        """Full 4x4 complex matrix (Hermitian by construction)."""
        m = np.diag(self.pop.astype(np.complex128))
        for slot, (i, j) in enumerate(COH_PAIRS):
            m[i, j] = self.coh[slot]
            m[j, i] = np.conj(self.coh[slot])
        return m

    # -- diagnostics -------------------------------------------------------

    def trace(self):
        return float(self.pop.sum())

    def purity(self):
        m = self.matrix
        return float(np.trace(m @ m).real)

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.matrix).min())

    def validate(self, trace_tol=TRACE_TOL, eig_floor=EIG_FLOOR):
        """Raise if trace, population range, or positivity are violated."""
        if abs(self.trace() - 1.0) > trace_tol:
            raise PositivityError(f"trace {self.trace()} deviates from 1")
        if self.pop.min() < -trace_tol or self.pop.max() > 1.0 + trace_tol:
            raise PositivityError(f"population out of [0, 1]: {self.pop}")
        lam = self.min_eigenvalue()
        if lam < eig_floor:
            raise PositivityError(f"eigenvalue {lam} below floor {eig_floor}")
        return self

    def normalized(self):
        tr = self.trace()
        if tr <= 0:
            raise PositivityError("non-positive trace, cannot normalize")
        return DensityMatrix(self.pop / tr, self.coh / tr)

    def copy(self):
        return DensityMatrix(self.pop, self.coh)
