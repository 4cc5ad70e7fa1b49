"""Compiled element-wise step kernels for the stochastic integrators.

State is carried as scalars: populations p00, pll, pcc, prr and
coherences clc (rho_LC), crc (rho_RC), clr (rho_LR), c0l, c0c, c0r
(coherences with the empty state).  The single-step helpers here are the
one source of truth for the equations of motion; the Python-level step
operations and the trajectory runners both call them, so a chain of
single steps reproduces a kernel run bit for bit.

Rate arguments: glp/glm = left lead in/out, grp/grm = right lead in/out,
gam = measurement strength.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def diffusive_step(pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r,
                   omega, delta, eps, glp, glm, grp, grm, gam, dt, dw):
    """One Euler-Maruyama step of the diffusive stochastic master equation.

    The empty-state population enters through the trace closure
    p00 = 1 - pll - pcc - prr.  Returns the nine advanced elements
    (populations are not yet clamped; see clamp_populations)."""
    p00 = 1.0 - pll - pcc - prr
    im_lc = clc.imag
    im_rc = crc.imag
    # deterministic drift
    d_pll = -2.0 * omega * im_lc + glp * p00 - glm * pll
    d_prr = -2.0 * omega * im_rc + grp * p00 - grm * prr
    d_pcc = 2.0 * omega * (im_lc + im_rc)
    d_clc = (-1j * (omega * pcc - delta * clc - omega * pll - omega * clr)
             - 0.5 * (glm + gam) * clc)
    d_crc = (-1j * (omega * pcc - delta * crc - omega * prr - omega * np.conj(clr))
             - 0.5 * (grm + gam) * crc)
    d_clr = -1j * omega * (np.conj(crc) - clc) - 0.5 * (glm + grm) * clr
    d_c0l = 1j * (eps * c0l + omega * c0c) - 0.5 * (glp + grp + glm) * c0l
    d_c0c = (1j * (omega * c0l + (eps + delta) * c0c + omega * c0r)
             - 0.5 * (glp + grp + gam) * c0c)
    d_c0r = 1j * (omega * c0c + eps * c0r) - 0.5 * (glp + grp + grm) * c0r
    # measurement back-action (Ito innovation), proportional to dW
    s = 2.0 * np.sqrt(gam) * dw
    pll1 = pll + d_pll * dt - s * pcc * pll
    prr1 = prr + d_prr * dt - s * pcc * prr
    pcc1 = pcc + d_pcc * dt + s * pcc * (1.0 - pcc)
    clc1 = clc + d_clc * dt - s * clc * (pcc - 0.5)
    crc1 = crc + d_crc * dt - s * crc * (pcc - 0.5)
    clr1 = clr + d_clr * dt - s * pcc * clr
    c0l1 = c0l + d_c0l * dt - s * pcc * c0l
    c0c1 = c0c + d_c0c * dt - s * c0c * (pcc - 0.5)
    c0r1 = c0r + d_c0r * dt - s * pcc * c0r
    return pll1, pcc1, prr1, clc1, crc1, clr1, c0l1, c0c1, c0r1


@njit(cache=True, inline="always")
def clamp_populations(pll, pcc, prr):
    """Clamp populations to [0, 1] and close the trace on the empty state.

    Returns (pll, pcc, prr, p00, clamp) where clamp is the total
    magnitude moved; anything above ~1e-3 marks the step as unreliable.
    """
    clamp = 0.0
    if pll < 0.0:
        clamp -= pll
        pll = 0.0
    elif pll > 1.0:
        clamp += pll - 1.0
        pll = 1.0
    if pcc < 0.0:
        clamp -= pcc
        pcc = 0.0
    elif pcc > 1.0:
        clamp += pcc - 1.0
        pcc = 1.0
    if prr < 0.0:
        clamp -= prr
        prr = 0.0
    elif prr > 1.0:
        clamp += prr - 1.0
        prr = 1.0
    p00 = 1.0 - pll - pcc - prr
    if p00 < 0.0:
        clamp -= p00
        scale = 1.0 / (pll + pcc + prr)
        pll *= scale
        pcc *= scale
        prr *= scale
        p00 = 0.0
    return pll, pcc, prr, p00, clamp


@njit(cache=True, inline="always")
def no_jump_step(p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r,
                 omega, delta, eps, glp, glm, grp, grm, gam, dt):
    """One Euler step of the normalized no-detection evolution.

    All four populations are advanced explicitly; the nonlinear
    gam*pcc*rho term balances the detector decay so the trace is
    conserved to rounding without renormalization."""
    im_lc = clc.imag
    im_rc = crc.imag
    d_pll = -2.0 * omega * im_lc + glp * p00 - glm * pll - gam * pcc * pll
    d_prr = -2.0 * omega * im_rc + grp * p00 - grm * prr - gam * pcc * prr
    d_pcc = 2.0 * omega * (im_lc + im_rc) + gam * pcc * (1.0 - pcc)
    d_p00 = glm * pll + grm * prr - (glp + grp) * p00 - gam * pcc * p00
    d_clc = (-1j * (omega * pcc - delta * clc - omega * pll - omega * clr)
             - 0.5 * glm * clc - gam * (pcc - 0.5) * clc)
    d_crc = (-1j * (omega * pcc - delta * crc - omega * prr - omega * np.conj(clr))
             - 0.5 * grm * crc - gam * (pcc - 0.5) * crc)
    d_clr = (-1j * omega * (np.conj(crc) - clc)
             - 0.5 * (glm + grm) * clr - gam * pcc * clr)
    d_c0l = (1j * (eps * c0l + omega * c0c)
             - 0.5 * (glp + grp + glm) * c0l - gam * pcc * c0l)
    d_c0c = (1j * (omega * c0l + (eps + delta) * c0c + omega * c0r)
             - 0.5 * (glp + grp) * c0c - gam * (pcc - 0.5) * c0c)
    d_c0r = (1j * (omega * c0c + eps * c0r)
             - 0.5 * (glp + grp + grm) * c0r - gam * pcc * c0r)
    return (p00 + d_p00 * dt, pll + d_pll * dt, pcc + d_pcc * dt,
            prr + d_prr * dt, clc + d_clc * dt, crc + d_crc * dt,
            clr + d_clr * dt, c0l + d_c0l * dt, c0c + d_c0c * dt,
            c0r + d_c0r * dt)


@njit(cache=True, inline="always")
def project_center_empty(p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r):
    """Detection update: remove the central-dot component and renormalize."""
    scale = 1.0 / (1.0 - pcc)
    return (p00 * scale, pll * scale, 0.0, prr * scale,
            0.0j, 0.0j, clr * scale, c0l * scale, 0.0j, c0r * scale)


@njit(cache=True)
def run_diffusive(pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r,
                  omega, delta, eps, glp, glm, grp, grm, gam, dt,
                  dws, decimate,
                  out_pll, out_pcc, out_prr, out_z, out_dw):
    """Chain of diffusive steps with decimated recording.

    out_z holds the within-bin mean of the per-step detector record
    (the record is read from the pre-step state); out_dw holds the
    summed Wiener increment per bin.  Returns (bad_step, max_clamp,
    final state): bad_step is -1 on success, else the index of the
    first non-finite step.
    """
    sq_gam = np.sqrt(gam)
    record_gain = 1.0 / (sq_gam * dt) if gam > 0.0 else 0.0
    max_clamp = 0.0
    z_acc = 0.0
    dw_acc = 0.0
    idx = 0
    for i in range(dws.shape[0]):
        dw = dws[i]
        z_acc += pcc + dw * record_gain
        dw_acc += dw
        pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r = diffusive_step(
            pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r,
            omega, delta, eps, glp, glm, grp, grm, gam, dt, dw)
        if not (np.isfinite(pll) and np.isfinite(pcc) and np.isfinite(prr)
                and np.isfinite(clc.real) and np.isfinite(clc.imag)):
            return i, max_clamp, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r
        pll, pcc, prr, p00, clamp = clamp_populations(pll, pcc, prr)
        if clamp > max_clamp:
            max_clamp = clamp
        if (i + 1) % decimate == 0:
            out_pll[idx] = pll
            out_pcc[idx] = pcc
            out_prr[idx] = prr
            out_z[idx] = z_acc / decimate
            out_dw[idx] = dw_acc
            z_acc = 0.0
            dw_acc = 0.0
            idx += 1
    return -1, max_clamp, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r


@njit(cache=True)
def run_jump(p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r,
             omega, delta, eps, glp, glm, grp, grm, gam, dt,
             uniforms, decimate,
             out_pll, out_pcc, out_prr, out_n, jump_times):
    """Chain of detection-conditioned steps with decimated recording.

    Each step draws dN in {0, 1} with P(1) = gam*(1 - pcc)*dt from the
    pre-step state; a detection projects the center empty, otherwise one
    no-detection Euler step is taken.  Detection times land at the end
    of their step.  Returns (bad_step, n_jumps)."""
    n_jumps = 0
    n_count = 0
    idx = 0
    for i in range(uniforms.shape[0]):
        if uniforms[i] < gam * (1.0 - pcc) * dt:
            p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r = \
                project_center_empty(p00, pll, pcc, prr, clc, crc, clr,
                                     c0l, c0c, c0r)
            jump_times[n_jumps] = (i + 1) * dt
            n_jumps += 1
            n_count += 1
        else:
            p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r = no_jump_step(
                p00, pll, pcc, prr, clc, crc, clr, c0l, c0c, c0r,
                omega, delta, eps, glp, glm, grp, grm, gam, dt)
        if not (np.isfinite(pll) and np.isfinite(pcc) and np.isfinite(prr)
                and np.isfinite(p00)):
            return i, n_jumps
        if (i + 1) % decimate == 0:
            out_pll[idx] = pll
            out_pcc[idx] = pcc
            out_prr[idx] = prr
            out_n[idx] = n_count
            idx += 1
    return -1, n_jumps
