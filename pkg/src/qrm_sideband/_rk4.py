"""Compiled RK4 stepping in the interaction picture of H_QRM.

The state is expanded in the eigenbasis of H_QRM with the free phases
exp(-i E_j t) removed, so only the drive term ``coef(t) * sigma_x`` drives
the amplitudes::

    dc_j/dt = -i coef(t) sum_k X_jk exp(i (E_j - E_k) t) c_k

``coef`` is sampled on the half-step grid ``t0 + k * dt / 2``.
"""
import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def _rhs(c, p, xe, coef_val, y, out):
    d = c.shape[0]
    for j in range(d):
        y[j] = c[j] * np.conj(p[j])
    for j in range(d):
        acc = 0.0 + 0.0j
        for k in range(d):
            acc += xe[j, k] * y[k]
        out[j] = -1j * coef_val * p[j] * acc


@njit(cache=True, fastmath=True)
def rk4_evolve(c0, energies, xe, coef, t0, dt, nsteps, stride, record):
    """Advance ``c0`` by ``nsteps`` steps of size ``dt``.

    Returns the final state and, when ``record`` is true, the state after
    every ``stride`` steps (row 0 is the initial state).
    """
    d = c0.shape[0]
    c = c0.copy()
    k1 = np.empty(d, dtype=np.complex128)
    k2 = np.empty(d, dtype=np.complex128)
    k3 = np.empty(d, dtype=np.complex128)
    k4 = np.empty(d, dtype=np.complex128)
    tmp = np.empty(d, dtype=np.complex128)
    y = np.empty(d, dtype=np.complex128)
    p_a = np.empty(d, dtype=np.complex128)
    p_b = np.empty(d, dtype=np.complex128)
    p_c = np.empty(d, dtype=np.complex128)
    w_half = np.empty(d, dtype=np.complex128)
    for j in range(d):
        w_half[j] = np.exp(1j * energies[j] * 0.5 * dt)
    nrec = nsteps // stride + 1 if record else 1
    traj = np.empty((nrec, d), dtype=np.complex128)
    traj[0] = c
    r = 1
    half = 0.5 * dt
    fresh = False
    for n in range(nsteps):
        t = t0 + n * dt
        c_a = coef[2 * n]
        c_b = coef[2 * n + 1]
        c_c = coef[2 * n + 2]
        if c_a == 0.0 and c_b == 0.0 and c_c == 0.0:
            fresh = False
        else:
            # phases advance by recurrence; resynchronised from exp() periodically
            if n % 256 == 0 or not fresh:
                for j in range(d):
                    p_a[j] = np.exp(1j * energies[j] * t)
            for j in range(d):
                p_b[j] = p_a[j] * w_half[j]
                p_c[j] = p_b[j] * w_half[j]
            _rhs(c, p_a, xe, c_a, y, k1)
            for j in range(d):
                tmp[j] = c[j] + half * k1[j]
            _rhs(tmp, p_b, xe, c_b, y, k2)
            for j in range(d):
                tmp[j] = c[j] + half * k2[j]
            _rhs(tmp, p_b, xe, c_b, y, k3)
            for j in range(d):
                tmp[j] = c[j] + dt * k3[j]
            _rhs(tmp, p_c, xe, c_c, y, k4)
            for j in range(d):
                c[j] = c[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                p_a[j] = p_c[j]
            fresh = True
        if record and (n + 1) % stride == 0:
            traj[r] = c
            r += 1
    return c, traj
