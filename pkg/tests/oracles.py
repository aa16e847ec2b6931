"""Reference implementations used to derive the frozen values in the tests.

They share no code with the package.  The analytic oracle evaluates the
closed-form expressions in 40-digit arithmetic and solves the matching
condition with a secant root finder instead of fixed-point iteration.  The
Floquet oracle gets sideband rates from quasienergy gaps of the one-period
propagator, built with a fourth-order Magnus expansion and matrix
exponentials, so no time stepping of the state is involved.
"""
from __future__ import annotations

import mpmath as mp
import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

mp.mp.dps = 40


# ---------------------------------------------------------------------------
# analytic oracle (linear frequencies, GHz)
# ---------------------------------------------------------------------------

def chi(fq, fc, g):
    fq, fc, g = mp.mpf(fq), mp.mpf(fc), mp.mpf(g)
    return g**2 / (fq - fc) + g**2 / (fq + fc)


def _isig(s, rwa):
    return 0 if rwa else 1 / s


def stark(fq, tones, rwa=False):
    fq = mp.mpf(fq)
    return sum(
        2 * mp.mpf(e) ** 2 / (fq - f) + 2 * mp.mpf(e) ** 2 * _isig(fq + f, rwa) for e, f in tones
    )


def eps_m(fq, tones, rwa=False):
    fq = mp.mpf(fq)
    if len(tones) == 1:
        (e, f), = tones
        d, s = fq - f, fq + f
        return 2 * e**2 / d + 2 * e**2 * _isig(s, rwa) - 2 * fq * e**2 * _isig(s, rwa) / d
    (e1, f1), (e2, f2) = tones
    return mp.mpf(e1) * e2 * (
        1 / (fq - f1) + 1 / (fq - f2) + _isig(fq + f1, rwa) + _isig(fq + f2, rwa)
    )


def _tones(eps, f, bi):
    if bi is None:
        return [(mp.mpf(eps), f)]
    eq, ec, fdc = bi
    return [(mp.mpf(eq), f), (mp.mpf(ec), mp.mpf(fdc))]


def matching(fq, fc, g, eps, kind, rwa=False, bi=None):
    """Swept frequency solving the matching condition.  ``bi = (eps_q, eps_c, f_dc)``."""
    fq, fc = mp.mpf(fq), mp.mpf(fc)
    x = chi(fq, fc, g)
    red_sign = 1 if fq - fc + 2 * x >= 0 else -1

    def target(f):
        d = stark(fq, _tones(eps, f, bi), rwa)
        if kind == "blue":
            return fq + d + fc + 2 * x
        return red_sign * (fq + d - fc + 2 * x)

    zero = fq + fc + 2 * x if kind == "blue" else red_sign * (fq - fc + 2 * x)
    if bi is None:
        lhs = lambda f: 2 * f  # noqa: E731
        seed = zero / 2
    else:
        fdc = mp.mpf(bi[2])
        if kind == "blue":
            lhs = lambda f: f + fdc  # noqa: E731
            seed = zero - fdc
        else:
            lo, hi = fdc - zero, fdc + zero
            branch = 1 if (lo <= 0 or abs(hi - fq) <= abs(lo - fq)) else -1
            lhs = lambda f: branch * (f - fdc)  # noqa: E731
            seed = fdc + branch * zero
    return mp.findroot(lambda f: lhs(f) - target(f), (seed, seed * (1 + mp.mpf("1e-3"))), solver="secant")


def rate(fq, fc, g, eps, kind, rwa=False, bi=None, f=None):
    """(matching, omega0, omega1, total, stark, eps_m) at the matching point, GHz."""
    fq, fc, g = mp.mpf(fq), mp.mpf(fc), mp.mpf(g)
    if f is None:
        f = matching(fq, fc, g, eps, kind, rwa, bi)
    tones = _tones(eps, f, bi)
    dw = stark(fq, tones, rwa)
    q = fq + dw
    blue = kind == "blue"
    above = fq > fc
    if bi is None:
        e2 = mp.mpf(eps) ** 2
        d, s = q - f, q + f
        iS = _isig(s, rwa)
        if blue or above:
            c = e2 / d**2 + 2 * e2 * iS / d
        else:
            c = e2 * iS**2 + 2 * e2 * iS / d
    else:
        (e1, f1), (e2_, f2) = tones
        e = e1 * e2_
        d1, d2 = q - f1, q - f2
        i1, i2 = _isig(q + f1, rwa), _isig(q + f2, rwa)
        if blue:
            c = 2 * e / (d1 * d2) + e * i2 / d1 + e * i1 / d2
        elif above:
            c = e / (d1 * d2) + e * i1 / d2 + e * i1 * i2
        else:
            c = e / (d1 * d2) + e * i2 / d1 + e * i1 * i2
    o0 = 2 * g * c
    em = eps_m(q, tones, rwa)
    # J1 argument uses the bare qubit-cavity detuning
    o1 = 2 * g * mp.besselj(1, 2 * em / (fq - fc))
    return tuple(float(v) for v in (f, o0, o1, o0 + o1, dw, em))


# ---------------------------------------------------------------------------
# Floquet oracle
# ---------------------------------------------------------------------------

TWO_PI = 2 * np.pi


def _bare_ops(n_fock):
    a = np.diag(np.sqrt(np.arange(1, n_fock)), 1)
    i2, ic = np.eye(2), np.eye(n_fock)
    sz = np.kron(np.diag([-1.0, 1.0]), ic)
    sx = np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), ic)
    num = np.kron(i2, a.T @ a)
    x = np.kron(i2, a + a.T)
    return sz, sx, num, x


def h_qrm(fq, fc, g, n_fock):
    sz, sx, num, x = _bare_ops(n_fock)
    return TWO_PI * (0.5 * fq * sz + fc * num + g * x @ sx)


def dressed_index(fq, fc, g, n_fock, label):
    """Eigenvector of H_QRM with the largest overlap on a bare (qubit, n) state."""
    w, v = np.linalg.eigh(h_qrm(fq, fc, g, n_fock))
    q, n = label
    bare = (0 if q == "g" else 1) * n_fock + n
    return v, int(np.argmax(np.abs(v[bare]) ** 2))


def period_propagator(fq, fc, g, tones, period, n_fock=6, slices=1500):
    """U(T) for H_QRM + sum 2 eps cos(2 pi f t) sigma_x over one common period."""
    h0 = h_qrm(fq, fc, g, n_fock)
    sx = _bare_ops(n_fock)[1]
    h = period / slices
    c = np.sqrt(3) / 6
    u = np.eye(2 * n_fock, dtype=complex)

    def gen(t):
        amp = sum(2 * e * np.cos(TWO_PI * f * t) for e, f in tones)
        return -1j * (h0 + TWO_PI * amp * sx)

    for k in range(slices):
        a1 = gen((k + 0.5 - c) * h)
        a2 = gen((k + 0.5 + c) * h)
        omega = 0.5 * h * (a1 + a2) + np.sqrt(3) * h * h / 12 * (a2 @ a1 - a1 @ a2)
        u = expm(omega) @ u
    return u


def quasienergy_gap(fq, fc, g, eps, f_d, pair, n_fock=6):
    """Quasienergy splitting (GHz) of the Floquet states tied to two dressed labels."""
    period = 1.0 / f_d
    u = period_propagator(fq, fc, g, [(eps, f_d)], period, n_fock)
    w, vecs = np.linalg.eig(u)
    v, _ = dressed_index(fq, fc, g, n_fock, pair[0])
    ov = np.abs(v.T @ vecs) ** 2
    idx = [int(np.argmax(ov[dressed_index(fq, fc, g, n_fock, lab)[1]])) for lab in pair]
    q = np.angle(w[idx]) / period
    d = (q[0] - q[1] + np.pi / period) % (2 * np.pi / period) - np.pi / period
    return abs(d) / TWO_PI


def floquet_resonance(fq, fc, g, eps, pair, lo, hi, n_fock=6):
    """(resonant drive frequency, sideband rate) from the minimum quasienergy gap."""
    res = minimize_scalar(
        lambda f: quasienergy_gap(fq, fc, g, eps, f, pair, n_fock),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-7},
    )
    return float(res.x), float(res.fun)
