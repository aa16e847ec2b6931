"""Closed-form second-order predictions for two-photon first-order sidebands.

All inputs and outputs are linear frequencies in GHz.  Every formula is
homogeneous of degree one in frequency, so working in GHz instead of rad/ns
changes nothing except that results come out as ``Omega / 2 pi`` directly.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSystemError,
    DivergenceError,
    OutOfDomainError,
    ResonantDriveError,
    StaleMatchingError,
)
from .model import TWO_PI, BiDrive, DriveConfig, MonoDrive, SystemParams

MATCH_TOL = 1e-6  # GHz, i.e. 1 kHz
MATCH_MAX_ITER = 200
STALE_MATCH_TOL = 1e-3  # GHz, i.e. 1 MHz
VALIDITY_FACTOR = 10.0


class ModelVariant(enum.Enum):
    FULL = "full"
    RWA = "rwa"


class SidebandKind(enum.Enum):
    BLUE = "blue"
    RED = "red"


class PerturbativeValidityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Detunings:
    """Qubit-drive and qubit-cavity detunings/sums for one drive configuration (GHz)."""

    delta: tuple[float, ...]
    sigma: tuple[float, ...]
    delta_qc: float
    sigma_qc: float


def detunings(params: SystemParams, drive: DriveConfig, f_q: float | None = None) -> Detunings:
    q = params.f_q if f_q is None else f_q
    delta = tuple(q - t.f_d for t in drive.tones)
    sigma = tuple(q + t.f_d for t in drive.tones)
    for d, t in zip(delta, drive.tones):
        if d == 0.0:
            raise ResonantDriveError(f"drive at {t.f_d} GHz is resonant with the qubit")
    return Detunings(delta, sigma, q - params.f_c, q + params.f_c)


def _inv_sigma(sigma: float, variant: ModelVariant) -> float:
    # RWA sends every qubit-drive sum to infinity
    return 0.0 if variant is ModelVariant.RWA else 1.0 / sigma


def _check_validity(drive: DriveConfig, det: Detunings) -> list[str]:
    notes = []
    for tone, d in zip(drive.tones, det.delta):
        if tone.eps > 0 and abs(d) < VALIDITY_FACTOR * tone.eps:
            msg = (
                f"|f_q - f_d| = {abs(d):.4g} GHz is below {VALIDITY_FACTOR:g} x eps "
                f"({tone.eps:.4g} GHz); second-order results are unreliable"
            )
            warnings.warn(msg, PerturbativeValidityWarning, stacklevel=3)
            notes.append(msg)
    return notes


def dispersive_shift(params: SystemParams) -> float:
    """chi = g^2/Delta_qc + g^2/Sigma_qc in GHz (signed)."""
    d_qc = params.f_q - params.f_c
    if d_qc == 0.0:
        raise DegenerateSystemError("qubit and cavity are degenerate (f_q == f_c)")
    g2 = params.g * params.g
    return g2 / d_qc + g2 / (params.f_q + params.f_c)


def stark_shift(
    params: SystemParams,
    drive: DriveConfig,
    variant: ModelVariant = ModelVariant.FULL,
    f_q: float | None = None,
) -> float:
    """Drive-induced qubit shift delta_omega_q / 2 pi in GHz."""
    det = detunings(params, drive, f_q)
    _check_validity(drive, det)
    return sum(
        2.0 * t.eps**2 / d + 2.0 * t.eps**2 * _inv_sigma(s, variant)
        for t, d, s in zip(drive.tones, det.delta, det.sigma)
    )


def modulation_amplitude(
    params: SystemParams,
    drive: DriveConfig,
    variant: ModelVariant = ModelVariant.FULL,
    f_q: float | None = None,
) -> float:
    """Amplitude eps_m of the derived longitudinal (sigma_z) modulation, GHz.

    Monochromatic drives modulate at 2 f_d, bi-chromatic drives at f_dq +- f_dc.
    """
    q = params.f_q if f_q is None else f_q
    det = detunings(params, drive, q)
    _check_validity(drive, det)
    if isinstance(drive, MonoDrive):
        eps = drive.tone.eps
        (d,), (s,) = det.delta, det.sigma
        inv_s = _inv_sigma(s, variant)
        return 2.0 * eps**2 / d + 2.0 * eps**2 * inv_s - 2.0 * q * eps**2 * inv_s / d
    (d1, d2), (s1, s2) = det.delta, det.sigma
    return (
        drive.tone_q.eps
        * drive.tone_c.eps
        * (1.0 / d1 + 1.0 / d2 + _inv_sigma(s1, variant) + _inv_sigma(s2, variant))
    )


def _matching_target(params, drive, kind, variant, chi, red_sign):
    """Right-hand side of the matching condition (GHz) for the current drive."""
    shift = stark_shift(params, drive, variant)
    if kind is SidebandKind.BLUE:
        return params.f_q + shift + params.f_c + 2.0 * chi
    return red_sign * (params.f_q + shift - params.f_c + 2.0 * chi)


def _update(template, kind, target, branch=1.0):
    """Drive frequency that satisfies the matching condition for a given target."""
    if isinstance(template, MonoDrive):
        return target / 2.0
    f_dc = template.tone_c.f_d
    if kind is SidebandKind.BLUE:
        return target - f_dc
    return f_dc + branch * target


def _bi_red_branch(params: SystemParams, template: DriveConfig, target: float) -> float:
    """Root of |f_dq - f_dc| = target kept during iteration: the one nearer f_q."""
    if not isinstance(template, BiDrive):
        return 1.0
    f_dc = template.tone_c.f_d
    lo, hi = f_dc - target, f_dc + target
    if lo <= 0 or abs(hi - params.f_q) <= abs(lo - params.f_q):
        return 1.0
    return -1.0


def _red_sign(params: SystemParams, chi: float) -> float:
    # branch of |.| fixed by the zero-drive sign, see module notes
    return 1.0 if params.f_q - params.f_c + 2.0 * chi >= 0 else -1.0


def matching_residual(
    params: SystemParams,
    drive: DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant = ModelVariant.FULL,
) -> float:
    """LHS - RHS of the matching condition in GHz, evaluated at the given drive."""
    chi = dispersive_shift(params)
    target = abs(_matching_target(params, drive, kind, variant, chi, 1.0))
    if isinstance(drive, MonoDrive):
        lhs = 2.0 * drive.tone.f_d
    elif kind is SidebandKind.BLUE:
        lhs = drive.tone_q.f_d + drive.tone_c.f_d
    else:
        lhs = abs(drive.tone_q.f_d - drive.tone_c.f_d)
    return lhs - target


def matching_frequency(
    params: SystemParams,
    drive_template: DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant = ModelVariant.FULL,
    tol: float = MATCH_TOL,
    max_iter: int = MATCH_MAX_ITER,
) -> float:
    """Solve the (implicit) matching condition for the swept drive frequency, GHz.

    For a monochromatic template the tone frequency is solved for; for a
    bi-chromatic template the qubit-friendly frequency is solved with the
    cavity-friendly tone held fixed.  The template's own swept frequency is
    ignored.
    """
    chi = dispersive_shift(params)
    red_sign = _red_sign(params, chi)
    zero = params.f_q + params.f_c + 2 * chi if kind is SidebandKind.BLUE else (
        red_sign * (params.f_q - params.f_c + 2 * chi)
    )
    branch = _bi_red_branch(params, drive_template, zero)
    f = _update(drive_template, kind, zero, branch)
    history = [f]
    damping = 1.0
    last_step = math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        for _ in range(max_iter):
            drive = drive_template.with_frequency(f)
            target = _matching_target(params, drive, kind, variant, chi, red_sign)
            proposal = _update(drive_template, kind, target, branch)
            step = proposal - f
            if abs(step) >= abs(last_step) and damping == 1.0:
                damping = 0.5
            f_new = f + damping * step
            if f_new <= 0:
                raise DivergenceError("matching iteration left the positive axis", history)
            history.append(f_new)
            f = f_new
            # run to machine precision so results stay exactly scale-covariant
            if abs(step) <= 1e-13 * abs(f):
                break
            last_step = step
        else:
            if abs(step) > tol:
                raise DivergenceError(
                    f"no convergence after {max_iter} iterations", history
                )
    # re-run the validity check at the solution so callers see the warning
    detunings_at = detunings(params, drive_template.with_frequency(f))
    _check_validity(drive_template.with_frequency(f), detunings_at)
    return f


def bessel_j1(x: float, tol: float = 1e-17) -> float:
    """Bessel function of the first kind, order one, by its power series.

    Restricted to |x| < 10, where the alternating series loses at most a
    few digits to cancellation.
    """
    if not abs(x) < 10.0:
        raise OutOfDomainError(f"bessel_j1 is only implemented for |x| < 10, got {x}")
    half = 0.5 * x
    q = -half * half
    term = half
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + 1))
        total += term
        if k >= 12 and abs(term) <= tol * max(abs(total), 1e-300):
            break
        if term == 0.0:
            break
    return total


@dataclass(frozen=True)
class RateBreakdown:
    """Analytic prediction at the matching point.

    ``omega0`` is the direct two-photon part, ``omega1`` the contribution of
    the derived longitudinal modulation; both signed, in GHz (Omega / 2 pi).
    """

    matching_f: float
    omega0: float
    omega1: float
    total: float
    delta_wq: float
    eps_m: float
    variant: ModelVariant
    kind: SidebandKind
    notes: tuple[str, ...] = field(default=())

    @property
    def abs_total(self) -> float:
        return abs(self.total)

    def as_dict(self) -> dict:
        return {
            "matching_f": self.matching_f,
            "omega0": self.omega0,
            "omega1": self.omega1,
            "total": self.total,
            "abs_total": self.abs_total,
            "delta_wq": self.delta_wq,
            "eps_m": self.eps_m,
            "variant": self.variant.value,
            "kind": self.kind.value,
            "notes": list(self.notes),
        }


def _coefficient(params, drive, kind, variant, det):
    """Bracketed coefficient multiplying g in the reduced sideband Hamiltonian."""
    is_blue = kind is SidebandKind.BLUE
    qubit_above = params.f_q > params.f_c
    if isinstance(drive, MonoDrive):
        e2 = drive.tone.eps**2
        (d,), (s,) = det.delta, det.sigma
        inv_s = _inv_sigma(s, variant)
        cross = 2.0 * e2 * inv_s / d
        if is_blue or qubit_above:
            return e2 / d**2 + cross
        return e2 * inv_s**2 + cross
    e = drive.tone_q.eps * drive.tone_c.eps
    (d1, d2), (s1, s2) = det.delta, det.sigma
    is1, is2 = _inv_sigma(s1, variant), _inv_sigma(s2, variant)
    if is_blue:
        return 2.0 * e / (d1 * d2) + e * is2 / d1 + e * is1 / d2
    if qubit_above:
        return e / (d1 * d2) + e * is1 / d2 + e * is1 * is2
    return e / (d1 * d2) + e * is2 / d1 + e * is1 * is2


def sideband_rate(
    params: SystemParams,
    drive: DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant = ModelVariant.FULL,
    check_matching: bool = True,
) -> RateBreakdown:
    """Sideband rate for a drive that already satisfies the matching condition."""
    if check_matching:
        residual = matching_residual(params, drive, kind, variant)
        if abs(residual) > STALE_MATCH_TOL:
            raise StaleMatchingError(
                f"drive is {residual * 1e3:.3f} MHz away from the {kind.value} "
                f"matching condition ({variant.value} model)"
            )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PerturbativeValidityWarning)
        shift = stark_shift(params, drive, variant)
    notes = tuple(dict.fromkeys(str(w.message) for w in caught))
    for msg in notes:
        warnings.warn(msg, PerturbativeValidityWarning, stacklevel=2)
    # single refinement pass: qubit frequency replaced by its Stark-shifted value
    q = params.f_q + shift
    det = detunings(params, drive, q)
    omega0 = 2.0 * params.g * _coefficient(params, drive, kind, variant, det)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        eps_m = modulation_amplitude(params, drive, variant, q)
    omega1 = 2.0 * params.g * bessel_j1(2.0 * eps_m / (params.f_q - params.f_c))
    return RateBreakdown(
        matching_f=drive.swept_frequency,
        omega0=omega0,
        omega1=omega1,
        total=omega0 + omega1,
        delta_wq=shift,
        eps_m=eps_m,
        variant=variant,
        kind=kind,
        notes=notes,
    )


def predict(
    params: SystemParams,
    drive_template: DriveConfig,
    kind: SidebandKind,
    variant: ModelVariant = ModelVariant.FULL,
) -> RateBreakdown:
    """Matching frequency followed by the rate at that frequency."""
    f = matching_frequency(params, drive_template, kind, variant)
    return sideband_rate(params, drive_template.with_frequency(f), kind, variant)


def drive_beta(drive: DriveConfig, params: SystemParams, t, variant=ModelVariant.FULL):
    """Frame-transformation parameter beta(t) and its time derivative (dimensionless, rad/ns).

    Each tone contributes eps/Delta e^{+i w t} + eps/Sigma e^{-i w t}.
    """
    t = np.asarray(t, dtype=float)
    w_q = params.w_q
    beta = np.zeros(t.shape, dtype=complex)
    dbeta = np.zeros(t.shape, dtype=complex)
    for tone in drive.tones:
        w = TWO_PI * tone.f_d
        eps = TWO_PI * tone.eps
        co = eps / (w_q - w) * np.exp(1j * w * t)
        beta += co
        dbeta += 1j * w * co
        if variant is ModelVariant.FULL:
            counter = eps / (w_q + w) * np.exp(-1j * w * t)
            beta += counter
            dbeta += -1j * w * counter
    return beta, dbeta


def verify_drive_elimination(
    params: SystemParams,
    drive: DriveConfig,
    t_samples,
    variant: ModelVariant = ModelVariant.FULL,
) -> float:
    """Largest operator norm of H_drive + H_1 over the sample times, in GHz.

    H_1 = -w_q (beta* s+ + beta s-) - i (beta' s- - beta'* s+) is the first-order
    term produced by the frame change.  With the full beta it cancels the
    transverse drive identically.
    """
    t = np.asarray(t_samples, dtype=float)
    beta, dbeta = drive_beta(drive, params, t, variant)
    drive_amp = sum(
        TWO_PI * 2.0 * tone.eps * np.cos(TWO_PI * tone.f_d * t) for tone in drive.tones
    )
    # coefficient of sigma_-; the sigma_+ coefficient is its conjugate
    lower = drive_amp - params.w_q * beta - 1j * dbeta
    upper = drive_amp - params.w_q * np.conj(beta) + 1j * np.conj(dbeta)
    residual = 0.0
    for lo, up in zip(np.atleast_1d(lower), np.atleast_1d(upper)):
        # qubit block in (g, e) ordering: s- = |g><e| sits above the diagonal
        mat = np.array([[0.0, lo], [up, 0.0]])
        residual = max(residual, float(np.linalg.norm(mat, 2)))
    return residual / TWO_PI
