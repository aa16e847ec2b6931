"""Numerical matching search, rate extraction and analytic-vs-numeric tables."""
from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import analytic
from .analytic import ModelVariant, SidebandKind
from .errors import (
    ConfigError,
    NoOscillationError,
    NoTransitionFoundError,
    PoorFitError,
    SidebandError,
    WindowTooNarrowError,
)
from .evolve import TimeTrace, endpoint_observable
from .model import DEFAULT_N_FOCK, BiDrive, DriveConfig, DriveTone, MonoDrive, SystemParams

MIN_AMPLITUDE = 0.05
MIN_CONTRAST = 0.05
MAX_RESIDUAL_RATIO = 0.15
POINTS_PER_PERIOD = 8
TRACE_PERIODS = 2.5
FIT_POINTS_PER_PERIOD = 12

CSV_COLUMNS = (
    "scan_var",
    "numeric_matching_GHz",
    "numeric_rate_MHz",
    "full_total_MHz",
    "full_omega0_MHz",
    "rwa_total_MHz",
    "rwa_omega0_MHz",
    "full_matching_GHz",
    "rwa_matching_GHz",
    "status",
)


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of A cos(2 pi f t + phase) + offset; ``omega_sb`` is f in GHz."""

    omega_sb: float
    amplitude: float
    offset: float
    phase: float
    rms: float


def _spectral_seed(t, y):
    """Frequency of the largest non-DC peak of a zero-padded periodogram."""
    t = np.asarray(t, dtype=float)
    step = np.median(np.diff(t))
    grid = np.arange(t[0], t[-1] + 0.5 * step, step)
    yi = np.interp(grid, t, y)
    yi = (yi - yi.mean()) * np.hanning(len(yi))
    n_pad = 16 * len(yi)
    spec = np.abs(np.fft.rfft(yi, n_pad))
    freqs = np.fft.rfftfreq(n_pad, step)
    spec[0] = 0.0
    return float(freqs[int(np.argmax(spec))])


def extract_rate(trace: TimeTrace) -> FitResult:
    """Sideband rate from the endpoint-oscillation frequency of a trace."""
    t = np.asarray(trace.flat_lens, dtype=float)
    y = np.asarray(trace.values, dtype=float)
    half_range = 0.5 * (y.max() - y.min())
    if half_range < MIN_AMPLITUDE:
        raise NoOscillationError(
            f"trace amplitude {half_range:.3g} is below {MIN_AMPLITUDE}"
        )
    f0 = _spectral_seed(t, y)
    if f0 <= 0:
        raise NoOscillationError("no spectral peak above DC")
    # linear least squares for amplitude/phase/offset at the seed frequency
    basis = np.column_stack([np.cos(2 * np.pi * f0 * t), np.sin(2 * np.pi * f0 * t), np.ones_like(t)])
    (a, b, c), *_ = np.linalg.lstsq(basis, y, rcond=None)
    x0 = [math.hypot(a, b), f0, math.atan2(-b, a), c]

    def resid(p):
        amp, f, ph, off = p
        return amp * np.cos(2 * np.pi * f * t + ph) + off - y

    sol = least_squares(resid, x0, method="lm", x_scale=[1.0, f0, 1.0, 1.0])
    amp, f, ph, off = sol.x
    if amp < 0:
        amp, ph = -amp, ph + np.pi
    f = abs(f)
    ph = math.remainder(ph, 2 * np.pi)
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    if not f > 0 or rms >= MAX_RESIDUAL_RATIO * amp:
        raise PoorFitError(
            "sinusoid fit rejected",
            {"frequency": f, "amplitude": amp, "rms": rms, "seed": f0},
        )
    return FitResult(omega_sb=float(f), amplitude=float(amp), offset=float(off), phase=float(ph), rms=rms)


@dataclass(frozen=True)
class SweepResult:
    """Chevron scan: ``chevron[i, j]`` is the observable at ``freqs[i]`` and ``flat_lens[j]``."""

    freqs: np.ndarray
    flat_lens: np.ndarray
    contrast: np.ndarray
    chevron: np.ndarray
    best_f: float
    refined: bool
    kind: SidebandKind

    def trace_at(self, i: int) -> TimeTrace:
        return TimeTrace(self.flat_lens, self.chevron[i], self.kind)


def rate_seed(params: SystemParams, drive_template: DriveConfig, kind: SidebandKind) -> float:
    """Expected sideband rate (GHz) used to size pulse-length grids.

    The largest Full-model component is used so that a cancellation between
    the two contributions does not produce an absurdly long grid.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeValidityWarning)
        full = analytic.predict(params, drive_template, kind, ModelVariant.FULL)
    seed = max(abs(full.total), abs(full.omega0), abs(full.omega1))
    if seed == 0.0:
        raise NoTransitionFoundError("analytic rate is zero; nothing to sweep for")
    return seed


def pulse_grid(rate: float, periods: float = TRACE_PERIODS, per_period: int = POINTS_PER_PERIOD):
    """Flat pulse lengths (ns) covering ``periods`` oscillations at ``rate`` GHz."""
    n = int(math.ceil(periods * per_period)) + 1
    return np.linspace(0.0, periods / rate, n)


def _trace_row(args):
    params, drive, kind, flat_lens, n_fock, dt, edge_len = args
    return endpoint_observable(params, drive, kind, flat_lens, n_fock, dt, edge_len).values


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def resonance_width(params: SystemParams, drive_template: DriveConfig, kind: SidebandKind) -> float:
    """Expected full width (GHz, in swept-frequency units) of the contrast peak.

    A monochromatic detuning counts twice in the two-photon condition, so the
    width is one rate for mono drives and two rates for bi-chromatic drives.
    """
    seed = rate_seed(params, drive_template, kind)
    return seed if isinstance(drive_template, MonoDrive) else 2.0 * seed


def default_window(params: SystemParams, drive_template: DriveConfig, kind: SidebandKind) -> float:
    """Half-width (GHz) of the frequency window around the analytic matching point.

    Covers half the analytic drive-induced shift of the matching point (the
    scale of the analytic error) and at least two resonance widths.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeValidityWarning)
        f_full = analytic.matching_frequency(params, drive_template, kind, ModelVariant.FULL)
        zero = drive_template.with_frequency(f_full)
        f_zero = analytic.matching_frequency(params, _without_drive(zero), kind, ModelVariant.FULL)
    shift = abs(f_full - f_zero)
    return max(2.0 * resonance_width(params, drive_template, kind), 0.5 * shift)


def _without_drive(drive: DriveConfig) -> DriveConfig:
    if isinstance(drive, MonoDrive):
        return MonoDrive(DriveTone(0.0, drive.tone.f_d))
    return BiDrive(DriveTone(0.0, drive.tone_q.f_d), DriveTone(0.0, drive.tone_c.f_d))


def _parabolic_peak(x, y, i):
    x0, x1, x2 = x[i - 1], x[i], x[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if a >= 0:
        return float(x1)
    return float(np.clip(-b / (2 * a), x0, x2))


def _sweep_once(params, drive_template, kind, freqs, flat_lens, n_fock, dt, edge_len, workers):
    jobs = [
        (params, drive_template.with_frequency(f), kind, flat_lens, n_fock, dt, edge_len)
        for f in freqs
    ]
    chevron = np.array(_map(_trace_row, jobs, workers))
    contrast = chevron.max(axis=1) - chevron.min(axis=1)
    return chevron, contrast


def find_matching_frequency_numeric(
    params: SystemParams,
    drive_template: DriveConfig,
    kind: SidebandKind,
    window: float | None = None,
    n_grid: int = 15,
    n_fock: int = DEFAULT_N_FOCK,
    center: float | None = None,
    flat_lens=None,
    dt: float | None = None,
    edge_len: float = 10.0,
    refine: bool = False,
    workers: int = 1,
) -> SweepResult:
    """Locate the sideband resonance by maximizing endpoint-trace contrast.

    The grid is centred on the analytic Full matching frequency unless
    ``center`` is given.  With ``refine`` a second sweep of the same size is
    run over the two grid cells around the first estimate.
    """
    if n_grid < 7:
        raise ConfigError(f"n_grid must be >= 7, got {n_grid}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeValidityWarning)
        if center is None:
            center = analytic.matching_frequency(params, drive_template, kind, ModelVariant.FULL)
        if window is None:
            window = default_window(params, drive_template, kind)
        if flat_lens is None:
            flat_lens = pulse_grid(rate_seed(params, drive_template, kind))
    flat_lens = np.asarray(flat_lens, dtype=float)
    freqs = center + np.linspace(-window, window, n_grid)
    if freqs[0] <= 0:
        raise ConfigError("frequency window extends to non-positive frequencies")

    chevron, contrast = _sweep_once(
        params, drive_template, kind, freqs, flat_lens, n_fock, dt, edge_len, workers
    )
    if contrast.max() < MIN_CONTRAST:
        raise NoTransitionFoundError(
            f"largest contrast {contrast.max():.3g} below {MIN_CONTRAST} in "
            f"[{freqs[0]:.6f}, {freqs[-1]:.6f}] GHz"
        )
    i = int(np.argmax(contrast))
    if i == 0 or i == n_grid - 1:
        raise WindowTooNarrowError(
            f"contrast peaks at the window edge ({freqs[i]:.6f} GHz); widen the window"
        )
    best = _parabolic_peak(freqs, contrast, i)
    if not refine:
        return SweepResult(freqs, flat_lens, contrast, chevron, best, False, kind)

    step = freqs[1] - freqs[0]
    fine = best + np.linspace(-step, step, n_grid)
    chev2, con2 = _sweep_once(
        params, drive_template, kind, fine, flat_lens, n_fock, dt, edge_len, workers
    )
    j = int(np.argmax(con2))
    if 0 < j < n_grid - 1:
        best = _parabolic_peak(fine, con2, j)
    else:
        best = float(fine[j])
    freqs_all = np.concatenate([freqs, fine])
    order = np.argsort(freqs_all, kind="stable")
    return SweepResult(
        freqs_all[order],
        flat_lens,
        np.concatenate([contrast, con2])[order],
        np.vstack([chevron, chev2])[order],
        best,
        True,
        kind,
    )


def numeric_rate(
    params: SystemParams,
    drive: DriveConfig,
    kind: SidebandKind,
    seed_rate: float,
    n_fock: int = DEFAULT_N_FOCK,
    dt: float | None = None,
    edge_len: float = 10.0,
    max_passes: int = 3,
) -> tuple[FitResult, TimeTrace]:
    """Fit the endpoint oscillation at a fixed drive, resampling until the grid suits the rate.

    The pulse-length grid is rebuilt from the latest fitted frequency until
    it spans at least 1.5 periods with at least 8 points per period.
    """
    rate = seed_rate
    for _ in range(max_passes):
        lens = pulse_grid(rate, TRACE_PERIODS, FIT_POINTS_PER_PERIOD)
        trace = endpoint_observable(params, drive, kind, lens, n_fock, dt, edge_len)
        fit = extract_rate(trace)
        span_periods = lens[-1] * fit.omega_sb
        per_period = (len(lens) - 1) / span_periods if span_periods > 0 else 0.0
        if span_periods >= 1.5 and per_period >= POINTS_PER_PERIOD:
            return fit, trace
        rate = fit.omega_sb
    return fit, trace


# ---------------------------------------------------------------------------
# scans
# ---------------------------------------------------------------------------

ETA_EPS_Q = 0.025
ETA_EPS_C = 0.317
F_DC_OFFSET = 0.5


@dataclass(frozen=True)
class ScanSpec:
    """One-parameter scan of a drive family.

    ``variable`` is ``"eps"`` (mono strength), ``"eta"`` (bi-chromatic scale,
    eps_dq = eta * 25 MHz, eps_dc = eta * 317 MHz) or ``"g"``.  For g-scans the
    drive is fixed by ``eps`` (mono) or ``eta`` (bi).
    """

    params: SystemParams
    family: str
    kind: SidebandKind
    variable: str
    values: tuple[float, ...]
    eps: float = 0.1
    eta: float = 1.0
    f_dc: float | None = None

    def __post_init__(self):
        if self.family not in ("mono", "bi"):
            raise ConfigError(f"unknown drive family {self.family!r}")
        allowed = {"mono": ("eps", "g"), "bi": ("eta", "g")}[self.family]
        if self.variable not in allowed:
            raise ConfigError(
                f"scan variable {self.variable!r} is not valid for a {self.family} drive"
            )
        if not self.values or any(not (math.isfinite(v) and v > 0) for v in self.values):
            raise ConfigError("scan values must be a non-empty list of positive numbers")

    def point(self, value: float) -> tuple[SystemParams, DriveConfig]:
        params = self.params
        eps, eta = self.eps, self.eta
        if self.variable == "g":
            params = SystemParams(params.f_q, params.f_c, value)
        elif self.variable == "eps":
            eps = value
        else:
            eta = value
        if self.family == "mono":
            return params, MonoDrive(DriveTone(eps, params.f_q))
        f_dc = params.f_c - F_DC_OFFSET if self.f_dc is None else self.f_dc
        return params, BiDrive(
            DriveTone(eta * ETA_EPS_Q, params.f_q), DriveTone(eta * ETA_EPS_C, f_dc)
        )


@dataclass
class ComparisonRow:
    """Numeric and analytic results for one scan value; rates in GHz, signed analytic."""

    scan_var: float
    full: analytic.RateBreakdown | None = None
    full_omega0_only: float | None = None
    rwa: analytic.RateBreakdown | None = None
    rwa_omega0_only: float | None = None
    numeric_matching: float | None = None
    numeric_rate: float | None = None
    status: str = "ok"
    sweep: SweepResult | None = field(default=None, repr=False)

    def record(self) -> dict:
        def mhz(x):
            return None if x is None else abs(x) * 1e3

        return {
            "scan_var": self.scan_var,
            "numeric_matching_GHz": self.numeric_matching,
            "numeric_rate_MHz": mhz(self.numeric_rate),
            "full_total_MHz": mhz(self.full.total if self.full else None),
            "full_omega0_MHz": mhz(self.full_omega0_only),
            "rwa_total_MHz": mhz(self.rwa.total if self.rwa else None),
            "rwa_omega0_MHz": mhz(self.rwa_omega0_only),
            "full_matching_GHz": self.full.matching_f if self.full else None,
            "rwa_matching_GHz": self.rwa.matching_f if self.rwa else None,
            "status": self.status,
        }


def analytic_row(params, template, kind, value) -> ComparisonRow:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeValidityWarning)
        full = analytic.predict(params, template, kind, ModelVariant.FULL)
        rwa = analytic.predict(params, template, kind, ModelVariant.RWA)
    return ComparisonRow(
        scan_var=value,
        full=full,
        full_omega0_only=full.omega0,
        rwa=rwa,
        rwa_omega0_only=rwa.omega0,
    )


def compare_models(
    scan: ScanSpec,
    numeric: bool = True,
    n_grid: int = 15,
    n_fock: int = DEFAULT_N_FOCK,
    dt: float | None = None,
    edge_len: float = 10.0,
    refine: bool = False,
    workers: int = 1,
) -> list[ComparisonRow]:
    """Analytic (Full/RWA, total and Omega0-only) and numeric results for every scan value.

    Errors are captured per row in ``status`` and the scan carries on.
    """
    rows = []
    for value in scan.values:
        params, template = scan.point(value)
        try:
            row = analytic_row(params, template, scan.kind, value)
        except SidebandError as exc:
            rows.append(ComparisonRow(scan_var=value, status=f"analytic: {exc}"))
            continue
        if numeric:
            try:
                sw = find_matching_frequency_numeric(
                    params, template, scan.kind, n_grid=n_grid, n_fock=n_fock,
                    dt=dt, edge_len=edge_len, refine=refine, workers=workers,
                )
                row.sweep = sw
                row.numeric_matching = sw.best_f
                fit, _ = numeric_rate(
                    params, template.with_frequency(sw.best_f), scan.kind,
                    rate_seed(params, template, scan.kind), n_fock, dt, edge_len,
                )
                row.numeric_rate = fit.omega_sb
            except SidebandError as exc:
                row.status = f"numeric: {type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 12))
    return str(v)


def write_csv(rows, path, header_comment: str | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            rec = row.record()
            w.writerow([_fmt(rec[c]) for c in CSV_COLUMNS])


def write_json(rows, path, extra: dict | None = None) -> None:
    payload = dict(extra or {})
    payload["rows"] = [row.record() for row in rows]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
