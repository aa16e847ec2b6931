import csv
import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrm_sideband import analytic
from qrm_sideband.analytic import ModelVariant, SidebandKind
from qrm_sideband.errors import (
    ConfigError,
    NoOscillationError,
    NoTransitionFoundError,
    PoorFitError,
    WindowTooNarrowError,
)
from qrm_sideband.evolve import TimeTrace
from qrm_sideband.model import DriveTone, MonoDrive, SystemParams
from qrm_sideband.sweep import (
    CSV_COLUMNS,
    ComparisonRow,
    ScanSpec,
    compare_models,
    extract_rate,
    find_matching_frequency_numeric,
    numeric_rate,
    pulse_grid,
    rate_seed,
    write_csv,
    write_json,
)

BLUE, RED = SidebandKind.BLUE, SidebandKind.RED
P = SystemParams(6.5, 4.0, 0.2)
P_LOW = SystemParams(4.0, 6.5, 0.2)


@pytest.fixture(autouse=True)
def _quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeValidityWarning)
        yield


def _cos_trace(f_mhz, t, amp=1.0, phase=0.3, offset=0.0):
    y = amp * np.cos(2 * np.pi * f_mhz * 1e-3 * t + phase) + offset
    return TimeTrace(np.asarray(t), y, BLUE)


# -- fitting ---------------------------------------------------------------------

def test_fit_synthetic_5mhz():
    t = np.linspace(0.0, 600.0, 40)
    fit = extract_rate(_cos_trace(5.0, t))
    assert abs(fit.omega_sb * 1e3 - 5.0) / 5.0 < 1e-3
    assert fit.amplitude == pytest.approx(1.0, rel=1e-6)
    assert fit.rms < 1e-8


@settings(max_examples=80, deadline=None)
@given(
    f=st.floats(1.0, 50.0),
    amp=st.floats(0.3, 0.7),
    phase=st.floats(-np.pi, np.pi),
    offset=st.floats(-0.3, 0.3),
    periods=st.floats(1.5, 4.0),
    per_period=st.integers(8, 16),
)
def test_fit_round_trip(f, amp, phase, offset, periods, per_period):
    t = pulse_grid(f * 1e-3, periods, per_period)
    fit = extract_rate(_cos_trace(f, t, amp, phase, offset))
    assert abs(fit.omega_sb * 1e3 - f) / f < 1e-3


def test_fit_rejects_flat_trace():
    t = np.linspace(0.0, 100.0, 30)
    with pytest.raises(NoOscillationError):
        extract_rate(TimeTrace(t, np.full(30, 0.4), BLUE))
    with pytest.raises(NoOscillationError):
        extract_rate(_cos_trace(5.0, t, amp=0.02))


def test_fit_rejects_noise():
    rng = np.random.default_rng(1)
    t = np.linspace(0.0, 100.0, 60)
    with pytest.raises(PoorFitError) as info:
        extract_rate(TimeTrace(t, rng.uniform(-1, 1, 60), BLUE))
    assert "rms" in info.value.diagnostics


def test_pulse_grid():
    g = pulse_grid(0.005)
    assert g[0] == 0.0 and g[-1] == pytest.approx(500.0)
    assert len(g) == 21


# -- matching search ------------------------------------------------------------------

def test_n_grid_minimum():
    with pytest.raises(ConfigError):
        find_matching_frequency_numeric(P, MonoDrive(DriveTone(0.1, 5.0)), BLUE, n_grid=5)


def test_zero_drive_no_transition():
    with pytest.raises(NoTransitionFoundError):
        find_matching_frequency_numeric(P, MonoDrive(DriveTone(0.0, 5.0)), BLUE)
    with pytest.raises(NoTransitionFoundError):
        find_matching_frequency_numeric(
            P, MonoDrive(DriveTone(0.0, 5.0)), BLUE, window=0.01, flat_lens=[0.0, 100.0, 200.0]
        )


def test_window_too_narrow():
    # a window far below the resonance: contrast grows toward the upper edge
    with pytest.raises(WindowTooNarrowError):
        find_matching_frequency_numeric(
            P, MonoDrive(DriveTone(0.2, 5.0)), BLUE, window=0.003, n_grid=7, center=5.295,
            flat_lens=np.linspace(0.0, 150.0, 13),
        )


def test_weak_drive_within_one_grid_step():
    drive = MonoDrive(DriveTone(0.025, 5.0))
    f_full = analytic.matching_frequency(P, drive, BLUE)
    f_zero = analytic.matching_frequency(P, MonoDrive(DriveTone(0.0, 5.0)), BLUE)
    # window convention of +-10 x the analytic drive-induced shift
    res = find_matching_frequency_numeric(
        P, drive, BLUE, window=10 * abs(f_full - f_zero), n_grid=9, dt=1e-3
    )
    step = res.freqs[1] - res.freqs[0]
    assert abs(res.best_f - f_full) <= step
    assert res.freqs.min() <= res.best_f <= res.freqs.max()
    assert np.all((res.contrast >= 0) & (res.contrast <= 2))
    assert res.chevron.shape == (9, len(res.flat_lens))


@pytest.mark.slow
def test_best_f_stable_under_grid_doubling():
    drive = MonoDrive(DriveTone(0.2, 5.0))
    a = find_matching_frequency_numeric(P, drive, BLUE, n_grid=15)
    b = find_matching_frequency_numeric(P, drive, BLUE, n_grid=29)
    fine_step = b.freqs[1] - b.freqs[0]
    assert abs(a.best_f - b.best_f) <= 0.5 * fine_step
    assert not a.refined


def test_refine_tightens_grid():
    drive = MonoDrive(DriveTone(0.2, 5.0))
    r = find_matching_frequency_numeric(P, drive, BLUE, n_grid=7, refine=True)
    assert r.refined
    assert len(r.freqs) == 14
    assert np.all(np.diff(r.freqs) >= 0)
    assert r.freqs.min() <= r.best_f <= r.freqs.max()


APPX = MonoDrive(DriveTone(0.1, 5.278))


def test_numeric_rate_matches_floquet_oracle():
    fit, trace = numeric_rate(P, APPX, BLUE, rate_seed(P, APPX, BLUE))
    # quasienergy gap at the resonance: 3.0186 MHz at 5.27804 GHz
    assert fit.omega_sb * 1e3 == pytest.approx(3.0186, rel=0.01)
    assert trace.flat_lens[-1] * fit.omega_sb >= 1.5
    assert (len(trace.flat_lens) - 1) / (trace.flat_lens[-1] * fit.omega_sb) >= 8


def test_appendix_rate_within_15pct_of_full():
    full = analytic.predict(P, APPX, BLUE)
    fit, _ = numeric_rate(P, APPX, BLUE, rate_seed(P, APPX, BLUE))
    assert abs(fit.omega_sb - full.abs_total) / full.abs_total < 0.15


def test_parallel_workers_match_serial():
    drive = MonoDrive(DriveTone(0.3, 5.0))
    lens = np.linspace(0.0, 60.0, 7)
    a = find_matching_frequency_numeric(P, drive, BLUE, n_grid=7, flat_lens=lens, workers=1)
    b = find_matching_frequency_numeric(P, drive, BLUE, n_grid=7, flat_lens=lens, workers=2)
    assert np.array_equal(a.chevron, b.chevron)
    assert a.best_f == b.best_f


# -- scans and tables -------------------------------------------------------------------

def test_scan_spec_validation():
    with pytest.raises(ConfigError):
        ScanSpec(P, "mono", RED, "eta", (1.0,))
    with pytest.raises(ConfigError):
        ScanSpec(P, "tri", RED, "eps", (1.0,))
    with pytest.raises(ConfigError):
        ScanSpec(P, "mono", RED, "eps", ())
    with pytest.raises(ConfigError):
        ScanSpec(P, "mono", RED, "eps", (0.1, -0.2))


def test_scan_points():
    params, drive = ScanSpec(P, "bi", BLUE, "eta", (2.0,)).point(2.0)
    assert drive.tone_q.eps == pytest.approx(0.05)
    assert drive.tone_c.eps == pytest.approx(0.634)
    assert drive.tone_c.f_d == pytest.approx(3.5)
    params, drive = ScanSpec(P_LOW, "mono", RED, "g", (0.3,), eps=0.1).point(0.3)
    assert params.g == 0.3 and drive.tone.eps == 0.1


def test_compare_models_analytic_rows():
    scan = ScanSpec(P_LOW, "mono", RED, "eps", (0.05, 0.1, 0.2, 0.3))
    rows = compare_models(scan, numeric=False)
    assert [r.scan_var for r in rows] == [0.05, 0.1, 0.2, 0.3]
    for r in rows:
        rec = r.record()
        assert rec["rwa_omega0_MHz"] == 0.0
        for key in ("full_total_MHz", "full_omega0_MHz", "rwa_total_MHz", "full_matching_GHz", "rwa_matching_GHz"):
            assert rec[key] is not None
        assert rec["status"] == "ok"


def test_compare_models_bi_rows_carry_both_matchings():
    scan = ScanSpec(P, "bi", BLUE, "eta", (0.5, 1.0, 2.0))
    for r in compare_models(scan, numeric=False):
        assert r.full.matching_f != r.rwa.matching_f
        assert r.record()["full_matching_GHz"] > 0


def test_compare_models_records_row_errors():
    # eps so large that the drive crosses the qubit line: the row fails, the scan carries on
    scan = ScanSpec(P, "mono", BLUE, "eps", (0.1, 3.0))
    rows = compare_models(scan, numeric=False)
    assert rows[0].status == "ok"
    assert rows[1].status != "ok"


@pytest.mark.slow
def test_compare_models_numeric_row():
    scan = ScanSpec(P, "mono", RED, "eps", (0.3,))
    (row,) = compare_models(scan, n_grid=9)
    assert row.status == "ok"
    # Floquet oracle: resonance 1.29749 GHz, rate 6.469 MHz
    assert row.numeric_matching == pytest.approx(1.29749, abs=5e-4)
    assert row.numeric_rate * 1e3 == pytest.approx(6.469, rel=0.02)


def test_csv_and_json_schema(tmp_path):
    rows = compare_models(ScanSpec(P, "mono", RED, "eps", (0.1, 0.2)), numeric=False)
    rows.append(ComparisonRow(scan_var=0.3, status="numeric: failed"))
    write_csv(rows, tmp_path / "scan.csv", header_comment="run 1")
    write_json(rows, tmp_path / "scan.json", {"note": "x"})
    lines = open(tmp_path / "scan.csv").read().splitlines()
    assert lines[0] == "# run 1"
    table = list(csv.reader(lines[1:]))
    assert tuple(table[0]) == CSV_COLUMNS
    assert len(table) == 4
    data = json.load(open(tmp_path / "scan.json"))
    assert set(data["rows"][0]) == set(CSV_COLUMNS)
    assert data["rows"][2]["full_total_MHz"] is None
