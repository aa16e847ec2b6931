import json
import os
import sys
import warnings

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from qrm_sideband import analytic  # noqa: E402
from qrm_sideband.analytic import SidebandKind  # noqa: E402
from qrm_sideband.cli import run_command  # noqa: E402
from qrm_sideband.model import SystemParams  # noqa: E402
from qrm_sideband.sweep import ScanSpec, compare_models  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def _quiet_compare(scan, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeValidityWarning)
        return compare_models(scan, **kw)


@pytest.fixture(scope="session")
def red_perturbative_row():
    """Mono red sideband, f_q = 6.5, f_c = 4.0, g = 0.2, eps = 0.1; 15-point sweep plus refinement."""
    scan = ScanSpec(SystemParams(6.5, 4.0, 0.2), "mono", SidebandKind.RED, "eps", (0.1,))
    (row,) = _quiet_compare(scan, n_grid=15, refine=True)
    return row


@pytest.fixture(scope="session")
def breakdown_rows():
    """Strong-drive and coupling scans of the mono blue sideband with f_q < f_c."""
    low = SystemParams(4.0, 6.5, 0.2)
    eps_rows = _quiet_compare(ScanSpec(low, "mono", SidebandKind.BLUE, "eps", (0.1, 0.2, 0.3)), n_grid=9)
    g_rows = _quiet_compare(ScanSpec(low, "mono", SidebandKind.BLUE, "g", (0.1, 0.2, 0.3), eps=0.3), n_grid=9)
    return eps_rows, g_rows


@pytest.fixture(scope="session")
def fig9_output(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig9")
    code = run_command(["reproduce", "fig9", "--out", str(out)])
    with open(out / "sweep.json") as fh:
        data = json.load(fh)
    return code, out, data
