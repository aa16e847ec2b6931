"""Canned configurations for the benchmark figures.

Panel layout: (a, b) use f_q, f_c = 6.5, 4.0 GHz and (c, d) use 4.0, 6.5 GHz,
with red sidebands in (a, c) and blue in (b, d), g = 200 MHz.  The g-scan
figures fix f_q, f_c = 4.0, 6.5 GHz; (a, b) are monochromatic and (c, d)
bi-chromatic.  Matching-frequency figures share the rate figures' scans.
"""
from __future__ import annotations

EPS_VALUES = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3]
ETA_VALUES = [0.5, 1.0, 1.5, 2.0]
G_VALUES = [0.1, 0.2, 0.3, 0.4, 0.5]
# g-scan drive strengths: red and blue monochromatic sidebands
G_SCAN_EPS = {"red": 0.1, "blue": 0.3}

_PANELS = {
    "a": ((6.5, 4.0), "red"),
    "b": ((6.5, 4.0), "blue"),
    "c": ((4.0, 6.5), "red"),
    "d": ((4.0, 6.5), "blue"),
}


def _system(f_q, f_c, g=0.2):
    return {"f_q": f_q, "f_c": f_c, "g": g}


def _rate_scan(panel: str, family: str) -> dict:
    (f_q, f_c), kind = _PANELS[panel]
    if family == "mono":
        scan = {"variable": "eps", "values": list(EPS_VALUES)}
        drive = {"family": "mono"}
    else:
        scan = {"variable": "eta", "values": list(ETA_VALUES)}
        drive = {"family": "bi"}
    return {
        "system": _system(f_q, f_c),
        "drive": drive,
        "kind": kind,
        "scan": scan,
        "simulation": {"refine": True},
    }


def _g_scan(panel: str) -> dict:
    kind = "red" if panel in ("a", "c") else "blue"
    family = "mono" if panel in ("a", "b") else "bi"
    scan = {"variable": "g", "values": list(G_VALUES)}
    if family == "mono":
        scan["eps"] = G_SCAN_EPS[kind]
    else:
        scan["eta"] = 1.0
    return {
        "system": _system(4.0, 6.5),
        "drive": {"family": family},
        "kind": kind,
        "scan": scan,
        "simulation": {"refine": True},
    }


def _fig8() -> dict:
    return {
        "system": _system(6.5, 4.0),
        "drive": {"family": "mono", "eps": 0.1, "f_d": 5.278},
        "kind": "blue",
        "simulation": {
            "flat_lens": [float(x) for x in range(0, 481, 10)],
            "dense_flat_len": 480.0,
        },
    }


def _fig9() -> dict:
    return {
        "system": _system(6.5, 4.0),
        "drive": {"family": "mono", "eps": 0.5},
        "kind": "blue",
        "simulation": {"refine": True},
    }


def target_config(name: str) -> tuple[str, dict]:
    """Workflow name and configuration overrides for a reproduction target."""
    name = name.lower()
    if name == "fig8":
        return "evolve", _fig8()
    if name == "fig9":
        return "sweep", _fig9()
    if len(name) == 5 and name[:4] in ("fig3", "fig6") and name[4] in _PANELS:
        return "scan", _rate_scan(name[4], "mono")
    if len(name) == 5 and name[:4] in ("fig4", "fig7") and name[4] in _PANELS:
        return "scan", _rate_scan(name[4], "bi")
    if len(name) == 6 and name[:5] == "fig10" and name[5] in _PANELS:
        return "scan", _g_scan(name[5])
    if len(name) == 5 and name[:4] == "fig5" and name[4] in _PANELS:
        return "scan", _g_scan(name[4])
    raise KeyError(name)


def target_names() -> list[str]:
    names = ["fig8", "fig9"]
    for fig in ("fig3", "fig4", "fig5", "fig6", "fig7", "fig10"):
        names.extend(f"{fig}{p}" for p in _PANELS)
    return names
