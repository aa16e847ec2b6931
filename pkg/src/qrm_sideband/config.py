"""Run configuration: defaults, YAML loading, flag overrides and validation."""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import yaml

from .analytic import SidebandKind
from .errors import ConfigError
from .model import BiDrive, DriveTone, MonoDrive, PulseSpec, SystemParams
from .sweep import F_DC_OFFSET, ScanSpec

OUTPUT_ENV = "QRM_SIDEBAND_OUTPUT"
EMBED_PREFIX = "# config: "

DEFAULTS = {
    "workflow": None,
    "system": {"f_q": 6.5, "f_c": 4.0, "g": 0.2},
    "drive": {
        "family": "mono",
        "eps": 0.1,
        "f_d": None,
        "eps_q": 0.025,
        "eps_c": 0.317,
        "f_dq": None,
        "f_dc": None,
    },
    "kind": "blue",
    "variant": "full",
    "scan": None,
    "simulation": {
        "n_fock": 6,
        "dt": None,
        "edge_len": 10.0,
        "n_grid": 15,
        "window": None,
        "refine": False,
        "flat_lens": None,
        "dense_flat_len": None,
    },
    "output": {"directory": None, "formats": ["csv", "json"]},
    "workers": 1,
}

SCAN_KEYS = {"variable", "values", "eps", "eta", "f_dc"}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key '{where}'")
        if key == "scan":
            if value is not None:
                if not isinstance(value, dict):
                    raise ConfigError("'scan' must be a mapping")
                extra = set(value) - SCAN_KEYS
                if extra:
                    raise ConfigError(f"unknown configuration key 'scan.{sorted(extra)[0]}'")
            out[key] = copy.deepcopy(value)
        elif isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a mapping")
            out[key] = _merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def load_file(path) -> dict:
    """Read a YAML/JSON config, or the config embedded in a result file."""
    with open(path) as fh:
        text = fh.read()
    for line in text.splitlines():
        if line.startswith(EMBED_PREFIX):
            return json.loads(line[len(EMBED_PREFIX):])
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    if "config" in data and isinstance(data["config"], dict) and "rows" in data:
        return data["config"]
    if "config" in data and isinstance(data["config"], dict) and "workflow" in data["config"]:
        return data["config"]
    return data


def resolve(file_cfg: dict | None, overrides: dict | None) -> dict:
    cfg = _merge(DEFAULTS, file_cfg or {})
    cfg = _merge(cfg, overrides or {})
    if cfg["output"]["directory"] is None:
        cfg["output"]["directory"] = os.environ.get(OUTPUT_ENV, "qrm_sideband_output")
    validate(cfg)
    return cfg


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    params: SystemParams
    kind: SidebandKind
    drive: MonoDrive | BiDrive
    scan: ScanSpec | None

    @property
    def sim(self) -> dict:
        return self.raw["simulation"]

    @property
    def out_dir(self) -> str:
        return self.raw["output"]["directory"]

    @property
    def formats(self) -> list[str]:
        return self.raw["output"]["formats"]

    @property
    def workers(self) -> int:
        return self.raw["workers"]

    def embed(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))


def _num(cfg, section, key, positive=False, allow_none=False, integer=False):
    value = cfg[section][key] if section else cfg[key]
    name = f"{section}.{key}" if section else key
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{name}' must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"'{name}' must be an integer, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"'{name}' must be positive, got {value!r}")
    return value


def validate(cfg: dict) -> None:
    for key in ("f_q", "f_c"):
        _num(cfg, "system", key, positive=True)
    if _num(cfg, "system", "g") < 0:
        raise ConfigError("'system.g' must be non-negative")
    d = cfg["drive"]
    if d["family"] not in ("mono", "bi"):
        raise ConfigError(f"'drive.family' must be 'mono' or 'bi', got {d['family']!r}")
    for key in ("eps", "eps_q", "eps_c"):
        if _num(cfg, "drive", key) < 0:
            raise ConfigError(f"'drive.{key}' must be non-negative")
    for key in ("f_d", "f_dq", "f_dc"):
        _num(cfg, "drive", key, positive=True, allow_none=True)
    if cfg["kind"] not in ("blue", "red"):
        raise ConfigError(f"'kind' must be 'blue' or 'red', got {cfg['kind']!r}")
    if cfg["variant"] not in ("full", "rwa"):
        raise ConfigError(f"'variant' must be 'full' or 'rwa', got {cfg['variant']!r}")
    s = cfg["simulation"]
    if _num(cfg, "simulation", "n_fock", integer=True) < 2:
        raise ConfigError("'simulation.n_fock' must be >= 2")
    _num(cfg, "simulation", "dt", positive=True, allow_none=True)
    _num(cfg, "simulation", "edge_len", positive=True)
    if _num(cfg, "simulation", "n_grid", integer=True) < 7:
        raise ConfigError("'simulation.n_grid' must be >= 7")
    _num(cfg, "simulation", "window", positive=True, allow_none=True)
    _num(cfg, "simulation", "dense_flat_len", allow_none=True)
    if not isinstance(s["refine"], bool):
        raise ConfigError("'simulation.refine' must be true or false")
    if s["flat_lens"] is not None:
        lens = s["flat_lens"]
        if not isinstance(lens, list) or not lens or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in lens
        ):
            raise ConfigError("'simulation.flat_lens' must be a non-empty list of numbers")
        if lens[0] < 0 or any(b <= a for a, b in zip(lens, lens[1:])):
            raise ConfigError("'simulation.flat_lens' must be non-negative and increasing")
    fmts = cfg["output"]["formats"]
    if not isinstance(fmts, list) or not set(fmts) <= {"csv", "json"} or not fmts:
        raise ConfigError("'output.formats' must be a non-empty subset of [csv, json]")
    if _num(cfg, None, "workers", integer=True) < 1:
        raise ConfigError("'workers' must be >= 1")
    sc = cfg["scan"]
    if sc is not None:
        if "variable" not in sc or "values" not in sc:
            raise ConfigError("'scan' needs 'variable' and 'values'")
        if not isinstance(sc["values"], list):
            raise ConfigError("'scan.values' must be a list")
    # construct domain objects so their own invariants are checked up front
    build(cfg)


def build(cfg: dict) -> RunConfig:
    sysc = cfg["system"]
    params = SystemParams(float(sysc["f_q"]), float(sysc["f_c"]), float(sysc["g"]))
    d = cfg["drive"]
    if d["family"] == "mono":
        drive = MonoDrive(DriveTone(float(d["eps"]), float(d["f_d"] or params.f_q)))
    else:
        f_dc = float(d["f_dc"]) if d["f_dc"] is not None else params.f_c - F_DC_OFFSET
        f_dq = float(d["f_dq"]) if d["f_dq"] is not None else params.f_q
        if f_dq == f_dc:
            f_dq = f_dc + 1.0
        drive = BiDrive(DriveTone(float(d["eps_q"]), f_dq), DriveTone(float(d["eps_c"]), f_dc))
    kind = SidebandKind(cfg["kind"])
    PulseSpec(0.0, float(cfg["simulation"]["edge_len"]))
    scan = None
    sc = cfg["scan"]
    if sc is not None:
        scan = ScanSpec(
            params=params,
            family=d["family"],
            kind=kind,
            variable=sc["variable"],
            values=tuple(float(v) for v in sc["values"]),
            eps=float(sc.get("eps", d["eps"])),
            eta=float(sc.get("eta", 1.0)),
            f_dc=None if sc.get("f_dc") is None else float(sc["f_dc"]),
        )
    return RunConfig(cfg, params, kind, drive, scan)
