"""Command-line front end.

Subcommands: ``predict``, ``evolve``, ``sweep``, ``reproduce TARGET`` and
``rerun FILE``.  Every result file embeds the resolved configuration, so
``rerun`` (or ``--config`` pointed at a result file) regenerates it.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import warnings

import numpy as np
import yaml

from . import analytic, config, evolve, sweep, targets
from .analytic import ModelVariant
from .errors import ConfigError, SidebandError
from .model import DispersiveRegimeWarning, PulseSpec, dressed_basis

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _floats(text: str) -> list[float]:
    """Comma list ``a,b,c`` or range ``start:stop:num`` (inclusive, like linspace)."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return [float(x) for x in np.linspace(float(start), float(stop), int(num))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse number list {text!r}") from exc


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="YAML/JSON config file, or a result file to re-run")
    g.add_argument("--out", help=f"output directory (default ${config.OUTPUT_ENV} or ./qrm_sideband_output)")
    g.add_argument("--workers", type=int, help="processes for frequency sweeps")
    g.add_argument("--format", action="append", choices=["csv", "json"], dest="formats",
                   help="output format; repeat for several (default both)")
    s = p.add_argument_group("system (GHz)")
    s.add_argument("--f-q", type=float)
    s.add_argument("--f-c", type=float)
    s.add_argument("--g", type=float)
    d = p.add_argument_group("drive (GHz)")
    d.add_argument("--family", choices=["mono", "bi"])
    d.add_argument("--eps", type=float, help="monochromatic amplitude")
    d.add_argument("--f-d", type=float, help="monochromatic frequency (default: analytic matching)")
    d.add_argument("--eps-q", type=float)
    d.add_argument("--eps-c", type=float)
    d.add_argument("--eta", type=float, help="bi-chromatic scale: eps_q = 25 MHz * eta, eps_c = 317 MHz * eta")
    d.add_argument("--f-dq", type=float, help="qubit-friendly tone (default: analytic matching)")
    d.add_argument("--f-dc", type=float, help="cavity-friendly tone (default f_c - 0.5)")
    p.add_argument("--kind", choices=["blue", "red"])
    p.add_argument("--variant", choices=["full", "rwa"])
    n = p.add_argument_group("simulation")
    n.add_argument("--n-fock", type=int)
    n.add_argument("--dt", type=float, help="RK4 step, ns")
    n.add_argument("--edge-len", type=float, help="Gaussian edge length, ns")
    n.add_argument("--n-grid", type=int, help="frequency points per sweep")
    n.add_argument("--window", type=float, help="sweep half-width, GHz")
    n.add_argument("--refine", action=argparse.BooleanOptionalAction, default=None)
    n.add_argument("--flat-lens", type=_floats, help="flat lengths, ns: 'a,b,c' or 'start:stop:num'")
    n.add_argument("--dense", type=float, dest="dense_flat_len",
                   help="also record a dense trajectory of a pulse with this flat length")
    c = p.add_argument_group("scan")
    c.add_argument("--scan-var", choices=["eps", "eta", "g"])
    c.add_argument("--scan-values", type=_floats)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrm-sideband", description="Two-photon sideband rates in the driven quantum Rabi model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (
        ("predict", "analytic matching frequency and rate"),
        ("evolve", "endpoint trace (and optional dense trajectory) at a fixed drive"),
        ("sweep", "chevron sweep and numeric rate, or a model-comparison scan"),
    ):
        _common(sub.add_parser(name, help=text))
    rp = sub.add_parser("reproduce", help="canned benchmark configurations")
    rp.add_argument("target", help="one of: " + ", ".join(targets.target_names()))
    _common(rp)
    rr = sub.add_parser("rerun", help="re-run the configuration embedded in a result file")
    rr.add_argument("result")
    rr.add_argument("--out")
    rr.add_argument("--workers", type=int)
    return parser


def _overrides(ns) -> dict:
    """Nested config dict from the flags that were actually given."""
    o: dict = {}

    def put(section, key, value):
        if value is None:
            return
        if section is None:
            o[key] = value
        else:
            o.setdefault(section, {})[key] = value

    get = lambda name: getattr(ns, name, None)  # noqa: E731
    put("output", "directory", get("out"))
    put("output", "formats", sorted(set(get("formats"))) if get("formats") else None)
    put(None, "workers", get("workers"))
    for key in ("f_q", "f_c", "g"):
        put("system", key, get(key))
    for key in ("family", "eps", "f_d", "eps_q", "eps_c", "f_dq", "f_dc"):
        put("drive", key, get(key))
    if get("eta") is not None:
        put("drive", "eps_q", get("eta") * sweep.ETA_EPS_Q)
        put("drive", "eps_c", get("eta") * sweep.ETA_EPS_C)
    put(None, "kind", get("kind"))
    put(None, "variant", get("variant"))
    for key in ("n_fock", "dt", "edge_len", "n_grid", "window", "refine", "flat_lens", "dense_flat_len"):
        put("simulation", key, get(key))
    if get("scan_var") is not None or get("scan_values") is not None:
        if get("scan_var") is None or get("scan_values") is None:
            raise ConfigError("--scan-var and --scan-values must be given together")
        scan = {"variable": get("scan_var"), "values": get("scan_values")}
        if get("eta") is not None:
            scan["eta"] = get("eta")
        o["scan"] = scan
    return o


def _resolve(ns) -> tuple[str, config.RunConfig]:
    file_cfg = {}
    if ns.command == "rerun":
        file_cfg = config.load_file(ns.result)
    elif ns.config:
        file_cfg = config.load_file(ns.config)
    workflow = file_cfg.get("workflow") or ns.command
    if ns.command == "reproduce":
        try:
            workflow, canned = targets.target_config(ns.target)
        except KeyError:
            raise ConfigError(
                f"unknown reproduce target {ns.target!r}; choose from {', '.join(targets.target_names())}"
            ) from None
        file_cfg = config._merge(config._merge(config.DEFAULTS, canned), file_cfg)
        file_cfg["workflow"] = workflow
    elif ns.command != "rerun":
        workflow = ns.command
        if workflow == "sweep" and (file_cfg.get("scan") or getattr(ns, "scan_var", None)):
            workflow = "scan"
    file_cfg = dict(file_cfg, workflow=workflow)
    raw = config.resolve(file_cfg, _overrides(ns))
    if ns.command == "reproduce" and ns.out is None:
        raw["output"]["directory"] = os.path.join(raw["output"]["directory"], ns.target.lower())
    if raw["workflow"] == "scan" and raw["scan"] is None:
        raise ConfigError("'scan' section is required for a scan")
    return raw["workflow"], config.build(raw)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _portable(rc: config.RunConfig) -> dict:
    """Resolved config as embedded in results: everything except where it was written."""
    raw = copy.deepcopy(rc.raw)
    raw["output"]["directory"] = None
    raw.pop("workers")
    return raw


def _embed_line(rc) -> str:
    return config.EMBED_PREFIX + json.dumps(_portable(rc), sort_keys=True, separators=(",", ":"))


def _num(v):
    if v is None:
        return None
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if not math.isfinite(v) else round(v, 12)
    if isinstance(v, np.integer):
        return int(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return _num(obj)


def _write_json(path, rc, payload) -> None:
    data = {"config": _portable(rc)}
    data.update(_clean(payload))
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_table(path, rc, header, rows, notes=None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(_embed_line(rc) + "\n")
        for key, value in (notes or {}).items():
            fh.write(f"# {key}: {_num(value)!r}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else repr(_num(v)) if isinstance(v, float) else v for v in row])


def _fit_dict(fit):
    return None if fit is None else {
        "omega_sb_GHz": fit.omega_sb,
        "rate_MHz": fit.omega_sb * 1e3,
        "amplitude": fit.amplitude,
        "offset": fit.offset,
        "phase": fit.phase,
        "rms": fit.rms,
    }


# ---------------------------------------------------------------------------
# workflows
# ---------------------------------------------------------------------------

def _predict(rc, out):
    results = {}
    for variant in (ModelVariant.FULL, ModelVariant.RWA):
        results[variant.value] = analytic.predict(rc.params, rc.drive, rc.kind, variant)
    chosen = results[rc.raw["variant"]]
    paths = []
    if "json" in rc.formats:
        paths.append(os.path.join(out, "predict.json"))
        _write_json(paths[-1], rc, {
            "prediction": chosen.as_dict(),
            "variants": {k: v.as_dict() for k, v in results.items()},
        })
    if "csv" in rc.formats:
        paths.append(os.path.join(out, "predict.csv"))
        header = ["variant", "matching_f_GHz", "omega0_MHz", "omega1_MHz", "total_MHz",
                  "abs_total_MHz", "delta_wq_MHz", "eps_m_MHz"]
        rows = [[k, r.matching_f, r.omega0 * 1e3, r.omega1 * 1e3, r.total * 1e3,
                 r.abs_total * 1e3, r.delta_wq * 1e3, r.eps_m * 1e3] for k, r in results.items()]
        _write_table(paths[-1], rc, header, rows)
    print(f"{rc.kind.value} sideband, {rc.raw['variant']} model: matching f = {chosen.matching_f:.6f} GHz, "
          f"|Omega_sb|/2pi = {chosen.abs_total * 1e3:.4f} MHz "
          f"(Omega0 {chosen.omega0 * 1e3:+.4f}, Omega1 {chosen.omega1 * 1e3:+.4f} MHz)")
    return paths


def _drive_at(rc):
    """Configured drive, with an unset swept frequency filled by the analytic matching."""
    d = rc.raw["drive"]
    unset = d["f_d"] is None if d["family"] == "mono" else d["f_dq"] is None
    if not unset:
        return rc.drive, False
    variant = ModelVariant(rc.raw["variant"])
    f = analytic.matching_frequency(rc.params, rc.drive, rc.kind, variant)
    return rc.drive.with_frequency(f), True


def _evolve(rc, out):
    sim = rc.sim
    drive, _ = _drive_at(rc)
    lens = sim["flat_lens"]
    if lens is None:
        lens = sweep.pulse_grid(sweep.rate_seed(rc.params, rc.drive, rc.kind), per_period=sweep.FIT_POINTS_PER_PERIOD)
    trace = evolve.endpoint_observable(rc.params, drive, rc.kind, lens, sim["n_fock"], sim["dt"], sim["edge_len"])
    fit, fit_error = None, None
    try:
        fit = sweep.extract_rate(trace)
    except SidebandError as exc:
        fit_error = f"{type(exc).__name__}: {exc}"
    paths = []
    if "csv" in rc.formats:
        paths.append(os.path.join(out, "trace.csv"))
        _write_table(paths[-1], rc, ["flat_len_ns", "observable"], zip(trace.flat_lens.tolist(), trace.values.tolist()))
    if "json" in rc.formats:
        paths.append(os.path.join(out, "trace.json"))
        _write_json(paths[-1], rc, {
            "drive_frequency_GHz": drive.swept_frequency,
            "flat_len_ns": trace.flat_lens,
            "observable": trace.values,
            "fit": _fit_dict(fit),
            "fit_error": fit_error,
        })
    if sim["dense_flat_len"] is not None:
        pulse = PulseSpec(float(sim["dense_flat_len"]), sim["edge_len"])
        init, _, _ = evolve.SIDEBAND_STATES[rc.kind]
        basis = dressed_basis(rc.params, sim["n_fock"])
        state = evolve.QuantumState.dressed(basis, init)
        dt = evolve.default_dt(rc.params, drive) if sim["dt"] is None else sim["dt"]
        # about 20 samples per drive period
        stride = max(1, int(1.0 / (20 * max(t.f_d for t in drive.tones) * dt)))
        res = evolve.propagate(rc.params, drive, pulse, state, dt, sim["n_fock"], trajectory=True, stride=stride)
        tr = res.trajectory
        if "csv" in rc.formats:
            paths.append(os.path.join(out, "trajectory.csv"))
            _write_table(paths[-1], rc, ["t_ns", "observable", "norm"],
                         zip(tr.times.tolist(), tr.observable(rc.kind).tolist(), tr.norms.tolist()))
        if "json" in rc.formats:
            paths.append(os.path.join(out, "trajectory.json"))
            _write_json(paths[-1], rc, {"t_ns": tr.times, "observable": tr.observable(rc.kind), "norm": tr.norms})
    msg = f"drive at {drive.swept_frequency:.6f} GHz, contrast {trace.contrast:.3f}"
    if fit is not None:
        msg += f", fitted rate {fit.omega_sb * 1e3:.4f} MHz"
    print(msg)
    return paths


def _sweep(rc, out):
    sim = rc.sim
    res = sweep.find_matching_frequency_numeric(
        rc.params, rc.drive, rc.kind, window=sim["window"], n_grid=sim["n_grid"],
        n_fock=sim["n_fock"], flat_lens=sim["flat_lens"], dt=sim["dt"],
        edge_len=sim["edge_len"], refine=sim["refine"], workers=rc.workers,
    )
    drive = rc.drive.with_frequency(res.best_f)
    fit, fit_error = None, None
    try:
        fit, _ = sweep.numeric_rate(rc.params, drive, rc.kind, sweep.rate_seed(rc.params, rc.drive, rc.kind),
                                    sim["n_fock"], sim["dt"], sim["edge_len"])
    except SidebandError as exc:
        fit_error = f"{type(exc).__name__}: {exc}"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analytic.PerturbativeValidityWarning)
        full = analytic.predict(rc.params, rc.drive, rc.kind, ModelVariant.FULL)
    paths = []
    if "csv" in rc.formats:
        paths.append(os.path.join(out, "chevron.csv"))
        rows = [(f, L, v) for f, line in zip(res.freqs.tolist(), res.chevron.tolist())
                for L, v in zip(res.flat_lens.tolist(), line)]
        notes = {"best_f_GHz": res.best_f}
        if fit is not None:
            notes["numeric_rate_MHz"] = fit.omega_sb * 1e3
        _write_table(paths[-1], rc, ["f_GHz", "flat_len_ns", "observable"], rows, notes)
    if "json" in rc.formats:
        paths.append(os.path.join(out, "sweep.json"))
        _write_json(paths[-1], rc, {
            "best_f_GHz": res.best_f,
            "refined": res.refined,
            "freqs_GHz": res.freqs,
            "contrast": res.contrast,
            "flat_len_ns": res.flat_lens,
            "fit": _fit_dict(fit),
            "fit_error": fit_error,
            "analytic_full": full.as_dict(),
        })
    msg = f"best_f = {res.best_f:.6f} GHz (analytic Full {full.matching_f:.6f} GHz)"
    if fit is not None:
        msg += f", numeric rate {fit.omega_sb * 1e3:.4f} MHz vs analytic {full.abs_total * 1e3:.4f} MHz"
    print(msg)
    return paths


def _scan(rc, out):
    sim = rc.sim
    rows = sweep.compare_models(
        rc.scan, numeric=True, n_grid=sim["n_grid"], n_fock=sim["n_fock"], dt=sim["dt"],
        edge_len=sim["edge_len"], refine=sim["refine"], workers=rc.workers,
    )
    paths = []
    if "csv" in rc.formats:
        paths.append(os.path.join(out, "scan.csv"))
        with open(paths[-1], "w", newline="") as fh:
            fh.write(_embed_line(rc) + "\n")
        with open(paths[-1], "a", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(sweep.CSV_COLUMNS)
            for row in rows:
                rec = row.record()
                w.writerow([sweep._fmt(rec[c]) for c in sweep.CSV_COLUMNS])
    if "json" in rc.formats:
        paths.append(os.path.join(out, "scan.json"))
        _write_json(paths[-1], rc, {"rows": [row.record() for row in rows]})
    for row in rows:
        rec = row.record()
        print(f"{rc.scan.variable}={rec['scan_var']:g}: numeric {rec['numeric_rate_MHz'] or float('nan'):.4f} MHz, "
              f"Full {rec['full_total_MHz'] or float('nan'):.4f} MHz, RWA {rec['rwa_total_MHz'] or float('nan'):.4f} MHz"
              + ("" if row.status == "ok" else f"  [{row.status}]"))
    return paths


WORKFLOWS = {"predict": _predict, "evolve": _evolve, "sweep": _sweep, "scan": _scan}


def run_command(argv=None) -> int:
    """Parse ``argv``, run the workflow and return the process exit status."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        workflow, rc = _resolve(ns)
        if workflow not in WORKFLOWS:
            raise ConfigError(f"unknown workflow {workflow!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, yaml.YAMLError, json.JSONDecodeError) as exc:
        print(f"configuration error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SidebandError as exc:
        print(f"configuration error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        os.makedirs(rc.out_dir, exist_ok=True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DispersiveRegimeWarning)
            paths = WORKFLOWS[workflow](rc, rc.out_dir)
    except SidebandError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
