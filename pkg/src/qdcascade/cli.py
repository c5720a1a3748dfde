"""Command-line front end: ``qdcascade <command> --config run.yaml``.

Each command parses the config, calls one library function and serializes
the result.  Exit codes: 0 success, 1 physics or convergence failure (a
JSON error object goes to stderr), 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bipolariton import BipolaritonError, spectrum_with_asymmetry, tune_symmetric
from .cascade import CascadeError, build_channels, default_spectrum_axis, line_table, pl_spectrum
from .config import SCHEMA_VERSION, ConfigError, RunConfig, load_config, resolved
from .entanglement import NoFluxError
from .explorer import FilterRecord, OptimumResult, SweepResult, SweepSpec, filter_sweep, \
    optimize_gamma, sweep
from .model import ParameterError
from .quadrature import QuadratureError

PHYSICS_ERRORS = (QuadratureError, NoFluxError, CascadeError, BipolaritonError, ParameterError,
                  RuntimeError)

MAP_HEADER = ("axis1", "axis2", "gamma_abs", "qe", "pair", "converged")


def fmt(x) -> str:
    """12 significant digits, '.' decimal; non-finite values become NA."""
    if x is None:
        return "NA"
    x = float(x)
    if not math.isfinite(x):
        return "NA"
    return f"{x:.12g}"


def _csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _envelope(command: str, cfg: RunConfig, result) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
            "config": resolved(cfg), "result": result}


def _clean(x):
    return float(x) if math.isfinite(x) else None


# serializers shared with the tests, so CLI output equals serialized library output

def spectrum_csv(spec) -> str:
    rows = ((fmt(e), fmt(h), fmt(v)) for e, h, v in
            zip(spec.energy, spec.intensity_H, spec.intensity_V))
    return _csv(("energy_meV", "intensity_H", "intensity_V"), rows)


def lines_payload(lines) -> list[dict]:
    return [{"kind": l.kind, "polarization": l.polarization, "branch": l.branch,
             "center_meV": l.center, "fwhm_meV": l.fwhm, "weight": l.integrated_weight}
            for l in lines]


def sweep_csv(result: SweepResult) -> str:
    two = result.spec.axis2 is not None
    rows = []
    for r in result.records:
        a2 = fmt(r.values[1]) if two else "NA"
        rows.append((fmt(r.values[0]), a2, fmt(r.gamma_abs), fmt(r.qe),
                     r.pair or "NA", "true" if r.converged else "false"))
    return _csv(MAP_HEADER, rows)


def optimum_payload(r: OptimumResult) -> dict:
    return {"delta_C": r.delta_C, "delta_CX": r.delta_CX, "gamma_abs": r.gamma_abs,
            "qe": _clean(r.qe), "pair": r.pair, "grid_gamma_abs": r.grid_gamma_abs,
            "refined": r.refined}


def filter_csv(records: Sequence[FilterRecord], widths_as_given: Sequence[float]) -> str:
    rows = ((repr(float(w)), fmt(r.gamma_abs), fmt(r.qe), "true" if r.converged else "false")
            for w, r in zip(widths_as_given, records))
    return _csv(("width_meV", "gamma_abs", "qe", "converged"), rows)


def bipolariton_payload(spec, tuned=None) -> dict:
    out = {"eigenvalues": [float(x) for x in spec.eigenvalues],
           "eigenvectors": [[float(x) for x in row] for row in spec.eigenvectors],
           "asymmetry": float(spec.asymmetry)}
    if tuned is not None:
        out["tuned"] = {"E_Cxx_H": tuned.E_Cxx_H, "E_Cxx_V": tuned.E_Cxx_V,
                        "asymmetry": tuned.metric, "grid_asymmetry": tuned.grid_metric}
    return out


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def cmd_spectrum(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    channels = build_channels(cfg.system)
    p_axis, xx_axis = default_spectrum_axis(channels, cfg.spectrum.points, cfg.spectrum.margin_fwhm)
    spec = pl_spectrum(channels, np.concatenate([p_axis, xx_axis]))
    for w in spec.warnings:
        print(f"warning: {w}", file=sys.stderr)
    payload = _envelope("spectrum", cfg, {"lines": lines_payload(line_table(channels)),
                                          "warnings": spec.warnings})
    return [_write(out, "spectrum.csv", spectrum_csv(spec)),
            _write(out, "lines.json", _json(payload))]


def _sweep_spec(cfg: RunConfig) -> SweepSpec:
    if cfg.map.axis1 is None:
        raise ConfigError("map.axis1 is required for the map command")
    return SweepSpec(cfg.map.axis1, cfg.map.axis2, cfg.system, cfg.map.window_width,
                     cfg.map.objective, rel_tol=cfg.rel_tol)


def cmd_map(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    result = sweep(_sweep_spec(cfg), threads=threads)
    best = result.best()
    summary = {"axis_values": list(best.values), "gamma_abs": best.gamma_abs,
               "qe": _clean(best.qe), "pair": best.pair,
               "failed_cells": sum(not r.converged for r in result.records)}
    print(json.dumps({"maximum": summary}))
    return [_write(out, "map.csv", sweep_csv(result)),
            _write(out, "map.json", _json(_envelope("map", cfg, summary)))]


def cmd_optimize(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    o = cfg.optimize
    r = optimize_gamma(cfg.system, o.free, o.bounds, o.window_width, o.grid,
                       rel_tol=cfg.rel_tol, threads=threads)
    return [_write(out, "optimize.json", _json(_envelope("optimize", cfg, optimum_payload(r))))]


def cmd_filter_sweep(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    widths = cfg.filter_sweep.widths
    if not widths:
        raise ConfigError("filter_sweep.widths_mev: an empty grid was requested")
    records = filter_sweep(cfg.system, widths, rel_tol=cfg.rel_tol)
    rows = [{"width_meV": r.width, "gamma_abs": _clean(r.gamma_abs), "qe": _clean(r.qe),
             "converged": r.converged, "error": r.error} for r in records]
    return [_write(out, "filter_sweep.csv", filter_csv(records, widths)),
            _write(out, "filter_sweep.json", _json(_envelope("filter-sweep", cfg, rows)))]


def cmd_bipolariton(cfg: RunConfig, out: Path, threads: int) -> list[Path]:
    b = cfg.bipolariton
    spec = spectrum_with_asymmetry(cfg.bipolariton_params, linewidth_mix=b.linewidth_mix)
    tuned = tune_symmetric(cfg.bipolariton_params, grid=b.grid,
                           linewidth_mix=b.linewidth_mix) if b.tune else None
    return [_write(out, "bipolariton.json",
                   _json(_envelope("bipolariton", cfg, bipolariton_payload(spec, tuned))))]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "map": cmd_map,
    "optimize": cmd_optimize,
    "filter-sweep": cmd_filter_sweep,
    "bipolariton": cmd_bipolariton,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdcascade", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=".", help="output directory (created if missing)")
        p.add_argument("--threads", type=int, default=1, help="worker processes for grid cells")
        p.add_argument("--tol", type=float, default=None, help="relative quadrature tolerance")
    return parser


def _physics_error(command: str, exc: Exception) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "command": command}),
          file=sys.stderr)
    return 1


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config)
        if args.tol is not None:
            if not 0 < args.tol < 1:
                raise ConfigError("--tol must lie in (0, 1)")
            cfg = replace(cfg, rel_tol=args.tol)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        print(f"qdcascade {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qdcascade {args.command}: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    try:
        paths = COMMANDS[args.command](cfg, out, args.threads)
    except ConfigError as exc:
        print(f"qdcascade {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qdcascade {args.command}: I/O error: {exc}", file=sys.stderr)
        return 1
    except PHYSICS_ERRORS as exc:
        return _physics_error(args.command, exc)
    for p in paths:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
