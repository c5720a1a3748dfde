"""YAML run configuration with unit-suffixed keys.

Only documented keys are accepted; a typo is a usage error rather than a
silently ignored setting.  :func:`resolved` expands every default so that a
result file embeds a config that reproduces the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import yaml

from .bipolariton import BipolaritonParams
from .explorer import AXIS_NAMES, DEFAULT_BOUNDS, OBJECTIVES, Axis
from .model import SystemParams

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (exit code 2)."""


# config key -> SystemParams field
_ABSOLUTE = {
    "e_x_h_mev": "E_X_H", "e_x_v_mev": "E_X_V",
    "e_c_h_mev": "E_C_H", "e_c_v_mev": "E_C_V",
}
_COMMON = {
    "omega_h_mev": "Omega_H", "omega_v_mev": "Omega_V",
    "e_xx_mev": "E_XX", "gamma_xx_mev": "Gamma_XX",
    "tau_c_ps": "tau_C", "tau_x_ps": "tau_X",
    "exciton_broadening": "exciton_broadening",
}
_DETUNING_KEYS = {"delta_x_mev", "delta_c_mev", "delta_cx_mev", "delta_xc_mev", "exciton_mean_mev"}
_BIPOLARITON = {
    "e_cxx_h_mev": "E_Cxx_H", "e_cxx_v_mev": "E_Cxx_V",
    "omega_xx_h_mev": "Omega_XX_H", "omega_xx_v_mev": "Omega_XX_V",
}
_AXIS_KEYS = {
    "delta_cx_mev": "delta_CX", "delta_c_mev": "delta_C",
    "omega_h_mev": "Omega_H", "omega_v_mev": "Omega_V",
    "window_width_mev": "window_width",
}
_FREE_KEYS = {"delta_c_mev": "delta_C", "delta_cx_mev": "delta_CX"}
_TOP = {"system", "spectrum", "map", "optimize", "filter_sweep", "bipolariton", "tolerance"}


def _check_keys(block: dict, allowed, where: str):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


@dataclass(frozen=True)
class SpectrumConfig:
    points: int = 4001
    margin_fwhm: float = 12.0


@dataclass(frozen=True)
class MapConfig:
    axis1: Axis | None = None
    axis2: Axis | None = None
    window_width: float | None = 0.1
    objective: str = "gamma_prime_abs"


@dataclass(frozen=True)
class OptimizeConfig:
    free: tuple[str, ...] = ("delta_C", "delta_CX")
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    grid: int = 41
    window_width: float | None = 0.1


@dataclass(frozen=True)
class FilterSweepConfig:
    widths: tuple[float, ...] = ()


@dataclass(frozen=True)
class BipolaritonConfig:
    tune: bool = False
    grid: int = 21
    linewidth_mix: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    bipolariton_params: BipolaritonParams
    spectrum: SpectrumConfig = SpectrumConfig()
    map: MapConfig = MapConfig()
    optimize: OptimizeConfig = OptimizeConfig()
    filter_sweep: FilterSweepConfig = FilterSweepConfig()
    bipolariton: BipolaritonConfig = BipolaritonConfig()
    rel_tol: float = 1e-8


def _parse_system(block: dict) -> tuple[SystemParams, dict]:
    _check_keys(block, set(_ABSOLUTE) | set(_COMMON) | _DETUNING_KEYS | set(_BIPOLARITON), "system")
    common = {_COMMON[k]: (bool(v) if k == "exciton_broadening" else _number(v, f"system.{k}"))
              for k, v in block.items() if k in _COMMON}
    absolute = {k for k in block if k in _ABSOLUTE}
    detuning = {k for k in block if k in _DETUNING_KEYS}
    if absolute and detuning:
        raise ConfigError("system: give either absolute energies (e_*_mev) or detunings "
                          "(delta_*_mev), not both")
    try:
        if detuning:
            if "delta_cx_mev" in block and "delta_xc_mev" in block:
                raise ConfigError("system: delta_cx_mev and delta_xc_mev are mutually exclusive")
            if "delta_xc_mev" in block:
                delta_cx = -_number(block["delta_xc_mev"], "system.delta_xc_mev")
            else:
                delta_cx = _number(block.get("delta_cx_mev", 0.0), "system.delta_cx_mev")
            omega = {k: common.pop(k) for k in ("Omega_H", "Omega_V") if k in common}
            params = SystemParams.from_detunings(
                _number(block.get("delta_x_mev", 0.25), "system.delta_x_mev"),
                _number(block.get("delta_c_mev", 0.25), "system.delta_c_mev"),
                delta_cx,
                exciton_mean=_number(block.get("exciton_mean_mev", 0.0), "system.exciton_mean_mev"),
                **omega, **common)
        else:
            kw = {_ABSOLUTE[k]: _number(block[k], f"system.{k}") for k in absolute}
            params = SystemParams(**kw, **common)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc
    extra = {_BIPOLARITON[k]: _number(v, f"system.{k}") for k, v in block.items() if k in _BIPOLARITON}
    return params, extra


def _parse_axis(block, where: str) -> Axis:
    _check_keys(block, {"name", "min", "max", "steps"}, where)
    for k in ("name", "min", "max", "steps"):
        if k not in block:
            raise ConfigError(f"{where}: missing {k!r}")
    name = _AXIS_KEYS.get(block["name"], block["name"])
    if name not in AXIS_NAMES:
        raise ConfigError(f"{where}: unknown axis {block['name']!r}; choose from {sorted(_AXIS_KEYS)}")
    try:
        return Axis(name, _number(block["min"], where), _number(block["max"], where),
                    _int(block["steps"], f"{where}.steps"))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _width(value, where: str) -> float | None:
    if value is None:
        return None
    w = _number(value, where)
    if w <= 0:
        raise ConfigError(f"{where}: window width must be positive (null disables the window)")
    return w


def parse_config(data: dict | None) -> RunConfig:
    data = data or {}
    _check_keys(data, _TOP, "config")
    system, extra = _parse_system(data.get("system", {}) or {})
    try:
        bip = replace(BipolaritonParams.resonant(system), **extra)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc

    sp = data.get("spectrum", {}) or {}
    _check_keys(sp, {"points", "margin_fwhm"}, "spectrum")
    spectrum = SpectrumConfig(_int(sp.get("points", 4001), "spectrum.points"),
                              _number(sp.get("margin_fwhm", 12.0), "spectrum.margin_fwhm"))
    if spectrum.points < 2:
        raise ConfigError("spectrum.points: an empty grid was requested (need at least 2 points)")
    if spectrum.margin_fwhm <= 0:
        raise ConfigError("spectrum.margin_fwhm must be positive")

    mp = data.get("map", {}) or {}
    _check_keys(mp, {"axis1", "axis2", "window_width_mev", "objective"}, "map")
    objective = mp.get("objective", "gamma_prime_abs")
    if objective not in OBJECTIVES:
        raise ConfigError(f"map.objective must be one of {OBJECTIVES}")
    map_cfg = MapConfig(
        _parse_axis(mp["axis1"], "map.axis1") if mp.get("axis1") is not None else None,
        _parse_axis(mp["axis2"], "map.axis2") if mp.get("axis2") is not None else None,
        _width(mp.get("window_width_mev", 0.1), "map.window_width_mev"),
        objective)
    if map_cfg.axis1 and map_cfg.axis2 and map_cfg.axis1.name == map_cfg.axis2.name:
        raise ConfigError("map: the two axes must differ")

    op = data.get("optimize", {}) or {}
    _check_keys(op, {"free", "bounds", "grid", "window_width_mev"}, "optimize")
    free_raw = op.get("free", ["delta_c_mev", "delta_cx_mev"])
    if not isinstance(free_raw, list) or not free_raw or \
            any(f not in _FREE_KEYS for f in free_raw) or len(set(free_raw)) != len(free_raw):
        raise ConfigError(f"optimize.free must be a non-empty list drawn from {sorted(_FREE_KEYS)}")
    bounds = dict(DEFAULT_BOUNDS)
    braw = op.get("bounds", {}) or {}
    _check_keys(braw, set(_FREE_KEYS), "optimize.bounds")
    for k, v in braw.items():
        if not isinstance(v, list) or len(v) != 2:
            raise ConfigError(f"optimize.bounds.{k}: expected [min, max]")
        lo, hi = (_number(x, f"optimize.bounds.{k}") for x in v)
        if not lo < hi:
            raise ConfigError(f"optimize.bounds.{k}: min must be below max")
        bounds[_FREE_KEYS[k]] = (lo, hi)
    grid = _int(op.get("grid", 41), "optimize.grid")
    if grid < 2:
        raise ConfigError("optimize.grid: an empty grid was requested (need at least 2)")
    opt = OptimizeConfig(tuple(_FREE_KEYS[f] for f in free_raw), bounds, grid,
                         _width(op.get("window_width_mev", 0.1), "optimize.window_width_mev"))

    fs = data.get("filter_sweep", {}) or {}
    _check_keys(fs, {"widths_mev"}, "filter_sweep")
    widths_raw = fs.get("widths_mev", [])
    if not isinstance(widths_raw, list):
        raise ConfigError("filter_sweep.widths_mev: expected a list")
    widths = tuple(_number(w, "filter_sweep.widths_mev") for w in widths_raw)
    if any(w <= 0 for w in widths) or list(widths) != sorted(widths):
        raise ConfigError("filter_sweep.widths_mev: widths must be positive and ascending")

    bp = data.get("bipolariton", {}) or {}
    _check_keys(bp, {"tune", "grid", "linewidth_mix"}, "bipolariton")
    bip_cfg = BipolaritonConfig(bool(bp.get("tune", False)), _int(bp.get("grid", 21), "bipolariton.grid"),
                                _number(bp.get("linewidth_mix", 1.0), "bipolariton.linewidth_mix"))
    if bip_cfg.grid < 2:
        raise ConfigError("bipolariton.grid: an empty grid was requested (need at least 2)")

    tol = data.get("tolerance", {}) or {}
    _check_keys(tol, {"rel_tol"}, "tolerance")
    rel_tol = _number(tol.get("rel_tol", 1e-8), "tolerance.rel_tol")
    if not 0 < rel_tol < 1:
        raise ConfigError("tolerance.rel_tol must lie in (0, 1)")
    return RunConfig(system, bip, spectrum, map_cfg, opt, FilterSweepConfig(widths), bip_cfg, rel_tol)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
    return parse_config(data)


def _axis_dict(axis: Axis | None):
    if axis is None:
        return None
    inv = {v: k for k, v in _AXIS_KEYS.items()}
    return {"name": inv[axis.name], "min": axis.min, "max": axis.max, "steps": axis.steps}


def resolved(cfg: RunConfig) -> dict[str, Any]:
    """Fully expanded config; feeding it back to :func:`parse_config` reproduces ``cfg``."""
    s = cfg.system
    system: dict[str, Any] = {k: getattr(s, f) for k, f in {**_ABSOLUTE, **_COMMON}.items()}
    system.update({k: getattr(cfg.bipolariton_params, f) for k, f in _BIPOLARITON.items()})
    inv_free = {v: k for k, v in _FREE_KEYS.items()}
    return {
        "system": system,
        "spectrum": {"points": cfg.spectrum.points, "margin_fwhm": cfg.spectrum.margin_fwhm},
        "map": {"axis1": _axis_dict(cfg.map.axis1), "axis2": _axis_dict(cfg.map.axis2),
                "window_width_mev": cfg.map.window_width, "objective": cfg.map.objective},
        "optimize": {"free": [inv_free[f] for f in cfg.optimize.free],
                     "bounds": {inv_free[k]: list(v) for k, v in cfg.optimize.bounds.items()},
                     "grid": cfg.optimize.grid, "window_width_mev": cfg.optimize.window_width},
        "filter_sweep": {"widths_mev": list(cfg.filter_sweep.widths)},
        "bipolariton": {"tune": cfg.bipolariton.tune, "grid": cfg.bipolariton.grid,
                        "linewidth_mix": cfg.bipolariton.linewidth_mix},
        "tolerance": {"rel_tol": cfg.rel_tol},
    }
