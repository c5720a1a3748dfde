"""Parameter sweeps and detuning optimization of the entanglement degree."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .cascade import CascadeError
from .entanglement import NoFluxError, analyze
from .model import ParameterError, SystemParams, derived_detunings
from .quadrature import QuadratureError

AXIS_NAMES = ("delta_CX", "delta_C", "Omega_H", "Omega_V", "window_width")
OBJECTIVES = ("gamma_prime_abs", "qe", "both")
DEFAULT_BOUNDS = {"delta_C": (0.0, 0.6), "delta_CX": (-0.5, 0.5)}


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown sweep parameter {self.name!r}; choose from {AXIS_NAMES}")
        if self.steps < 2:
            raise ValueError("an axis needs at least two steps")
        if not self.min < self.max:
            raise ValueError("axis min must be below max")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis | None = None
    fixed: SystemParams = field(default_factory=SystemParams)
    window_width: float | None = 0.1
    objective: str = "gamma_prime_abs"
    pair_mode: str | tuple[str, str] = "auto"
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("the two axes must sweep different parameters")


@dataclass(frozen=True)
class CellRecord:
    values: tuple[float, ...]
    gamma_abs: float
    qe: float
    pair: str
    converged: bool
    error: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list[CellRecord]

    @property
    def shape(self) -> tuple[int, int]:
        n2 = self.spec.axis2.steps if self.spec.axis2 is not None else 1
        return (self.spec.axis1.steps, n2)

    def grid(self, quantity: str = "gamma_abs") -> np.ndarray:
        return np.array([getattr(r, quantity) for r in self.records]).reshape(self.shape)

    def best(self) -> CellRecord:
        """Converged cell with the largest objective (first one on ties)."""
        ok = [r for r in self.records if r.converged]
        if not ok:
            raise RuntimeError("every cell of the sweep failed")
        key = _objective_key(self.spec.objective)
        return max(ok, key=key)


def _objective_key(objective: str):
    if objective == "gamma_prime_abs":
        return lambda r: r.gamma_abs
    if objective == "qe":
        return lambda r: r.qe
    return lambda r: r.gamma_abs * r.qe


def apply_parameter(params: SystemParams, width: float | None, name: str,
                    value: float) -> tuple[SystemParams, float | None]:
    """Set one sweep parameter.  Cavity detunings keep the other detuning fixed."""
    if name == "delta_CX":
        return params.with_detunings(delta_CX=value), width
    if name == "delta_C":
        return params.with_detunings(delta_C=value), width
    if name in ("Omega_H", "Omega_V"):
        return replace(params, **{name: value}), width
    if name == "window_width":
        return params, value
    raise ValueError(f"unknown sweep parameter {name!r}")


def evaluate_cell(params: SystemParams, window_width: float | None,
                  pair_mode="auto", rel_tol: float = 1e-8,
                  values: tuple[float, ...] = ()) -> CellRecord:
    """|gamma'| and QE of one configuration; physics failures are recorded, not raised."""
    try:
        a = analyze(params, window_width, pair_mode, rel_tol=rel_tol)
    except (QuadratureError, NoFluxError, CascadeError, ParameterError) as exc:
        return CellRecord(values, math.nan, math.nan, "", False, f"{type(exc).__name__}: {exc}")
    return CellRecord(values, a.gamma_abs, a.quantum_efficiency, a.pair.label, True)


def _cell_job(job):
    return evaluate_cell(*job)


def _map(jobs: list, threads: int) -> list[CellRecord]:
    if threads <= 1 or len(jobs) < 2:
        return [_cell_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # map preserves submission order, so the result is row-major regardless
        return list(pool.map(_cell_job, jobs, chunksize=max(1, len(jobs) // (8 * threads))))


def sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Evaluate every grid cell in row-major order (axis1 outer)."""
    jobs = []
    axes2 = spec.axis2.values if spec.axis2 is not None else [None]
    for v1 in spec.axis1.values:
        for v2 in axes2:
            p, w = apply_parameter(spec.fixed, spec.window_width, spec.axis1.name, float(v1))
            vals = (float(v1),)
            if v2 is not None:
                p, w = apply_parameter(p, w, spec.axis2.name, float(v2))
                vals = (float(v1), float(v2))
            jobs.append((p, w, spec.pair_mode, spec.rel_tol, vals))
    return SweepResult(spec, _map(jobs, threads))


def local_maxima(profile: Sequence[float]) -> list[int]:
    """Indices of strict interior local maxima, NaNs ignored."""
    y = np.asarray(profile, dtype=float)
    out = []
    for i in range(1, y.size - 1):
        if np.isnan(y[i - 1:i + 2]).any():
            continue
        if y[i] > y[i - 1] and y[i] > y[i + 1]:
            out.append(i)
    return out


@dataclass(frozen=True)
class OptimumResult:
    params: SystemParams
    delta_C: float
    delta_CX: float
    gamma_abs: float
    qe: float
    pair: str
    grid_gamma_abs: float
    refined: bool


def optimize_gamma(params: SystemParams, free: Iterable[str] = ("delta_C", "delta_CX"),
                   bounds: dict | None = None, window_width: float | None = 0.1,
                   grid: int = 41, pair_mode="auto", rel_tol: float = 1e-8,
                   threads: int = 1) -> OptimumResult:
    """Maximize |gamma'| over the cavity detunings.

    A ``grid``-point coarse scan per free axis is followed by Nelder-Mead
    from the best cell.  Grid ties go to the smallest |delta_C|, then to the
    first cell in row-major order.  The refined point is kept only if it
    beats the grid.
    """
    free = tuple(free)
    if not free or any(f not in DEFAULT_BOUNDS for f in free) or len(set(free)) != len(free):
        raise ValueError("free must be a non-empty subset of {'delta_C', 'delta_CX'}")
    b = dict(DEFAULT_BOUNDS)
    b.update(bounds or {})
    lo = np.array([b[f][0] for f in free], dtype=float)
    hi = np.array([b[f][1] for f in free], dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
        raise ValueError("bounds must be finite and ordered")

    def configure(x) -> SystemParams:
        kw = {f: float(v) for f, v in zip(free, x)}
        return params.with_detunings(**kw)

    axes = [np.linspace(l, h, grid) for l, h in zip(lo, hi)]
    points = [tuple(x) for x in np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(free), -1).T]
    jobs = [(configure(x), window_width, pair_mode, rel_tol, x) for x in points]
    records = _map(jobs, threads)
    ok = [r for r in records if r.converged]
    if not ok:
        raise RuntimeError("optimization failed: every grid cell errored")

    def dc_of(r: CellRecord) -> float:
        return derived_detunings(configure(r.values)).delta_C

    best = min(ok, key=lambda r: (-r.gamma_abs, abs(dc_of(r))))

    def objective(x):
        xc = np.clip(x, lo, hi)
        rec = evaluate_cell(configure(xc), window_width, pair_mode, rel_tol)
        return -rec.gamma_abs if rec.converged else 0.0

    step = (hi - lo) / (grid - 1)
    x0 = np.array(best.values)
    simplex = [x0] + [x0 + np.eye(len(free))[i] * step[i] for i in range(len(free))]
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"initial_simplex": np.array(simplex), "xatol": 1e-6,
                            "fatol": 1e-9, "maxiter": 400})
    x_best, refined = x0, False
    if -res.fun > best.gamma_abs:
        x_best, refined = np.clip(res.x, lo, hi), True
    final_params = configure(x_best)
    final = evaluate_cell(final_params, window_width, pair_mode, rel_tol)
    if not final.converged or final.gamma_abs < best.gamma_abs:
        final_params, final, refined = configure(x0), best, False
    d = derived_detunings(final_params)
    return OptimumResult(final_params, d.delta_C, d.delta_CX, final.gamma_abs, final.qe,
                         final.pair, best.gamma_abs, refined)


@dataclass(frozen=True)
class FilterRecord:
    width: float
    gamma_abs: float
    qe: float
    converged: bool
    error: str | None = None


def filter_sweep(params: SystemParams, widths: Sequence[float], pair_mode="auto",
                 rel_tol: float = 1e-8) -> list[FilterRecord]:
    """|gamma'| and quantum efficiency versus the width of both windows."""
    widths = [float(w) for w in widths]
    if any(not w > 0 for w in widths):
        raise ValueError("widths must be positive")
    if widths != sorted(widths):
        raise ValueError("widths must be sorted ascending")
    out = []
    for w in widths:
        r = evaluate_cell(params, w, pair_mode, rel_tol)
        out.append(FilterRecord(w, r.gamma_abs, r.qe, r.converged, r.error))
    return out


def unwindowed_gamma(params: SystemParams, pair_mode="auto") -> float:
    """|gamma'| with the whole emission lines detected (no spectral window)."""
    return analyze(params, None, pair_mode).gamma_abs
