"""Biexciton dressed by two extra cavity modes at the XX -> X transition.

Five bare configurations are coupled: the biexciton, an exciton plus one
transition photon per polarization, and two photons per polarization.  The
module builds the 5x5 coupling matrix, diagonalizes it with cyclic Jacobi
rotations and tunes the two transition cavities so that the H and V decay
paths out of the biexciton-like state look alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .cascade import build_channels
from .entanglement import select_degenerate_pair
from .model import UNITS, SystemParams, all_polaritons

BASIS = ("XX", "X_H+ph", "X_V+ph", "2ph_H", "2ph_V")
# swap of H and V labels in BASIS order
SWAP_PERMUTATION = (0, 2, 1, 4, 3)
# metrics below this (meV) are rounding residue and count as zero
METRIC_TOL = 1e-12


class BipolaritonError(RuntimeError):
    pass


@dataclass(frozen=True)
class BipolaritonParams(SystemParams):
    E_Cxx_H: float = 5.0 - 0.125
    E_Cxx_V: float = 5.0 + 0.125
    Omega_XX_H: float = 0.05
    Omega_XX_V: float = 0.05

    def __post_init__(self):
        super().__post_init__()
        if self.Omega_XX_H < 0 or self.Omega_XX_V < 0:
            raise ValueError("biexciton couplings must be non-negative")

    @classmethod
    def resonant(cls, base: SystemParams, Omega_XX_H: float = 0.05,
                 Omega_XX_V: float = 0.05) -> "BipolaritonParams":
        """Transition cavities tuned onto the bare XX -> X_H and XX -> X_V lines."""
        return cls(**base.as_dict(),
                   E_Cxx_H=base.E_XX - base.E_X_H, E_Cxx_V=base.E_XX - base.E_X_V,
                   Omega_XX_H=Omega_XX_H, Omega_XX_V=Omega_XX_V)

    def system(self) -> SystemParams:
        d = self.as_dict()
        for k in ("E_Cxx_H", "E_Cxx_V", "Omega_XX_H", "Omega_XX_V"):
            d.pop(k)
        return SystemParams(**d)

    def swapped(self) -> "BipolaritonParams":
        s = super().swapped()
        return replace(s, E_Cxx_H=self.E_Cxx_V, E_Cxx_V=self.E_Cxx_H,
                       Omega_XX_H=self.Omega_XX_V, Omega_XX_V=self.Omega_XX_H)


@dataclass(frozen=True)
class BipolaritonSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    asymmetry: float = float("nan")


def build_matrix(p: BipolaritonParams) -> np.ndarray:
    m = np.diag([
        p.E_XX,
        p.E_X_H + p.E_Cxx_H,
        p.E_X_V + p.E_Cxx_V,
        p.E_C_H + p.E_Cxx_H,
        p.E_C_V + p.E_Cxx_V,
    ]).astype(float)
    m[0, 1] = m[1, 0] = p.Omega_XX_H
    m[0, 2] = m[2, 0] = p.Omega_XX_V
    m[1, 3] = m[3, 1] = p.Omega_H
    m[2, 4] = m[4, 2] = p.Omega_V
    return m


def eigen_symmetric(m: np.ndarray, tol: float = 1e-12,
                    max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    as columns, each with its largest-magnitude component positive.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    target = tol * scale
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum((a - np.diag(np.diag(a))) ** 2))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                rot_p = a[:, p].copy()
                rot_q = a[:, q].copy()
                a[:, p] = c * rot_p - s * rot_q
                a[:, q] = s * rot_p + c * rot_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise BipolaritonError("Jacobi iteration did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w, v = w[order], v[:, order]
    for j in range(n):
        k = int(np.argmax(np.abs(v[:, j])))
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
    return w, v


def diagonalize(p: BipolaritonParams) -> BipolaritonSpectrum:
    w, v = eigen_symmetric(build_matrix(p))
    return BipolaritonSpectrum(w, v)


def initial_state(spec: BipolaritonSpectrum) -> int:
    """Index of the dressed state with the largest biexciton weight."""
    xx = spec.eigenvectors[0, :] ** 2
    idx = int(np.argmax(xx))
    if xx[idx] < 0.2:
        raise BipolaritonError("biexciton character diluted: no eigenstate has "
                               f"more than 20% biexciton weight (max {xx[idx]:.3f})")
    return idx


def transition_asymmetry(spec: BipolaritonSpectrum, p: BipolaritonParams,
                         polariton_targets: tuple[str, str] | str = "auto",
                         linewidth_mix: float = 1.0, initial: int | None = None) -> float:
    """Mismatch between the H and V first-photon transitions (meV).

    The transition energies run from the biexciton-like dressed state to
    the H and V polariton targets; the effective widths are the state's
    transition-photon content per polarization times hbar/tau_C.
    """
    i = initial_state(spec) if initial is None else initial
    vec = spec.eigenvectors[:, i]
    lam = spec.eigenvalues[i]
    base = p.system()
    if polariton_targets == "auto":
        pair = select_degenerate_pair(build_channels(base))
        e_h, e_v = pair.channel_H.state.energy, pair.channel_V.state.energy
    else:
        states = all_polaritons(base)
        bh, bv = polariton_targets
        e_h, e_v = states[("H", bh)].energy, states[("V", bv)].energy
    width_c = UNITS.rate_to_width(p.tau_C)
    gamma_h = (vec[1] ** 2 + vec[3] ** 2) * width_c
    gamma_v = (vec[2] ** 2 + vec[4] ** 2) * width_c
    return abs((lam - e_h) - (lam - e_v)) + linewidth_mix * abs(gamma_h - gamma_v)


def spectrum_with_asymmetry(p: BipolaritonParams, **kwargs) -> BipolaritonSpectrum:
    spec = diagonalize(p)
    return replace(spec, asymmetry=transition_asymmetry(spec, p, **kwargs))


@dataclass(frozen=True)
class TuningResult:
    E_Cxx_H: float
    E_Cxx_V: float
    metric: float
    grid_metric: float
    params: BipolaritonParams


def tune_symmetric(p: BipolaritonParams, bounds: tuple[tuple[float, float], tuple[float, float]]
                   | None = None, grid: int = 21, **kwargs) -> TuningResult:
    """Grid search plus Nelder-Mead over (E_Cxx_H, E_Cxx_V) minimizing the asymmetry.

    Default bounds are +-0.5 meV around the current values.  A start whose
    metric is already below :data:`METRIC_TOL` is returned unchanged; a grid
    cell replaces the incumbent only if it improves by more than that, so
    ties go to the start, then the first cell in row-major order.
    """
    if bounds is None:
        bounds = ((p.E_Cxx_H - 0.5, p.E_Cxx_H + 0.5), (p.E_Cxx_V - 0.5, p.E_Cxx_V + 0.5))
    (h0, h1), (v0, v1) = bounds
    if not (h0 < h1 and v0 < v1 and all(map(math.isfinite, (h0, h1, v0, v1)))):
        raise ValueError("bounds must be finite and ordered")

    def metric(x):
        q = replace(p, E_Cxx_H=float(x[0]), E_Cxx_V=float(x[1]))
        return transition_asymmetry(diagonalize(q), q, **kwargs)

    start = metric((p.E_Cxx_H, p.E_Cxx_V)) if h0 <= p.E_Cxx_H <= h1 and v0 <= p.E_Cxx_V <= v1 \
        else math.inf
    if start <= METRIC_TOL:
        return TuningResult(p.E_Cxx_H, p.E_Cxx_V, start, start, p)
    best = (start, p.E_Cxx_H, p.E_Cxx_V)
    for eh in np.linspace(h0, h1, grid):
        for ev in np.linspace(v0, v1, grid):
            m = metric((eh, ev))
            if m < best[0] - METRIC_TOL:
                best = (m, float(eh), float(ev))
    grid_metric, eh, ev = best
    if grid_metric > METRIC_TOL:
        res = minimize(lambda x: metric(np.clip(x, (h0, v0), (h1, v1))), x0=[eh, ev],
                       method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000,
                                "initial_simplex": [[eh, ev], [eh + (h1 - h0) / grid, ev],
                                                    [eh, ev + (v1 - v0) / grid]]})
        x = np.clip(res.x, (h0, v0), (h1, v1))
        if res.fun < grid_metric:
            eh, ev = float(x[0]), float(x[1])
    final = metric((eh, ev))
    tuned = replace(p, E_Cxx_H=eh, E_Cxx_V=ev)
    return TuningResult(eh, ev, final, grid_metric, tuned)
