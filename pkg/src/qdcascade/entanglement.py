"""Filtered two-photon density matrix, entanglement degree and efficiency.

Only the |HH> and |VV> sectors are populated, so the density matrix is an
x-state and the concurrence is twice the modulus of its HH-VV coherence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cascade import (DecayChannel, build_channels, channel_norm, channel_overlap)
from .model import SystemParams
from .quadrature import QuadratureError

#: preference order among H/V pairings with equal energy mismatch
PAIR_ORDER = (("LP", "UP"), ("LP", "LP"), ("UP", "UP"), ("UP", "LP"))
_TIE_TOL = 1e-12


class NoFluxError(RuntimeError):
    """Neither paired channel sends light through the spectral window."""


@dataclass(frozen=True)
class SpectralWindow:
    """Product of two top-hat filters of equal full width.

    ``center_k1`` filters the biexciton-line photon, ``center_k2`` the
    polariton-line photon.
    """

    center_k1: float
    center_k2: float
    width: float

    def __post_init__(self):
        if not self.width >= 0:
            raise ValueError("window width must be non-negative")

    def __call__(self, k1, k2):
        h = 0.5 * self.width
        inside = (np.abs(np.asarray(k1) - self.center_k1) <= h) & \
                 (np.abs(np.asarray(k2) - self.center_k2) <= h)
        return inside.astype(float)

    def shifted(self, delta: float) -> "SpectralWindow":
        # a global shift moves E_P and E_XX together; E_XX - E_P is unchanged
        return SpectralWindow(self.center_k1, self.center_k2 + delta, self.width)


@dataclass(frozen=True)
class DegeneratePair:
    channel_H: DecayChannel
    channel_V: DecayChannel
    energy_mismatch: float

    def __post_init__(self):
        if self.channel_H.polarization != "H" or self.channel_V.polarization != "V":
            raise ValueError("pair needs one H and one V channel")

    @property
    def label(self) -> str:
        return f"{self.channel_H.label}/{self.channel_V.label}"


@dataclass(frozen=True)
class TwoPhotonDensityMatrix:
    rho: np.ndarray
    gamma_prime: complex
    concurrence: float
    quantum_efficiency: float
    # unfiltered populations of |HH> and |VV>, for reference
    unfiltered_populations: tuple[float, float] = (0.0, 0.0)

    @property
    def gamma_abs(self) -> float:
        return abs(self.gamma_prime)


def _by_label(channels: Sequence[DecayChannel]) -> dict[tuple[str, str], DecayChannel]:
    return {(c.polarization, c.branch): c for c in channels}


def select_degenerate_pair(channels: Sequence[DecayChannel],
                           mode: str | tuple[str, str] = "auto") -> DegeneratePair:
    """Pick the H- and V-polarized intermediate states used for the coherence.

    ``mode="auto"`` returns the pairing with the smallest energy mismatch,
    ties resolved in :data:`PAIR_ORDER`; a ``(branch_H, branch_V)`` tuple
    selects a pairing explicitly.
    """
    chans = _by_label(channels)

    def make(bh, bv):
        h, v = chans[("H", bh)], chans[("V", bv)]
        return DegeneratePair(h, v, abs(h.state.energy - v.state.energy))

    if mode != "auto":
        bh, bv = mode
        return make(bh, bv)
    candidates = [make(bh, bv) for bh, bv in PAIR_ORDER]
    best = min(c.energy_mismatch for c in candidates)
    for c in candidates:
        if c.energy_mismatch <= best + _TIE_TOL:
            return c
    raise AssertionError("unreachable")


def default_window(pair: DegeneratePair, width: float) -> SpectralWindow:
    center_k2 = 0.5 * (pair.channel_H.state.energy + pair.channel_V.state.energy)
    center_k1 = pair.channel_H.E_XX - center_k2
    return SpectralWindow(center_k1, center_k2, width)


def gamma_prime(pair: DegeneratePair, window: SpectralWindow | None,
                method: str = "auto", rel_tol: float = 1e-8, abs_tol: float = 1e-14) -> complex:
    """HH-VV coherence of the filtered pair: the windowed overlap divided by
    the sum of the two windowed norms.  ``window=None`` uses the full plane."""
    a, b = pair.channel_H, pair.channel_V
    num = channel_overlap(a, b, window, method, rel_tol, abs_tol).require("overlap")
    den = (channel_norm(a, window, method, rel_tol, abs_tol)
           + channel_norm(b, window, method, rel_tol, abs_tol))
    if den < 1e-300:
        raise NoFluxError("no flux in window")
    return num.value / den


def quantum_efficiency(channels: Sequence[DecayChannel], window: SpectralWindow | None,
                       method: str = "auto", rel_tol: float = 1e-8,
                       abs_tol: float = 1e-14) -> float:
    """Fraction of all emitted pairs (every channel) detected through ``window``."""
    if window is None:
        return 1.0
    detected = math.fsum(channel_norm(c, window, method, rel_tol, abs_tol) for c in channels)
    emitted = math.fsum(c.weight ** 2 for c in channels)
    return min(max(detected / emitted, 0.0), 1.0)


def density_matrix(channels: Sequence[DecayChannel], pair: DegeneratePair,
                   window: SpectralWindow | None, method: str = "auto",
                   rel_tol: float = 1e-8, abs_tol: float = 1e-14) -> TwoPhotonDensityMatrix:
    """Filtered density matrix in the basis (HH, HV, VH, VV).

    Populations are the windowed norms of the two paired channels,
    renormalized to unit trace; this is the normalization that the
    coherence uses, which keeps the matrix positive semidefinite.
    """
    a, b = pair.channel_H, pair.channel_V
    num = channel_overlap(a, b, window, method, rel_tol, abs_tol).require("overlap")
    na = channel_norm(a, window, method, rel_tol, abs_tol)
    nb = channel_norm(b, window, method, rel_tol, abs_tol)
    den = na + nb
    if den < 1e-300:
        raise NoFluxError("no flux in window")
    g = num.value / den
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = na / den
    rho[3, 3] = nb / den
    rho[0, 3] = g
    rho[3, 0] = np.conj(g)
    chans = _by_label(channels)
    pops = (chans[("H", "LP")].weight ** 2 + chans[("H", "UP")].weight ** 2,
            chans[("V", "LP")].weight ** 2 + chans[("V", "UP")].weight ** 2)
    qe = quantum_efficiency(channels, window, method, rel_tol, abs_tol)
    return TwoPhotonDensityMatrix(rho, complex(g), 2.0 * abs(g), qe, pops)


def wootters_concurrence(rho: np.ndarray) -> float:
    """Concurrence of a general two-qubit density matrix.

    The lambdas are the singular values of sqrt(rho) Y sqrt(rho)*, which
    avoids square roots of the tiny eigenvalues of rho rho~ near purity.
    """
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    lam = np.linalg.svd(root @ yy @ root.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


@dataclass(frozen=True)
class PeresVerdict:
    entangled: bool
    magnitude: float

    @property
    def label(self) -> str:
        return "entangled" if self.entangled else "separable"


def peres_verdict(gamma: complex, threshold: float = 1e-3) -> PeresVerdict:
    mag = abs(gamma)
    return PeresVerdict(mag > threshold, mag)


@dataclass(frozen=True)
class Analysis:
    """Everything computed for one parameter set and window width."""

    params: SystemParams
    channels: tuple[DecayChannel, ...]
    pair: DegeneratePair
    window: SpectralWindow | None
    density: TwoPhotonDensityMatrix

    @property
    def gamma_abs(self) -> float:
        return self.density.gamma_abs

    @property
    def quantum_efficiency(self) -> float:
        return self.density.quantum_efficiency


def analyze(params: SystemParams, window_width: float | None = 0.1,
            pair_mode: str | tuple[str, str] = "auto", method: str = "auto",
            rel_tol: float = 1e-8, abs_tol: float = 1e-14) -> Analysis:
    """Channels, pair, window and density matrix for ``params``.

    ``window_width=None`` evaluates without spectral filtering.
    """
    channels = build_channels(params)
    pair = select_degenerate_pair(channels, pair_mode)
    window = None if window_width is None else default_window(pair, window_width)
    rho = density_matrix(channels, pair, window, method, rel_tol, abs_tol)
    return Analysis(params, channels, pair, window, rho)


__all__ = [
    "Analysis", "DegeneratePair", "NoFluxError", "PeresVerdict", "QuadratureError",
    "SpectralWindow", "TwoPhotonDensityMatrix", "analyze", "default_window",
    "density_matrix", "gamma_prime", "peres_verdict", "quantum_efficiency",
    "select_degenerate_pair", "wootters_concurrence",
]
