"""Two-photon amplitudes of the biexciton -> polariton -> ground cascade.

For a channel (polarization, branch) the second-order amplitude is

    A(k1, k2) = x_ex sqrt(G_XX) x_ph sqrt(G_P) / (2 pi)
                / ((k1 + k2 - eps_XX) (k2 - eps_P)),    eps = E + i G / 2,

with k1 the photon of the biexciton -> polariton step and k2 the photon of
the polariton -> ground step.  Over the full plane its squared norm is
x_ex^2 x_ph^2, which fixes the relative channel weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .model import BRANCHES, POLARIZATIONS, PolaritonState, SystemParams, all_polaritons
from .quadrature import (IntegrationResult, integrate_1d, integrate_2d, integrate_plane,
                         overlap_closed_form)

if TYPE_CHECKING:  # pragma: no cover
    from .entanglement import SpectralWindow


class CascadeError(RuntimeError):
    """Physically degenerate cascade (e.g. no emitting channel)."""


@dataclass(frozen=True)
class ComplexEnergy:
    center: float
    halfwidth: float

    def __post_init__(self):
        if not self.halfwidth > 0:
            raise ValueError("halfwidth must be positive")

    @classmethod
    def from_linewidth(cls, center: float, linewidth: float) -> "ComplexEnergy":
        return cls(center, 0.5 * linewidth)

    @property
    def value(self) -> complex:
        return complex(self.center, self.halfwidth)


@dataclass(frozen=True)
class DecayChannel:
    polarization: str
    branch: str
    state: PolaritonState
    E_XX: float
    Gamma_XX: float
    weight: float = 0.0
    # 1 / sqrt(sum of raw full norms); maps raw amplitudes onto weighted ones
    norm_scale: float = 1.0

    @property
    def label(self) -> str:
        return f"{self.branch}_{self.polarization}"

    @property
    def is_dark(self) -> bool:
        return self.state.is_dark

    @property
    def raw_prefactor(self) -> float:
        s = self.state
        if self.is_dark:
            return 0.0
        return s.x_ex * math.sqrt(self.Gamma_XX) * s.x_ph * math.sqrt(s.linewidth) / (2 * math.pi)

    @property
    def prefactor(self) -> float:
        return self.raw_prefactor * self.norm_scale

    @property
    def eps_xx(self) -> complex:
        return ComplexEnergy.from_linewidth(self.E_XX, self.Gamma_XX).value

    @property
    def eps_p(self) -> complex:
        return ComplexEnergy.from_linewidth(self.state.energy, self.state.linewidth).value

    @property
    def raw_full_norm(self) -> float:
        """Closed-form full-plane norm of the unweighted amplitude."""
        if self.is_dark:
            return 0.0
        return (self.state.x_ex * self.state.x_ph) ** 2


def two_photon_amplitude(k1, k2, prefactor: complex, eps_xx: complex, eps_p: complex):
    """Bare pole structure of the cascade amplitude, vectorized over k1, k2."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    return prefactor / ((k1 + k2 - eps_xx) * (k2 - eps_p))


def channel_amplitude(ch: DecayChannel, k1, k2, weighted: bool = True):
    """Amplitude of one channel; ``weighted`` folds in the global normalization,
    so that the full-plane norm equals ``ch.weight ** 2``."""
    pref = ch.prefactor if weighted else ch.raw_prefactor
    if pref == 0.0:
        return np.zeros(np.broadcast(np.asarray(k1), np.asarray(k2)).shape, dtype=complex)
    return two_photon_amplitude(k1, k2, pref, ch.eps_xx, ch.eps_p)


def build_channels(params: SystemParams) -> tuple[DecayChannel, ...]:
    """The four weighted channels in order H_LP, H_UP, V_LP, V_UP."""
    states = all_polaritons(params)
    raw = [DecayChannel(pol, br, states[(pol, br)], params.E_XX, params.Gamma_XX)
           for pol in POLARIZATIONS for br in BRANCHES]
    return channel_weights(raw)


def channel_weights(channels: Sequence[DecayChannel]) -> tuple[DecayChannel, ...]:
    """Normalize the channel weights so that their squares sum to one."""
    if len(channels) != 4 or {(c.polarization, c.branch) for c in channels} != {
            (p, b) for p in POLARIZATIONS for b in BRANCHES}:
        raise ValueError("expected one channel per polarization and branch")
    norms = [c.raw_full_norm for c in channels]
    total = math.fsum(norms)
    if not total > 0:
        raise CascadeError("no radiative channel: every polariton is dark")
    scale = 1.0 / math.sqrt(total)
    return tuple(replace(c, weight=math.sqrt(n / total), norm_scale=scale)
                 for c, n in zip(channels, norms))


def _window_bounds(window) -> tuple[float, float, float, float]:
    h = 0.5 * window.width
    return (window.center_k1 - h, window.center_k1 + h,
            window.center_k2 - h, window.center_k2 + h)


def _segment_integral(u_lo, u_hi, p: complex, q: complex):
    """Integral of 1 / ((u - p)(u - q)) du over real [u_lo, u_hi], p and q off axis.

    Each log ratio has numerator and denominator in the same open half
    plane, so the principal branch is exact.
    """
    lq = np.log((u_hi - q) / (u_lo - q))
    lp = np.log((u_hi - p) / (u_lo - p))
    return (lq - lp) / (q - p)


def _overlap_iterated(a: DecayChannel, b: DecayChannel, window, rel_tol, abs_tol):
    k1_lo, k1_hi, k2_lo, k2_hi = _window_bounds(window)
    p = np.conj(a.eps_xx)
    q = b.eps_xx
    pa = np.conj(a.eps_p)
    pb = b.eps_p
    pref = a.prefactor * b.prefactor

    def integrand(k2):
        s = _segment_integral(k2 + k1_lo, k2 + k1_hi, p, q)
        return s / ((k2 - pa) * (k2 - pb))

    e_xx = 0.5 * (a.E_XX + b.E_XX)
    points = [a.state.energy, b.state.energy, e_xx - k1_lo, e_xx - k1_hi]
    res = integrate_1d(integrand, k2_lo, k2_hi, points=points,
                       rel_tol=rel_tol, abs_tol=abs_tol / max(abs(pref), 1e-300))
    return res.scaled(pref)


def _overlap_cubature(a: DecayChannel, b: DecayChannel, window, rel_tol, abs_tol):
    k1_lo, k1_hi, k2_lo, k2_hi = _window_bounds(window)

    def integrand(k1, k2):
        return np.conj(channel_amplitude(a, k1, k2)) * channel_amplitude(b, k1, k2)

    return integrate_2d(integrand, (k1_lo, k1_hi, k2_lo, k2_hi), rel_tol, abs_tol,
                        x_points=[a.E_XX - a.state.energy, b.E_XX - b.state.energy],
                        y_points=[a.state.energy, b.state.energy], max_regions=200000)


def _overlap_full_quadrature(a: DecayChannel, b: DecayChannel, rel_tol, abs_tol):
    pa, pb = np.conj(a.eps_p), b.eps_p
    xa, xb = np.conj(a.eps_xx), b.eps_xx
    pref = a.prefactor * b.prefactor

    def integrand(s, k2):
        return 1.0 / ((s - xa) * (s - xb) * (k2 - pa) * (k2 - pb))

    s_center = 0.5 * (a.E_XX + b.E_XX)
    s_scale = 0.5 * min(a.Gamma_XX, b.Gamma_XX)
    k_center = 0.5 * (a.state.energy + b.state.energy)
    k_scale = 0.5 * max(a.state.linewidth, b.state.linewidth)
    res = integrate_plane(integrand, (s_center, k_center), (s_scale, k_scale),
                          rel_tol=rel_tol, abs_tol=abs_tol / max(abs(pref), 1e-300))
    return res.scaled(pref)


def channel_overlap(a: DecayChannel, b: DecayChannel, window: "SpectralWindow | None" = None,
                    method: str = "auto", rel_tol: float = 1e-8,
                    abs_tol: float = 1e-14) -> IntegrationResult:
    """Integral of conj(A_a) W A_b over the two-photon plane (weighted amplitudes).

    ``window=None`` means no spectral window (the full plane).  Methods:

    * ``"closed"``: residue closed form, full plane only;
    * ``"quadrature"``: compactified adaptive cubature, full plane only;
    * ``"iterated"``: k1 integrated analytically, k2 adaptively (windows);
    * ``"cubature"``: adaptive 2D cubature directly in (k1, k2) (windows);
    * ``"auto"``: ``closed`` without a window, ``iterated`` with one.
    """
    if a.is_dark or b.is_dark:
        return IntegrationResult(0.0, 0.0, 0, True)
    if method == "auto":
        method = "closed" if window is None else "iterated"
    if window is None:
        if method == "closed":
            value = overlap_closed_form(a.eps_xx, a.eps_p, b.eps_xx, b.eps_p,
                                        a.prefactor, b.prefactor)
            return IntegrationResult(value, 0.0, 0, True)
        if method == "quadrature":
            return _overlap_full_quadrature(a, b, rel_tol, abs_tol)
        raise ValueError(f"method {method!r} needs a spectral window")
    if window.width == 0:
        return IntegrationResult(0.0, 0.0, 0, True)
    if method == "iterated":
        return _overlap_iterated(a, b, window, rel_tol, abs_tol)
    if method == "cubature":
        return _overlap_cubature(a, b, window, rel_tol, abs_tol)
    raise ValueError(f"unknown method {method!r}")


def channel_norm(ch: DecayChannel, window: "SpectralWindow | None" = None,
                 method: str = "auto", rel_tol: float = 1e-8, abs_tol: float = 1e-14) -> float:
    """Windowed squared norm of a weighted channel amplitude.

    Raises :class:`~qdcascade.quadrature.QuadratureError` if the integral did
    not converge.
    """
    res = channel_overlap(ch, ch, window, method, rel_tol, abs_tol).require("channel norm")
    return max(res.value.real, 0.0)


# -- spectra ---------------------------------------------------------------

XX_TO_P = "XX->P"
P_TO_GROUND = "P->G"


@dataclass(frozen=True)
class SpectrumLine:
    kind: str
    polarization: str
    branch: str
    center: float
    fwhm: float
    integrated_weight: float


def line_table(channels: Iterable[DecayChannel]) -> list[SpectrumLine]:
    """Analytic centers, widths and weights of the eight emission lines."""
    lines = []
    for ch in channels:
        w2 = ch.weight ** 2
        g_p = ch.state.linewidth
        lines.append(SpectrumLine(XX_TO_P, ch.polarization, ch.branch,
                                  ch.E_XX - ch.state.energy, ch.Gamma_XX + g_p, w2))
        lines.append(SpectrumLine(P_TO_GROUND, ch.polarization, ch.branch,
                                  ch.state.energy, g_p, w2))
    return lines


def marginal_k1(ch: DecayChannel, k1, weighted: bool = True):
    """Biexciton-line intensity: integral of |A|^2 over k2, in closed form.

    The convolution of the two Lorentzian factors is a Lorentzian of FWHM
    G_XX + G_P centered at E_XX - E_P.
    """
    k1 = np.asarray(k1, dtype=float)
    if ch.is_dark:
        return np.zeros_like(k1)
    norm = ch.weight ** 2 if weighted else 1.0
    hw = 0.5 * (ch.Gamma_XX + ch.state.linewidth)
    d = k1 - (ch.E_XX - ch.state.energy)
    return norm * hw / (math.pi * (d * d + hw * hw))


def marginal_k2(ch: DecayChannel, k2, weighted: bool = True):
    """Polariton-line intensity: integral of |A|^2 over k1, in closed form."""
    k2 = np.asarray(k2, dtype=float)
    if ch.is_dark:
        return np.zeros_like(k2)
    norm = ch.weight ** 2 if weighted else 1.0
    hw = 0.5 * ch.state.linewidth
    d = k2 - ch.state.energy
    return norm * hw / (math.pi * (d * d + hw * hw))


@dataclass
class SpectrumResult:
    energy: np.ndarray
    intensity_H: np.ndarray
    intensity_V: np.ndarray
    # per-line curves keyed "kind:pol:branch"; weighted and unit-area versions
    components: dict = field(default_factory=dict)
    raw_components: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def pl_spectrum(channels: Sequence[DecayChannel], axis) -> SpectrumResult:
    """Photoluminescence spectrum on an energy grid.

    Both transitions of every channel are included; the polarization totals
    are weight-scaled so each transition family integrates to one.
    """
    energy = np.asarray(axis, dtype=float)
    if energy.ndim != 1 or energy.size < 2:
        raise ValueError("energy axis needs at least two points")
    if np.any(np.diff(energy) <= 0):
        raise ValueError("energy axis must be strictly increasing")
    totals = {pol: np.zeros_like(energy) for pol in POLARIZATIONS}
    result = SpectrumResult(energy, totals["H"], totals["V"])
    lo, hi = energy[0], energy[-1]
    for ch in channels:
        for kind, fn in ((XX_TO_P, marginal_k1), (P_TO_GROUND, marginal_k2)):
            key = f"{kind}:{ch.polarization}:{ch.branch}"
            curve = fn(ch, energy)
            result.components[key] = curve
            result.raw_components[key] = fn(ch, energy, weighted=False)
            totals[ch.polarization] += curve
    for line in line_table(channels):
        if line.integrated_weight == 0:
            continue
        if line.center - 10 * line.fwhm < lo or line.center + 10 * line.fwhm > hi:
            result.warnings.append(
                f"{line.kind} {line.branch}_{line.polarization} line at {line.center:.6g} meV "
                f"(FWHM {line.fwhm:.3g}) is not covered to +-10 FWHM by the grid")
    return result


def default_spectrum_axis(channels: Sequence[DecayChannel], points: int = 4001,
                          margin_fwhm: float = 12.0) -> tuple[np.ndarray, np.ndarray]:
    """Two grids, one around the polariton lines and one around the biexciton lines."""
    lines = [l for l in line_table(channels) if l.integrated_weight > 0]
    out = []
    for kind in (P_TO_GROUND, XX_TO_P):
        sel = [l for l in lines if l.kind == kind]
        lo = min(l.center - margin_fwhm * l.fwhm for l in sel)
        hi = max(l.center + margin_fwhm * l.fwhm for l in sel)
        out.append(np.linspace(lo, hi, points))
    return out[0], out[1]
