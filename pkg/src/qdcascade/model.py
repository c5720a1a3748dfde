"""Strong-coupling eigenstructure of a quantum dot in a two-mode cavity.

Each polarization (H, V) has one exciton resonance coupled to one cavity
mode.  The 2x2 problem per polarization gives a lower (LP) and an upper (UP)
polariton with Hopfield coefficients and a radiative linewidth set by the
photon fraction.

Energies are offsets in meV from the mean bare-exciton energy; lifetimes are
in ps.  ``Omega_*`` are coupling energies (the off-diagonal of the 2x2
matrix), so the branches split by ``2 * Omega`` at resonance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace

#: hbar in meV*ps; the only energy <-> time conversion used in the package.
HBAR_MEV_PS = 0.6582119514

POLARIZATIONS = ("H", "V")
BRANCHES = ("LP", "UP")


class ParameterError(ValueError):
    """Raised for physically invalid parameter sets."""


@dataclass(frozen=True)
class UnitsConvention:
    hbar: float = HBAR_MEV_PS

    def __post_init__(self):
        if not self.hbar > 0:
            raise ParameterError("hbar must be positive")

    def rate_to_width(self, lifetime_ps: float) -> float:
        """Energy width (meV) of a decay with the given lifetime."""
        return self.hbar / lifetime_ps


UNITS = UnitsConvention()


@dataclass(frozen=True)
class SystemParams:
    """All physical inputs of the dot/cavity system.

    The defaults describe the symmetric benchmark: equal couplings of
    0.11 meV, exciton and cavity splittings of 0.25 meV and zero mean
    cavity-exciton detuning.  ``tau_C`` and ``Gamma_XX`` are modelling
    assumptions (see README), not measured values.
    """

    E_X_H: float = 0.125
    E_X_V: float = -0.125
    E_C_H: float = 0.125
    E_C_V: float = -0.125
    Omega_H: float = 0.11
    Omega_V: float = 0.11
    E_XX: float = 5.0
    Gamma_XX: float = 0.001
    tau_C: float = 3.0
    tau_X: float = 1000.0
    exciton_broadening: bool = False

    def __post_init__(self):
        for name in ("E_X_H", "E_X_V", "E_C_H", "E_C_V", "Omega_H", "Omega_V",
                     "E_XX", "Gamma_XX", "tau_C", "tau_X"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.Omega_H < 0 or self.Omega_V < 0:
            raise ParameterError("Rabi couplings must be non-negative")
        if not self.Gamma_XX > 0:
            raise ParameterError("Gamma_XX must be positive")
        if not self.tau_C > 0 or not self.tau_X > 0:
            raise ParameterError("lifetimes must be positive")
        self._check_separation()

    def _check_separation(self):
        states = [s for pol in POLARIZATIONS for s in polariton_modes(self, pol)]
        e_max = max(s.energy for s in states)
        width_max = max(max(s.linewidth for s in states), self.Gamma_XX)
        if self.E_XX - e_max <= 10.0 * width_max:
            warnings.warn(
                f"E_XX={self.E_XX} meV is within 10 linewidths of the polariton "
                f"lines (max energy {e_max:.4g} meV, max width {width_max:.4g} meV)",
                stacklevel=3,
            )

    @classmethod
    def from_detunings(cls, delta_X: float, delta_C: float, delta_CX: float,
                       Omega_H: float = 0.11, Omega_V: float = 0.11,
                       exciton_mean: float = 0.0, **kwargs) -> "SystemParams":
        """Build parameters from splittings and the mean cavity-exciton detuning."""
        cavity_mean = exciton_mean + delta_CX
        return cls(
            E_X_H=exciton_mean + delta_X / 2,
            E_X_V=exciton_mean - delta_X / 2,
            E_C_H=cavity_mean + delta_C / 2,
            E_C_V=cavity_mean - delta_C / 2,
            Omega_H=Omega_H,
            Omega_V=Omega_V,
            **kwargs,
        )

    def with_detunings(self, delta_C: float | None = None,
                       delta_CX: float | None = None) -> "SystemParams":
        """Move the cavity modes: delta_CX shifts both rigidly, delta_C splits them
        antisymmetrically about their mean.  Excitons are untouched."""
        d = derived_detunings(self)
        dc = d.delta_C if delta_C is None else delta_C
        dcx = d.delta_CX if delta_CX is None else delta_CX
        cavity_mean = (self.E_X_H + self.E_X_V) / 2 + dcx
        return replace(self, E_C_H=cavity_mean + dc / 2, E_C_V=cavity_mean - dc / 2)

    def shifted(self, delta: float) -> "SystemParams":
        """Translate every energy (excitons, cavities, biexciton) by ``delta``."""
        return replace(
            self,
            E_X_H=self.E_X_H + delta, E_X_V=self.E_X_V + delta,
            E_C_H=self.E_C_H + delta, E_C_V=self.E_C_V + delta,
            E_XX=self.E_XX + delta,
        )

    def swapped(self) -> "SystemParams":
        """Exchange every H parameter with its V counterpart."""
        return replace(
            self,
            E_X_H=self.E_X_V, E_X_V=self.E_X_H,
            E_C_H=self.E_C_V, E_C_V=self.E_C_H,
            Omega_H=self.Omega_V, Omega_V=self.Omega_H,
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class Detunings:
    delta_X: float
    delta_C: float
    delta_CX: float


@dataclass(frozen=True)
class PolaritonState:
    polarization: str
    branch: str
    energy: float
    x_ex: float
    x_ph: float
    linewidth: float

    @property
    def label(self) -> str:
        return f"{self.branch}_{self.polarization}"

    @property
    def is_dark(self) -> bool:
        # the cascade amplitude carries x_ex * x_ph, so a pure state never emits
        return self.x_ex == 0.0 or self.x_ph == 0.0 or self.linewidth == 0.0


def _hopfield(delta: float, coupling: float) -> tuple[float, float]:
    """Squared exciton fraction of the lower branch, and the radius R.

    ``delta = E_C - E_X``.  The minority fraction is computed in the
    cancellation-free form 2 g^2 / (R (R + |delta|)).
    """
    radius = math.hypot(delta, 2.0 * coupling)
    if radius == 0.0:
        # fully degenerate and uncoupled: label the exciton as the lower state
        return 1.0, 0.0
    minority = 2.0 * (coupling / radius) * (coupling / (radius + abs(delta)))
    x_ex2_lp = 1.0 - minority if delta >= 0 else minority
    return x_ex2_lp, radius


def polariton_linewidth(state: PolaritonState, params: SystemParams,
                        units: UnitsConvention = UNITS) -> float:
    """Radiative linewidth x_ph^2 hbar/tau_C (plus x_ex^2 hbar/tau_X if enabled)."""
    width = state.x_ph ** 2 * units.rate_to_width(params.tau_C)
    if params.exciton_broadening:
        width += state.x_ex ** 2 * units.rate_to_width(params.tau_X)
    return width


def polariton_modes(params: SystemParams, pol: str,
                    units: UnitsConvention = UNITS) -> tuple[PolaritonState, PolaritonState]:
    """Lower and upper polariton of one polarization.

    Diagonalizes [[E_X, Omega], [Omega, E_C]] in closed form.  The photon
    Hopfield coefficient is non-negative; the exciton coefficient carries the
    sign (negative on the lower branch for Omega > 0).
    """
    if pol not in POLARIZATIONS:
        raise ValueError(f"unknown polarization {pol!r}")
    e_x = getattr(params, f"E_X_{pol}")
    e_c = getattr(params, f"E_C_{pol}")
    g = getattr(params, f"Omega_{pol}")

    x_ex2_lp, radius = _hopfield(e_c - e_x, g)
    mean = 0.5 * (e_x + e_c)
    e_lp, e_up = mean - 0.5 * radius, mean + 0.5 * radius

    # LP = (-a, b), UP = (b, a) with a = |x_ex(LP)|, b = |x_ph(LP)|
    a = math.sqrt(x_ex2_lp)
    b = math.sqrt(1.0 - x_ex2_lp)
    lp_ex = -a if g > 0 else a
    states = []
    for branch, energy, x_ex, x_ph in (("LP", e_lp, lp_ex, b), ("UP", e_up, b, a)):
        provisional = PolaritonState(pol, branch, energy, x_ex, x_ph, 0.0)
        width = polariton_linewidth(provisional, params, units)
        states.append(replace(provisional, linewidth=width))
    return states[0], states[1]


def all_polaritons(params: SystemParams) -> dict[tuple[str, str], PolaritonState]:
    """All four states keyed by (polarization, branch)."""
    out = {}
    for pol in POLARIZATIONS:
        lp, up = polariton_modes(params, pol)
        out[(pol, "LP")] = lp
        out[(pol, "UP")] = up
    return out


def derived_detunings(params: SystemParams) -> Detunings:
    return Detunings(
        delta_X=params.E_X_H - params.E_X_V,
        delta_C=params.E_C_H - params.E_C_V,
        delta_CX=(params.E_C_H + params.E_C_V) / 2 - (params.E_X_H + params.E_X_V) / 2,
    )
