"""Polarization-entangled photon pairs from a biexciton cascade in a
strongly coupled quantum-dot/cavity system."""

__version__ = "0.1.0"

from .model import (HBAR_MEV_PS, UNITS, ParameterError, PolaritonState, SystemParams,
                    UnitsConvention, all_polaritons, derived_detunings, polariton_modes)
from .cascade import (CascadeError, DecayChannel, build_channels, channel_norm, channel_overlap,
                      line_table, pl_spectrum)
from .entanglement import (Analysis, NoFluxError, SpectralWindow, analyze, density_matrix,
                           gamma_prime, peres_verdict, quantum_efficiency, select_degenerate_pair)
from .quadrature import QuadratureError, integrate_1d, integrate_2d, overlap_closed_form
from .bipolariton import BipolaritonParams, diagonalize, eigen_symmetric, tune_symmetric
from .explorer import Axis, SweepSpec, filter_sweep, optimize_gamma, sweep

__all__ = [
    "Analysis", "Axis", "BipolaritonParams", "CascadeError", "DecayChannel", "HBAR_MEV_PS",
    "NoFluxError", "ParameterError", "PolaritonState", "QuadratureError", "SpectralWindow",
    "SweepSpec", "SystemParams", "UNITS", "UnitsConvention", "all_polaritons", "analyze",
    "build_channels", "channel_norm", "channel_overlap", "density_matrix", "derived_detunings",
    "diagonalize", "eigen_symmetric", "filter_sweep", "gamma_prime", "integrate_1d",
    "integrate_2d", "line_table", "optimize_gamma", "overlap_closed_form", "peres_verdict",
    "pl_spectrum", "polariton_modes", "quantum_efficiency", "select_degenerate_pair", "sweep",
    "tune_symmetric",
]
