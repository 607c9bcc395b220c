"""Frequency-modulated optomechanical lattices: effective SSH/Kitaev models,
spectra, edge states, quantum walks and full time-dependent validation."""

from .model import (
    CouplingProfile,
    LatticeSpec,
    ModulationParams,
    QuadraticHamiltonian,
    TimeDependentGenerator,
    build_fermionic_kitaev_reference,
    build_regime_a,
    build_regime_b,
    build_regime_c_kitaev,
    build_regime_d_nnn,
    time_generator,
)
from .special import BesselZeroRequest, bessel_j, bessel_zero, kappas_from_modulation

__version__ = "0.1.0"

__all__ = [
    "BesselZeroRequest",
    "CouplingProfile",
    "LatticeSpec",
    "ModulationParams",
    "QuadraticHamiltonian",
    "TimeDependentGenerator",
    "bessel_j",
    "bessel_zero",
    "build_fermionic_kitaev_reference",
    "build_regime_a",
    "build_regime_b",
    "build_regime_c_kitaev",
    "build_regime_d_nnn",
    "kappas_from_modulation",
    "time_generator",
]
