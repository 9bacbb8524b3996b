from .decomposition import (
    DensityKernel, SolitonDecomposition, SolitonState, annulus_radii, build_kernel,
    concentration_point, cutoff_chi, decompose, density_rho, halo_in_annulus,
    kernel_profile, soliton_state, support_radius,
)
from .energy import EnergyReport, energy_report, internal_energy, total_momentum
from .halo import HaloTerms, halo_terms
from .observer import Observer, Sample, stack
from .stress import StressField, momentum_law_residual, stress_tensor, stress_tensor_polar

__all__ = [
    "DensityKernel", "SolitonDecomposition", "SolitonState", "annulus_radii", "build_kernel",
    "concentration_point", "cutoff_chi", "decompose", "density_rho", "halo_in_annulus",
    "kernel_profile", "soliton_state", "support_radius",
    "EnergyReport", "energy_report", "internal_energy", "total_momentum",
    "HaloTerms", "halo_terms", "Observer", "Sample", "stack",
    "StressField", "momentum_law_residual", "stress_tensor", "stress_tensor_polar",
]
