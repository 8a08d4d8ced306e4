"""Dynamique de Hamilton–Schrödinger i dΨ/dt = H′(Ψ)"""

from .fields import (
    gaussian_packet,
    gausson,
    gausson_parameters,
    grid_operator,
    load_field,
    plane_wave,
)
from .hamiltonians import (
    BilinearHamiltonian,
    CubicNLS,
    GeneralF,
    Hamiltonian,
    LogNLS,
    QuadraticHamiltonian,
    energy,
    gradient,
    prequantum_form,
    quantum_form,
    tabulated_nonlinearity,
)
from .integrators import (
    Trajectory,
    evolve,
    evolve_bilinear,
    evolve_linear,
    evolve_linear_real,
    evolve_midpoint,
    evolve_splitstep,
)

__all__ = [
    "gaussian_packet",
    "gausson",
    "gausson_parameters",
    "grid_operator",
    "load_field",
    "plane_wave",
    "BilinearHamiltonian",
    "CubicNLS",
    "GeneralF",
    "Hamiltonian",
    "LogNLS",
    "QuadraticHamiltonian",
    "energy",
    "gradient",
    "prequantum_form",
    "quantum_form",
    "tabulated_nonlinearity",
    "Trajectory",
    "evolve",
    "evolve_bilinear",
    "evolve_linear",
    "evolve_linear_real",
    "evolve_midpoint",
    "evolve_splitstep",
]
