"""Laboratoire numérique de théorie classique préquantique des champs"""

__version__ = "0.1.0"

from .phase_space import (
    ComplexOperator,
    PhaseSpace,
    PhaseVector,
    SymplecticOperator,
    apply_J,
    complex_inner,
    from_real_matrix,
    project_symplectic,
    to_complex_operator,
)
from .states import (
    DensityOperator,
    GaussianState,
    dispersion,
    from_density_operator,
    sample,
    scale_state,
)
from .variables import (
    ClassicalVariable,
    FactoredQuartic,
    KernelQuartic,
    Quadratic,
    Smooth,
    evaluate,
    hessian_at_zero,
    is_J_invariant,
    scale_variable,
)
from .dequantization import (
    classical_average,
    dequantize_state,
    dequantize_variable,
    quantum_average,
    trace_formula_check,
    verify_asymptotics,
)
from .units import UnitSystem, alpha_bound_from_b, dimension_check

__all__ = [
    "__version__",
    "ComplexOperator",
    "PhaseSpace",
    "PhaseVector",
    "SymplecticOperator",
    "apply_J",
    "complex_inner",
    "from_real_matrix",
    "project_symplectic",
    "to_complex_operator",
    "DensityOperator",
    "GaussianState",
    "dispersion",
    "from_density_operator",
    "sample",
    "scale_state",
    "ClassicalVariable",
    "FactoredQuartic",
    "KernelQuartic",
    "Quadratic",
    "Smooth",
    "evaluate",
    "hessian_at_zero",
    "is_J_invariant",
    "scale_variable",
    "classical_average",
    "dequantize_state",
    "dequantize_variable",
    "quantum_average",
    "trace_formula_check",
    "verify_asymptotics",
    "UnitSystem",
    "alpha_bound_from_b",
    "dimension_check",
]
