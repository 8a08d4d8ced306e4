"""Correspondance classique → quantique : moyennes, applications T, formule de trace, asymptotique"""

import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import DimensionMismatchError, NonHermitianError, NoiseDominatedError, PCSFTError
from .phase_space import (
    ComplexOperator,
    SymplecticOperator,
    assemble,
    to_complex_operator,
)
from .states import (
    DensityOperator,
    GaussianState,
    complex_covariance,
    from_density_operator,
    map_batches,
    sampling_factor,
    scale_state,
)
from .variables import (
    ClassicalVariable,
    FactoredQuartic,
    KernelQuartic,
    Quadratic,
    evaluate_batch,
    hessian_report,
)


IMAGINARY_TOL = 1e-10
SIGNIFICANCE = 10.0
EXACT_TOL = 1e-12
DEFAULT_ALPHAS = tuple(np.logspace(-1, -4, 5))


@dataclass(frozen=True)
class AverageEstimate:
    """Estimation Monte Carlo de ⟨f⟩_ρ : std_error = écart-type/√count."""

    value: float
    std_error: float
    count: int
    seed: int

    def within(self, expected: float, sigmas: float = 4.0) -> bool:
        return abs(self.value - expected) <= sigmas * self.std_error + 1e-15 * (1 + abs(expected))


def _reduce_moments(chunks: Sequence[np.ndarray]) -> tuple:
    """(somme, somme des carrés, effectif) réduits dans l'ordre des lots."""
    total = 0.0
    total_sq = 0.0
    count = 0
    for s, sq, m in chunks:
        total += s
        total_sq += sq
        count += m
    return total, total_sq, count


def monte_carlo_mean(
    integrand,
    state: GaussianState,
    count: int,
    seed: int,
    workers: int = 1,
    dtype=np.float64,
) -> AverageEstimate:
    """Moyenne Monte Carlo de integrand(offset, X) sur des tirages de ρ."""
    if count < 2:
        raise ValueError(f"count doit être >= 2: {count}")
    L = sampling_factor(state.B)

    def batch(offset: int, xi: np.ndarray):
        values = integrand(offset, xi @ L.T)
        return float(values.sum()), float((values ** 2).sum()), values.size

    total, total_sq, m = _reduce_moments(
        map_batches(batch, state.space.real_dimension, seed, count, workers, dtype=dtype)
    )
    mean = total / m
    variance = max(total_sq / m - mean ** 2, 0.0) * m / (m - 1)
    return AverageEstimate(mean, float(np.sqrt(variance / m)), m, seed)


def classical_average(
    f: ClassicalVariable,
    state: GaussianState,
    count: int = 100_000,
    seed: int = 0,
    workers: int = 1,
    dtype=np.float64,
) -> AverageEstimate:
    """
    ⟨f⟩_ρ = ∫ f(ψ) dρ(ψ) par Monte Carlo.

    Args:
        f: Variable classique
        state: État gaussien
        count: Nombre de tirages (>= 2)
        seed: Graine (déterministe, indépendante du nombre de threads)
        workers: Threads pour les lots

    Returns:
        AverageEstimate avec erreur standard
    """
    if f.n != state.n:
        raise DimensionMismatchError(f"Variable n={f.n}, état n={state.n}")
    return monte_carlo_mean(lambda offset, X: evaluate_batch(f, X, offset), state, count, seed, workers, dtype)


def _as_complex_operator(A) -> ComplexOperator:
    if isinstance(A, ComplexOperator):
        return A
    if isinstance(A, SymplecticOperator):
        return to_complex_operator(A)
    return ComplexOperator(np.asarray(A))


def quantum_average(A: Union[ComplexOperator, np.ndarray], D: Union[DensityOperator, np.ndarray]) -> float:
    """⟨A⟩_D = Tr DA (partie réelle ; résidu imaginaire contrôlé)."""
    A = _as_complex_operator(A)
    D = D if isinstance(D, DensityOperator) else DensityOperator(np.asarray(D))
    if A.n != D.n:
        raise DimensionMismatchError(f"Observable n={A.n}, densité n={D.n}")
    value = np.trace(D.D @ A.M)
    if abs(value.imag) > IMAGINARY_TOL * (1 + abs(value.real)):
        raise NonHermitianError(f"Résidu imaginaire {value.imag:.3e} dans Tr DA")
    return float(value.real)


def dequantize_state(state: GaussianState) -> DensityOperator:
    """T(ρ) = cov^c ρ_scal."""
    return DensityOperator(complex_covariance(scale_state(state)).M)


def dequantize_variable(f: ClassicalVariable) -> ComplexOperator:
    """T(f) = f″(0) sous forme complexe."""
    return to_complex_operator(hessian_report(f).operator)


def quadratic_form_expectation(A: np.ndarray, B: np.ndarray) -> float:
    """E[(Aψ, ψ)] = Tr(AB) pour ψ ~ N(0, B)."""
    return float(np.sum(A * B.T))


def quartic_form_expectation(A1: np.ndarray, A2: np.ndarray, B: np.ndarray) -> float:
    """Isserlis : E[(A1ψ,ψ)(A2ψ,ψ)] = Tr(A1B)Tr(A2B) + 2Tr(A1BA2B)."""
    return quadratic_form_expectation(A1, B) * quadratic_form_expectation(A2, B) + 2.0 * float(
        np.trace(A1 @ B @ A2 @ B)
    )


def isserlis_expectation(f: ClassicalVariable, B: Union[GaussianState, np.ndarray]) -> float:
    """
    Espérance gaussienne exacte d'une variable polynomiale (théorème de Wick/Isserlis).

    Raises:
        PCSFTError: si f contient un terme Smooth
    """
    B = B.B if isinstance(B, GaussianState) else np.asarray(B, dtype=float)
    if B.shape != (2 * f.n, 2 * f.n):
        raise DimensionMismatchError(f"Covariance {B.shape} pour une variable sur R^{2 * f.n}")
    total = 0.0
    for term in f.terms:
        if isinstance(term, Quadratic):
            total += term.coeff * quadratic_form_expectation(assemble(term.A), B)
        elif isinstance(term, FactoredQuartic):
            total += term.coeff * quartic_form_expectation(assemble(term.gamma1), assemble(term.gamma2), B)
        elif isinstance(term, KernelQuartic):
            n = term.n
            bqq = np.diag(B)[:n]
            bpp = np.diag(B)[n:]
            bqp = np.diag(B[:n, n:])
            # (tr C_x)² + 2 tr(C_x²) pour le bloc 2×2 de (q_x, p_x)
            moments = (bqq + bpp) ** 2 + 2 * (bqq ** 2 + bpp ** 2 + 2 * bqp ** 2)
            total += term.coeff * term.weight * float(moments.sum())
        else:
            raise PCSFTError("isserlis_expectation n'accepte que des variables polynomiales")
    return total


@dataclass(frozen=True)
class TraceCheck:
    """Comparaison MC ⟨AΨ,Ψ⟩ contre trace_c(B^c A_c)."""

    monte_carlo: AverageEstimate
    analytic: float
    residual: float
    z_score: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "monte_carlo": self.monte_carlo.value,
            "std_error": self.monte_carlo.std_error,
            "analytic": self.analytic,
            "residual": self.residual,
            "z_score": self.z_score,
            "passed": self.passed,
        }


def trace_formula_check(
    A: SymplecticOperator,
    state: GaussianState,
    count: int = 100_000,
    seed: int = 0,
    sigmas: float = 4.0,
    workers: int = 1,
) -> TraceCheck:
    """
    ∫⟨Aψ, ψ⟩ dρ(ψ) = Tr cov^c ρ A.

    Le côté gauche est estimé par Monte Carlo ; le côté droit est la trace
    complexe de B^c·A_c.
    """
    if A.n != state.n:
        raise DimensionMismatchError(f"Opérateur n={A.n}, état n={state.n}")
    M = to_complex_operator(A).M
    analytic = float(np.trace(complex_covariance(state).M @ M).real)
    A_real = assemble(A)
    # ⟨A_cΨ, Ψ⟩ = (Aψ, ψ) pour A hermitien
    estimate = monte_carlo_mean(
        lambda _, X: np.einsum("ij,jk,ik->i", X, A_real, X), state, count, seed, workers
    )
    residual = estimate.value - analytic
    if estimate.std_error > 0:
        z = residual / estimate.std_error
    else:
        z = 0.0 if abs(residual) <= 1e-12 * (1 + abs(analytic)) else np.inf
    return TraceCheck(estimate, analytic, residual, float(z), bool(abs(z) <= sigmas))


@dataclass
class AsymptoticsReport:
    """Certificat de l'ordre α² du reste du développement asymptotique."""

    alphas: List[float]
    classical: List[AverageEstimate]
    quantum_term: List[float]
    remainder: List[float]
    fitted_slope: Optional[float] = None
    fitted_intercept: Optional[float] = None
    path: str = "isserlis"
    status: str = "fitted"
    fit_points: List[int] = field(default_factory=list)

    def __post_init__(self):
        sizes = {len(self.alphas), len(self.classical), len(self.quantum_term), len(self.remainder)}
        if len(sizes) != 1:
            raise PCSFTError("Listes du rapport de tailles différentes")
        if any(a <= b for a, b in zip(self.alphas, self.alphas[1:])):
            raise PCSFTError("alphas doit être strictement décroissant")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "alpha": self.alphas,
            "classical": [c.value for c in self.classical],
            "classical_stderr": [c.std_error for c in self.classical],
            "quantum_term": self.quantum_term,
            "remainder": self.remainder,
        })

    def slope_within(self, low: float = 1.8, high: float = 2.2) -> bool:
        return self.fitted_slope is not None and low <= self.fitted_slope <= high

    def to_dict(self) -> dict:
        frame = self.to_frame()
        # amplification f/α : la limite doit valoir ½⟨T(f)⟩
        frame["classical_over_alpha"] = frame["classical"] / frame["alpha"]
        frame["half_quantum_average"] = frame["quantum_term"] / frame["alpha"]
        return {
            "path": self.path,
            "status": self.status,
            "fitted_slope": self.fitted_slope,
            "fitted_intercept": self.fitted_intercept,
            "fit_points": self.fit_points,
            "rows": frame.to_dict(orient="records"),
            "seeds": [c.seed for c in self.classical],
            "counts": [c.count for c in self.classical],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def fit_loglog(alphas: Sequence[float], remainders: Sequence[float]) -> tuple:
    """Moindres carrés de log|reste| contre log α : (pente, ordonnée)."""
    slope, intercept = np.polyfit(np.log(alphas), np.log(np.abs(remainders)), 1)
    return float(slope), float(intercept)


def verify_asymptotics(
    f: ClassicalVariable,
    D: DensityOperator,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    count: int = 100_000,
    seed: int = 0,
    path: str = "auto",
    workers: int = 1,
    dtype=np.float64,
) -> AsymptoticsReport:
    """
    Vérifie ⟨f⟩_ρ = (α/2) Tr D^c f″(0) + α² R pour ρ = from_density_operator(D, α).

    Chemin "isserlis" (exact, variables polynomiales) ou "monte-carlo"
    (variable de contrôle : seule f - ½(f″(0)ψ,ψ) est échantillonnée, la
    partie quadratique ayant une espérance exacte). "auto" choisit Isserlis
    quand f est polynomiale.

    Raises:
        NoiseDominatedError: moins de deux restes significatifs (> 10 erreurs standard)
    """
    alphas = [float(a) for a in alphas]
    if len(alphas) < 3:
        raise ValueError(f"Au moins 3 valeurs de alpha requises: {len(alphas)}")
    if any(a <= b for a, b in zip(alphas, alphas[1:])) or alphas[-1] <= 0:
        raise ValueError("alphas doit être strictement décroissant et positif")
    D = D if isinstance(D, DensityOperator) else DensityOperator(np.asarray(D))
    if path == "auto":
        path = "isserlis" if f.is_polynomial else "monte-carlo"
    if path == "isserlis" and not f.is_polynomial:
        raise PCSFTError("Le chemin Isserlis exige une variable polynomiale")

    hessian = hessian_report(f).operator
    quantum_average_value = quantum_average(to_complex_operator(hessian), D)
    hessian_real = assemble(hessian)

    classical: List[AverageEstimate] = []
    quantum_terms: List[float] = []
    remainders: List[float] = []
    for alpha in alphas:
        state = from_density_operator(D, alpha)
        quantum_term = 0.5 * alpha * quantum_average_value
        if path == "isserlis":
            estimate = AverageEstimate(isserlis_expectation(f, state), 0.0, 0, seed)
            remainder = estimate.value - quantum_term
        else:
            # même graine pour tous les α : nombres aléatoires communs
            correction = monte_carlo_mean(
                lambda offset, X: evaluate_batch(f, X, offset)
                - 0.5 * np.einsum("ij,jk,ik->i", X, hessian_real, X),
                state, count, seed, workers, dtype,
            )
            remainder = correction.value
            estimate = AverageEstimate(quantum_term + remainder, correction.std_error, count, seed)
        classical.append(estimate)
        quantum_terms.append(quantum_term)
        remainders.append(remainder)

    report = AsymptoticsReport(alphas, classical, quantum_terms, remainders, path=path)
    scale = np.array([abs(c.value) for c in classical]) + np.array(alphas)
    if all(abs(r) <= EXACT_TOL * s for r, s in zip(remainders, scale)):
        report.status = "exact"
        return report

    if path == "isserlis":
        points = [i for i, r in enumerate(remainders) if r != 0.0]
    else:
        points = [i for i, (r, c) in enumerate(zip(remainders, classical)) if abs(r) > SIGNIFICANCE * c.std_error]
    report.fit_points = points
    if len(points) < 2:
        report.status = "noise-dominated"
        raise NoiseDominatedError(f"Seulement {len(points)} reste(s) au-dessus du bruit", report=report)
    report.fitted_slope, report.fitted_intercept = fit_loglog(
        [alphas[i] for i in points], [remainders[i] for i in points]
    )
    return report
