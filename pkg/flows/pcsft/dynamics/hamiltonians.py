"""
Fonctions de Hamilton J-invariantes : quadratique, NLS cubique, bilinéaire,
logarithmique et non-linéarité générale F.

Convention : H′(Ψ) = 2·∂H/∂Ψ̄, de sorte que dH = Re⟨H′(Ψ), δΨ⟩ (produit
scalaire de quadrature sur grille, euclidien en base abstraite) et que
l'équation du mouvement s'écrit i dΨ/dt = H′(Ψ).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, ClassVar, Optional, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from ..errors import EvaluationError, StructureError
from ..phase_space import PhaseSpace, PhaseVector, SymplecticOperator, to_complex_operator
from .fields import as_field, cell_weight, gradient_energy, integrate, laplacian


LOG_FLOOR = 1e-30
QUADRATURE_NODES = 32

Field = Union[PhaseVector, np.ndarray]


def _as_potential(space: PhaseSpace, potential) -> Optional[np.ndarray]:
    if potential is None:
        return None
    values = np.asarray(potential, dtype=float)
    if values.ndim == 0:
        return np.full(space.grid.shape if space.is_grid else (space.n,), float(values))
    if values.size != space.n:
        raise StructureError(f"Potentiel de taille {values.size} pour n={space.n}")
    return values.reshape(space.grid.shape if space.is_grid else (space.n,))


def _form(M: np.ndarray, psi: np.ndarray, phi: np.ndarray) -> float:
    """(Mψ, φ) = Re ⟨φ, Mψ⟩ pour M hermitienne."""
    return float(np.vdot(phi.reshape(-1), M @ psi.reshape(-1)).real)


class Hamiltonian(ABC):
    """Fonction de Hamilton sur l'espace des phases d'un champ."""

    kind: ClassVar[str] = ""
    space: PhaseSpace

    @property
    def weight(self) -> float:
        """Poids du produit scalaire associé à energy()."""
        return 1.0

    @abstractmethod
    def energy(self, psi: np.ndarray) -> float:
        ...

    @abstractmethod
    def gradient(self, psi: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def transformed(self, lam: float, mu: float) -> "Hamiltonian":
        """Fonction ψ ↦ λ·H(ψ/μ) de même forme, coefficients recalculés."""

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.space.n, "representation": self.space.representation}


class LocalHamiltonian(Hamiltonian):
    """
    Partie linéaire ½∫(κ|∇Ψ|² + V|Ψ|²) (ou ½(HlinΨ,Ψ)) plus une densité locale en ρ = |Ψ|².

    Les sous-classes fournissent density(ρ) et rate(ρ) = d(density)/dρ ;
    le gradient vaut alors (−κΔ + V + rate(|Ψ|²))Ψ.
    """

    potential: Optional[np.ndarray]
    kinetic: float
    hlin: Optional[SymplecticOperator] = None

    @abstractmethod
    def density(self, rho: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def rate(self, rho: np.ndarray) -> np.ndarray:
        ...

    @cached_property
    def _hlin_matrix(self) -> np.ndarray:
        return to_complex_operator(self.hlin).M

    @property
    def splittable(self) -> bool:
        return self.space.is_grid and self.hlin is None

    @property
    def weight(self) -> float:
        return 1.0 if self.hlin is not None else cell_weight(self.space)

    def local_potential(self, psi: np.ndarray) -> np.ndarray:
        """V + rate(|Ψ|²) : générateur de la rotation de phase locale."""
        W = self.rate(np.abs(psi) ** 2)
        return W if self.potential is None else W + self.potential

    def _linear_energy(self, psi: np.ndarray) -> float:
        if self.hlin is not None:
            return 0.5 * _form(self._hlin_matrix, psi, psi)
        value = self.kinetic * gradient_energy(self.space, psi)
        if self.potential is not None:
            value += integrate(self.space, self.potential * np.abs(psi) ** 2)
        return 0.5 * value

    def _linear_gradient(self, psi: np.ndarray) -> np.ndarray:
        if self.hlin is not None:
            return (self._hlin_matrix @ psi.reshape(-1)).reshape(psi.shape)
        out = -self.kinetic * laplacian(self.space, psi)
        if self.potential is not None:
            out = out + self.potential * psi
        return out

    def energy(self, psi: np.ndarray) -> float:
        local = self.density(np.abs(psi) ** 2)
        local_total = float(np.sum(local)) * self.weight
        return self._linear_energy(psi) + local_total

    def gradient(self, psi: np.ndarray) -> np.ndarray:
        return self._linear_gradient(psi) + self.rate(np.abs(psi) ** 2) * psi

    def _linear_transformed(self, lam: float, mu: float) -> dict:
        factor = lam / mu ** 2
        changes = {"kinetic": factor * self.kinetic}
        if self.potential is not None:
            changes["potential"] = factor * self.potential
        if self.hlin is not None:
            changes["hlin"] = self.hlin * factor
        return changes


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian(Hamiltonian):
    """½(HΨ,Ψ) : équation de Schrödinger linéaire."""

    space: PhaseSpace
    H: SymplecticOperator
    kind: ClassVar[str] = "quadratic"

    def __post_init__(self):
        if self.H.n != self.space.n:
            raise StructureError(f"Opérateur n={self.H.n} pour un espace n={self.space.n}")

    @cached_property
    def M(self) -> np.ndarray:
        return to_complex_operator(self.H).M

    def energy(self, psi: np.ndarray) -> float:
        return 0.5 * _form(self.M, psi, psi)

    def gradient(self, psi: np.ndarray) -> np.ndarray:
        return (self.M @ psi.reshape(-1)).reshape(psi.shape)

    def transformed(self, lam: float, mu: float) -> "QuadraticHamiltonian":
        return replace(self, H=self.H * (lam / mu ** 2))


@dataclass(frozen=True, eq=False)
class CubicNLS(LocalHamiltonian):
    """½∫(κ|∇Ψ|² + V|Ψ|²) + (α_c/4)∫|Ψ|⁴."""

    space: PhaseSpace
    alpha_c: float = 0.0
    potential: Optional[np.ndarray] = None
    kinetic: float = 0.5
    kind: ClassVar[str] = "cubic-nls"

    def __post_init__(self):
        if not self.space.is_grid:
            raise StructureError("CubicNLS exige un espace sur grille")
        object.__setattr__(self, "potential", _as_potential(self.space, self.potential))

    def density(self, rho):
        return 0.25 * self.alpha_c * rho ** 2

    def rate(self, rho):
        return self.alpha_c * rho

    def transformed(self, lam, mu):
        return replace(self, alpha_c=self.alpha_c * lam / mu ** 4, **self._linear_transformed(lam, mu))

    def describe(self):
        return {**super().describe(), "alpha_c": self.alpha_c, "kinetic": self.kinetic}


@dataclass(frozen=True, eq=False)
class LogNLS(LocalHamiltonian):
    """
    ½∫(κ|∇Ψ|² + V|Ψ|²) + ½∫ b|Ψ|²(ln(a³|Ψ|²) − 1).

    Le logarithme est évalué sur max(a³|Ψ|², LOG_FLOOR), dans l'énergie
    comme dans le gradient.

    Le facteur ½ devant le terme logarithmique accompagne la convention
    H′ = 2∂H/∂Ψ̄ : le taux non linéaire vaut alors b·ln(a³|Ψ|²). Pour un
    champ constant ρ = 1/8, a = 2, b = 0.7 sur une boîte unité, H = −0.04375.
    """

    space: PhaseSpace
    b: float = -0.5
    a: float = 1.0
    potential: Optional[np.ndarray] = None
    kinetic: float = 0.5
    kind: ClassVar[str] = "log-nls"

    def __post_init__(self):
        if not self.space.is_grid:
            raise StructureError("LogNLS exige un espace sur grille")
        if not self.a > 0:
            raise StructureError(f"Échelle a doit être > 0: {self.a}")
        object.__setattr__(self, "potential", _as_potential(self.space, self.potential))

    def _log(self, rho):
        return np.log(np.maximum(self.a ** 3 * rho, LOG_FLOOR))

    def density(self, rho):
        return 0.5 * self.b * rho * (self._log(rho) - 1.0)

    def rate(self, rho):
        return self.b * self._log(rho)

    def transformed(self, lam, mu):
        return replace(
            self,
            b=self.b * lam / mu ** 2,
            a=self.a * mu ** (-2.0 / 3.0),
            **self._linear_transformed(lam, mu),
        )

    def describe(self):
        return {**super().describe(), "b": self.b, "a": self.a, "kinetic": self.kinetic}


def primitive_by_quadrature(F: Callable, nodes: int = QUADRATURE_NODES) -> Callable:
    """G(s) = ∫₀ˢ F(q) dq par Gauss–Legendre (F vectorisée)."""
    x, w = leggauss(nodes)

    def G(s):
        s = np.asarray(s, dtype=float)
        q = 0.5 * s[..., None] * (x + 1.0)
        return 0.5 * s * np.sum(w * F(q), axis=-1)

    return G


def tabulated_nonlinearity(q: np.ndarray, values: np.ndarray):
    """
    F échantillonnée → (F, G) par spline cubique (classe C²) et sa primitive exacte.

    Au-delà de la table la spline est extrapolée.
    """
    spline = CubicSpline(np.asarray(q, dtype=float), np.asarray(values, dtype=float))
    antiderivative = spline.antiderivative()
    offset = float(antiderivative(0.0))
    return spline, (lambda s: antiderivative(s) - offset)


@dataclass(frozen=True, eq=False)
class GeneralF(LocalHamiltonian):
    """
    Partie linéaire + ½∫G(|Ψ|²), G = ∫₀F, gradient HlinΨ + F(|Ψ|²)Ψ.

    Sur grille la partie linéaire est −κΔ + V ; sinon hlin est requis.
    """

    space: PhaseSpace
    F: Callable = None
    F_primitive: Optional[Callable] = None
    potential: Optional[np.ndarray] = None
    kinetic: float = 0.5
    hlin: Optional[SymplecticOperator] = None
    name: str = "F"
    kind: ClassVar[str] = "general-f"

    def __post_init__(self):
        if self.F is None:
            raise StructureError("GeneralF exige une fonction F")
        if self.hlin is None and not self.space.is_grid:
            raise StructureError("GeneralF en base abstraite exige hlin")
        if self.hlin is not None and self.hlin.n != self.space.n:
            raise StructureError(f"hlin n={self.hlin.n} pour un espace n={self.space.n}")
        object.__setattr__(self, "potential", _as_potential(self.space, self.potential))
        if self.F_primitive is None:
            object.__setattr__(self, "F_primitive", primitive_by_quadrature(self.F))

    def density(self, rho):
        return 0.5 * self.F_primitive(rho)

    def rate(self, rho):
        return self.F(rho)

    def transformed(self, lam, mu):
        F, G, m2 = self.F, self.F_primitive, mu ** 2
        return replace(
            self,
            F=lambda s: (lam / m2) * F(s / m2),
            F_primitive=lambda s: lam * G(s / m2),
            **self._linear_transformed(lam, mu),
        )

    def describe(self):
        return {**super().describe(), "F": self.name, "kinetic": self.kinetic}


@dataclass(frozen=True, eq=False)
class BilinearHamiltonian(Hamiltonian):
    """½(HlinΨ,Ψ) + (α_c/4)(Γ1Ψ,Ψ)(Γ2Ψ,Ψ), non local, en base abstraite."""

    space: PhaseSpace
    hlin: SymplecticOperator
    alpha_c: float
    gamma1: SymplecticOperator
    gamma2: SymplecticOperator
    kind: ClassVar[str] = "bilinear"

    def __post_init__(self):
        for op in (self.hlin, self.gamma1, self.gamma2):
            if op.n != self.space.n:
                raise StructureError(f"Opérateur n={op.n} pour un espace n={self.space.n}")

    @cached_property
    def _matrices(self):
        return (
            to_complex_operator(self.hlin).M,
            to_complex_operator(self.gamma1).M,
            to_complex_operator(self.gamma2).M,
        )

    def energy(self, psi):
        M, G1, G2 = self._matrices
        return 0.5 * _form(M, psi, psi) + 0.25 * self.alpha_c * _form(G1, psi, psi) * _form(G2, psi, psi)

    def gradient(self, psi):
        M, G1, G2 = self._matrices
        flat = psi.reshape(-1)
        g1, g2 = G1 @ flat, G2 @ flat
        c1, c2 = float(np.vdot(flat, g1).real), float(np.vdot(flat, g2).real)
        out = M @ flat + 0.5 * self.alpha_c * (c1 * g2 + c2 * g1)
        return out.reshape(psi.shape)

    def transformed(self, lam, mu):
        return replace(self, hlin=self.hlin * (lam / mu ** 2), alpha_c=self.alpha_c * lam / mu ** 4)

    def describe(self):
        return {**super().describe(), "alpha_c": self.alpha_c}


def checked_field(H: Hamiltonian, psi: Field) -> np.ndarray:
    values = as_field(H.space, psi)
    if not np.all(np.isfinite(values)):
        raise EvaluationError("Champ non fini en entrée")
    return values


def gradient(H: Hamiltonian, psi: Field) -> np.ndarray:
    """H′(Ψ) ; lève EvaluationError si le résultat n'est pas fini."""
    out = H.gradient(checked_field(H, psi))
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"Gradient non fini pour {H.kind}")
    return out


def energy(H: Hamiltonian, psi: Field) -> float:
    value = H.energy(checked_field(H, psi))
    if not np.isfinite(value):
        raise EvaluationError(f"Énergie non finie pour {H.kind}")
    return value


def prequantum_form(H_Q: Hamiltonian, alpha: float, E_P: float = 1.0) -> Hamiltonian:
    """H(ψ) = (α/E_P)·H_Q(ψ/√α)."""
    if not (alpha > 0 and E_P > 0):
        raise ValueError(f"alpha et E_P doivent être > 0: alpha={alpha}, E_P={E_P}")
    return H_Q.transformed(alpha / E_P, np.sqrt(alpha))


def quantum_form(H: Hamiltonian, alpha: float, E_P: float = 1.0) -> Hamiltonian:
    """Inverse de prequantum_form : H_Q(Ψ) = (E_P/α)·H(√α·Ψ)."""
    if not (alpha > 0 and E_P > 0):
        raise ValueError(f"alpha et E_P doivent être > 0: alpha={alpha}, E_P={E_P}")
    return H.transformed(E_P / alpha, 1.0 / np.sqrt(alpha))
