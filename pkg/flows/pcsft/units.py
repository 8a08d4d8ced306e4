"""
Analyse dimensionnelle : α a la dimension d'une énergie, b = α, borne sur α.

Les dimensions sont des vecteurs d'exposants rationnels sur (énergie,
longueur, temps), vérifiés à la construction et non à chaque évaluation.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, NamedTuple, Optional

import numpy as np
import scipy.constants as const

from .dynamics.hamiltonians import (
    BilinearHamiltonian,
    CubicNLS,
    GeneralF,
    Hamiltonian,
    LogNLS,
    QuadraticHamiltonian,
    prequantum_form,
    quantum_form,
)
from .errors import DimensionError
from .phase_space import PhaseSpace, SymplecticOperator


UPPER_BOUND_NOTE = (
    "borne supérieure uniquement : b = α identifie la constante de couplage "
    "à la dispersion, α peut être nettement plus petit"
)


@dataclass(frozen=True)
class Dimension:
    energy: Fraction = Fraction(0)
    length: Fraction = Fraction(0)
    time: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("energy", "length", "time"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))

    def __mul__(self, other: "Dimension") -> "Dimension":
        return Dimension(self.energy + other.energy, self.length + other.length, self.time + other.time)

    def __truediv__(self, other: "Dimension") -> "Dimension":
        return Dimension(self.energy - other.energy, self.length - other.length, self.time - other.time)

    def __pow__(self, exponent) -> "Dimension":
        e = Fraction(exponent)
        return Dimension(self.energy * e, self.length * e, self.time * e)

    @property
    def is_dimensionless(self) -> bool:
        return self == DIMENSIONLESS

    def as_vector(self) -> list:
        return [str(self.energy), str(self.length), str(self.time)]

    def __str__(self) -> str:
        parts = [f"{symbol}^{power}" for symbol, power in zip("ELT", (self.energy, self.length, self.time)) if power]
        return "·".join(parts) or "1"


DIMENSIONLESS = Dimension()
ENERGY = Dimension(energy=1)
LENGTH = Dimension(length=1)
TIME = Dimension(time=1)
ACTION = ENERGY * TIME
MASS = ENERGY * TIME ** 2 / LENGTH ** 2
VOLUME = LENGTH ** 3


@dataclass(frozen=True)
class UnitSystem:
    """Système d'unités interne : naturel (h = E_P = t_P = 1) ou SI."""

    mode: str
    h: float
    E_P: float
    t_P: float
    eV: float

    def __post_init__(self):
        if self.mode not in ("natural", "physical"):
            raise ValueError(f"Mode d'unités inconnu: {self.mode}")
        for name in ("h", "E_P", "t_P", "eV"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} doit être > 0: {getattr(self, name)}")
        if self.mode == "natural" and (self.h, self.E_P, self.t_P) != (1.0, 1.0, 1.0):
            raise ValueError("Le mode naturel fixe h = E_P = t_P = 1")

    @staticmethod
    def planck_energy_joule() -> float:
        return float(np.sqrt(const.hbar * const.c ** 5 / const.G))

    @classmethod
    def natural(cls) -> "UnitSystem":
        return cls("natural", 1.0, 1.0, 1.0, const.eV / cls.planck_energy_joule())

    @classmethod
    def si(cls) -> "UnitSystem":
        t_P = float(np.sqrt(const.hbar * const.G / const.c ** 5))
        return cls("physical", const.hbar, cls.planck_energy_joule(), t_P, const.eV)

    @classmethod
    def from_name(cls, name: str) -> "UnitSystem":
        return cls.si() if name == "physical" else cls.natural()

    def to_ev(self, energy: float) -> float:
        return energy / self.eV

    def from_ev(self, value: float) -> float:
        return value * self.eV


class AlphaBound(NamedTuple):
    value_ev: float
    note: str


def identify_coupling(b: float) -> float:
    """α = |b| : la constante de couplage logarithmique identifiée à la dispersion."""
    if not np.isfinite(b):
        raise ValueError(f"Constante de couplage non finie: {b}")
    return abs(float(b))


def alpha_bound_from_b(b_bound: float) -> AlphaBound:
    """Borne expérimentale |b| ≤ b_bound (eV) → borne supérieure sur α (eV)."""
    b_bound = float(b_bound)
    if not np.isfinite(b_bound) or b_bound < 0:
        raise ValueError(f"La borne sur b doit être un réel >= 0: {b_bound}")
    return AlphaBound(identify_coupling(b_bound), UPPER_BOUND_NOTE)


def format_bound(value: float) -> str:
    """Forme courte %g si elle est exacte, sinon repr."""
    short = f"{value:g}"
    return short if float(short) == value else repr(value)


# Nombre de facteurs |Ψ|² portés par le terme associé à chaque coefficient
FIELD_POWER = {"kinetic": 1, "potential": 1, "H": 1, "hlin": 1, "b": 1, "F": 1, "alpha_c": 2, "gamma1": 0, "gamma2": 0}


@dataclass(frozen=True)
class DimensionedHamiltonian:
    """
    Hamiltonien accompagné de la dimension de ses coefficients.

    form vaut "quantum" (|Ψ|² ~ 1/L³ sur grille) ou "prequantum"
    (|ψ|² ~ E/L³) ; en base abstraite les composantes quantiques sont
    sans dimension.
    """

    hamiltonian: Hamiltonian
    units: UnitSystem
    coefficients: Dict[str, Dimension]
    form: str = "quantum"
    alpha: Optional[float] = None

    @property
    def density(self) -> Dimension:
        base = LENGTH ** -3 if self.hamiltonian.space.is_grid else DIMENSIONLESS
        return base * ENERGY if self.form == "prequantum" else base

    @property
    def measure(self) -> Dimension:
        return VOLUME if self.hamiltonian.space.is_grid else DIMENSIONLESS

    def prequantum(self, alpha: float) -> "DimensionedHamiltonian":
        """Forme préquantique H(ψ) = (α/E_P)·H_Q(ψ/√α) ; α en unités d'énergie internes."""
        if self.form != "quantum":
            raise DimensionError("Hamiltonien déjà sous forme préquantique", "form")
        coefficients = {}
        for name, dim in self.coefficients.items():
            if name == "a":
                coefficients[name] = dim * ENERGY ** Fraction(-1, 3)
            else:
                coefficients[name] = dim * ENERGY ** -FIELD_POWER[name]
        H = prequantum_form(self.hamiltonian, alpha, self.units.E_P)
        return DimensionedHamiltonian(H, self.units, coefficients, "prequantum", alpha)

    def quantum(self) -> "DimensionedHamiltonian":
        if self.form != "prequantum":
            return self
        coefficients = {}
        for name, dim in self.coefficients.items():
            if name == "a":
                coefficients[name] = dim * ENERGY ** Fraction(1, 3)
            else:
                coefficients[name] = dim * ENERGY ** FIELD_POWER[name]
        H = quantum_form(self.hamiltonian, self.alpha, self.units.E_P)
        return DimensionedHamiltonian(H, self.units, coefficients, "quantum", None)


@dataclass
class DimensionReport:
    kind: str
    form: str
    terms: Dict[str, Dimension] = field(default_factory=dict)
    log_argument: Optional[Dimension] = None

    @property
    def passed(self) -> bool:
        log_ok = self.log_argument is None or self.log_argument.is_dimensionless
        return log_ok and all(d == ENERGY for d in self.terms.values())

    def to_dict(self) -> dict:
        payload = {
            "kind": self.kind,
            "form": self.form,
            "passed": self.passed,
            "terms": {name: dim.as_vector() for name, dim in self.terms.items()},
        }
        if self.log_argument is not None:
            payload["log_argument"] = self.log_argument.as_vector()
        return payload


def _term_dimensions(dh: DimensionedHamiltonian) -> Dict[str, Dimension]:
    c, rho, dx = dh.coefficients, dh.density, dh.measure
    H = dh.hamiltonian
    terms = {}
    if isinstance(H, QuadraticHamiltonian):
        terms["quadratic"] = c["H"] * rho
    elif isinstance(H, BilinearHamiltonian):
        terms["linear"] = c["hlin"] * rho
        terms["quartic"] = c["alpha_c"] * (c["gamma1"] * rho) * (c["gamma2"] * rho)
    else:
        if "hlin" in c:
            terms["linear"] = c["hlin"] * rho
        else:
            terms["kinetic"] = c["kinetic"] * LENGTH ** -2 * rho * dx
        if "potential" in c:
            terms["potential"] = c["potential"] * rho * dx
        if isinstance(H, CubicNLS):
            terms["cubic"] = c["alpha_c"] * rho ** 2 * dx
        elif isinstance(H, LogNLS):
            terms["log"] = c["b"] * rho * dx
        elif isinstance(H, GeneralF):
            terms["nonlinear"] = c["F"] * rho * dx
    return terms


def dimension_check(dh: DimensionedHamiltonian) -> DimensionReport:
    """
    Vérifie que chaque terme de la fonction de Hamilton est une énergie.

    Raises:
        DimensionError: mode naturel, terme non énergétique ou argument
            du logarithme dimensionné (le terme fautif est nommé)
    """
    if dh.units.mode != "physical":
        raise DimensionError("dimension_check exige le mode physique", "units")
    report = DimensionReport(dh.hamiltonian.kind, dh.form)
    try:
        report.terms = _term_dimensions(dh)
    except KeyError as e:
        raise DimensionError(f"Dimension manquante pour le coefficient {e}", str(e.args[0])) from e
    for name, dim in report.terms.items():
        if dim != ENERGY:
            raise DimensionError(f"Le terme '{name}' a la dimension {dim}, attendu {ENERGY}", name)
    if isinstance(dh.hamiltonian, LogNLS):
        report.log_argument = dh.coefficients["a"] ** 3 * dh.density
        if not report.log_argument.is_dimensionless:
            raise DimensionError(f"Argument du logarithme dimensionné: {report.log_argument}", "log")
    return report


def _kinetic(units: UnitSystem, mass: float) -> float:
    if not mass > 0:
        raise ValueError(f"La masse doit être > 0: {mass}")
    return units.h ** 2 / (2.0 * mass)


def _grid_coefficients(potential) -> Dict[str, Dimension]:
    coefficients = {"kinetic": ACTION ** 2 / MASS}
    if potential is not None:
        coefficients["potential"] = ENERGY
    return coefficients


def physical_quadratic(space: PhaseSpace, units: UnitSystem, H: SymplecticOperator) -> DimensionedHamiltonian:
    return DimensionedHamiltonian(QuadraticHamiltonian(space, H), units, {"H": ENERGY})


def physical_cubic_nls(space: PhaseSpace, units: UnitSystem, mass: float, alpha_c: float, potential=None) -> DimensionedHamiltonian:
    """-(h²/2m)Δ + V + α_c|Ψ|², α_c en E·L³."""
    H = CubicNLS(space, alpha_c, potential, _kinetic(units, mass))
    coefficients = {**_grid_coefficients(potential), "alpha_c": ENERGY * VOLUME}
    return DimensionedHamiltonian(H, units, coefficients)


def physical_log_nls(space: PhaseSpace, units: UnitSystem, mass: float, b: float, a: float, potential=None) -> DimensionedHamiltonian:
    """b ln(a³|Ψ|²) : b énergie, a longueur (explicite en mode physique)."""
    H = LogNLS(space, b, a, potential, _kinetic(units, mass))
    coefficients = {**_grid_coefficients(potential), "b": ENERGY, "a": LENGTH}
    return DimensionedHamiltonian(H, units, coefficients)


def physical_general_f(space: PhaseSpace, units: UnitSystem, mass: float, F, F_primitive=None, potential=None, name: str = "F") -> DimensionedHamiltonian:
    """F(|Ψ|²) a la dimension d'une énergie (F(|Ψ|²)Ψ comme VΨ)."""
    H = GeneralF(space, F, F_primitive, potential, _kinetic(units, mass), name=name)
    coefficients = {**_grid_coefficients(potential), "F": ENERGY}
    return DimensionedHamiltonian(H, units, coefficients)


def physical_bilinear(
    space: PhaseSpace,
    units: UnitSystem,
    hlin: SymplecticOperator,
    alpha_c: float,
    gamma1: SymplecticOperator,
    gamma2: SymplecticOperator,
) -> DimensionedHamiltonian:
    H = BilinearHamiltonian(space, hlin, alpha_c, gamma1, gamma2)
    coefficients = {"hlin": ENERGY, "alpha_c": ENERGY, "gamma1": DIMENSIONLESS, "gamma2": DIMENSIONLESS}
    return DimensionedHamiltonian(H, units, coefficients)


def with_coefficient(dh: DimensionedHamiltonian, name: str, dimension: Dimension) -> DimensionedHamiltonian:
    """Copie avec la dimension d'un coefficient remplacée."""
    return replace(dh, coefficients={**dh.coefficients, name: dimension})
