"""Variables physiques classiques f ∈ V_symp(Ω) : évaluation, hessienne en 0, scaling f ↦ f_Q"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatchError, EvaluationError, NonSmoothError, PCSFTError
from .phase_space import (
    PhaseVector,
    SymplecticOperator,
    apply_J_array,
    assemble,
    project_symplectic,
)


FD_RESIDUAL_TOL = 1e-4
J_INVARIANCE_TOL = 1e-10


@dataclass(frozen=True)
class Quadratic:
    """coeff·(Aψ, ψ)"""

    coeff: float
    A: SymplecticOperator

    @property
    def n(self) -> int:
        return self.A.n

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        A = assemble(self.A)
        return self.coeff * np.einsum("ij,jk,ik->i", X, A, X)

    def hessian(self) -> np.ndarray:
        return 2.0 * self.coeff * assemble(self.A)

    def scaled(self, alpha: float) -> "Quadratic":
        return self

    def times(self, c: float) -> "Quadratic":
        return replace(self, coeff=c * self.coeff)


@dataclass(frozen=True)
class FactoredQuartic:
    """coeff·(Γ1ψ, ψ)(Γ2ψ, ψ)"""

    coeff: float
    gamma1: SymplecticOperator
    gamma2: SymplecticOperator

    @property
    def n(self) -> int:
        return self.gamma1.n

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        g1 = np.einsum("ij,jk,ik->i", X, assemble(self.gamma1), X)
        g2 = np.einsum("ij,jk,ik->i", X, assemble(self.gamma2), X)
        return self.coeff * g1 * g2

    def hessian(self) -> np.ndarray:
        dim = 2 * self.n
        return np.zeros((dim, dim))

    def scaled(self, alpha: float) -> "FactoredQuartic":
        return replace(self, coeff=alpha * self.coeff)

    def times(self, c: float) -> "FactoredQuartic":
        return replace(self, coeff=c * self.coeff)


@dataclass(frozen=True)
class KernelQuartic:
    """coeff·Σ_x w·|Ψ(x)|⁴ (noyau δ, poids de quadrature w)."""

    coeff: float
    n: int
    weight: float = 1.0

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        density = X[:, : self.n] ** 2 + X[:, self.n :] ** 2
        return self.coeff * self.weight * np.sum(density ** 2, axis=1)

    def hessian(self) -> np.ndarray:
        return np.zeros((2 * self.n, 2 * self.n))

    def scaled(self, alpha: float) -> "KernelQuartic":
        return replace(self, coeff=alpha * self.coeff)

    def times(self, c: float) -> "KernelQuartic":
        return replace(self, coeff=c * self.coeff)


@dataclass(frozen=True)
class Smooth:
    """
    Terme lisse arbitraire ψ ↦ coeff·func(ψ) avec func(0) = 0.

    `func` reçoit le vecteur réel (q, p) de longueur 2n, ou un tableau
    (m, 2n) si `vectorized`. `hessian_at_zero` optionnelle (analytique, celle de func).
    `exponential_growth` déclare la condition de croissance, non vérifiée.
    """

    func: Callable[[np.ndarray], Union[float, np.ndarray]]
    n: int
    hessian_at_zero: Optional[np.ndarray] = None
    vectorized: bool = False
    exponential_growth: bool = True
    name: str = "smooth"
    coeff: float = 1.0

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            if self.vectorized:
                values = np.asarray(self.func(X), dtype=float).reshape(-1)
            else:
                values = np.array([float(self.func(row)) for row in X])
            return self.coeff * values

    def hessian(self) -> Optional[np.ndarray]:
        if self.hessian_at_zero is None:
            return None
        return self.coeff * np.asarray(self.hessian_at_zero, dtype=float)

    def scaled(self, alpha: float) -> "Smooth":
        root = np.sqrt(alpha)
        func = self.func
        return replace(self, func=lambda x: func(root * x) / alpha, name=f"{self.name}_Q")

    def times(self, c: float) -> "Smooth":
        return replace(self, coeff=c * self.coeff)


Term = Union[Quadratic, FactoredQuartic, KernelQuartic, Smooth]


@dataclass(frozen=True)
class ClassicalVariable:
    """Somme structurée de termes J-invariants."""

    n: int
    terms: tuple = field(default_factory=tuple)
    name: str = ""

    def __post_init__(self):
        terms = tuple(self.terms)
        for term in terms:
            if term.n != self.n:
                raise DimensionMismatchError(f"Terme de dimension {term.n} dans une variable de dimension {self.n}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, *terms: Term, name: str = "") -> "ClassicalVariable":
        if not terms:
            raise PCSFTError("Au moins un terme requis (utiliser ClassicalVariable(n) pour la variable nulle)")
        return cls(terms[0].n, terms, name)

    @property
    def is_polynomial(self) -> bool:
        return not any(isinstance(t, Smooth) for t in self.terms)

    def quadratic_terms(self) -> List[Quadratic]:
        return [t for t in self.terms if isinstance(t, Quadratic)]

    def __add__(self, other: "ClassicalVariable") -> "ClassicalVariable":
        if other.n != self.n:
            raise DimensionMismatchError(f"Dimensions différentes: {self.n} vs {other.n}")
        return ClassicalVariable(self.n, self.terms + other.terms, self.name)

    def __mul__(self, c: float) -> "ClassicalVariable":
        return ClassicalVariable(self.n, tuple(t.times(float(c)) for t in self.terms), self.name)

    __rmul__ = __mul__


def _as_batch(f: ClassicalVariable, values) -> np.ndarray:
    X = values.as_array() if isinstance(values, PhaseVector) else np.asarray(values, dtype=float)
    X = np.atleast_2d(X)
    if X.shape[1] != 2 * f.n:
        raise DimensionMismatchError(f"Vecteur de dimension {X.shape[1]} pour une variable sur R^{2 * f.n}")
    return X


def evaluate_batch(f: ClassicalVariable, X: np.ndarray, offset: int = 0) -> np.ndarray:
    """
    Évalue f sur des lignes (m, 2n).

    Raises:
        EvaluationError: valeur non finie (indice d'échantillon global inclus)
    """
    X = _as_batch(f, X)
    total = np.zeros(X.shape[0])
    for term in f.terms:
        total = total + term.evaluate_batch(X)
    bad = np.flatnonzero(~np.isfinite(total))
    if bad.size:
        index = offset + int(bad[0])
        raise EvaluationError(f"Valeur non finie pour l'échantillon {index}", sample_index=index)
    return total


def evaluate(f: ClassicalVariable, psi: PhaseVector) -> float:
    """Valeur f(ψ) (intégrande de ⟨f⟩_ρ)."""
    return float(evaluate_batch(f, psi)[0])


class HessianReport(NamedTuple):
    operator: SymplecticOperator
    projection_residual: float
    finite_difference_residual: float


def finite_difference_hessian(
    func: Callable[[np.ndarray], np.ndarray],
    dim: int,
    scale: float = 0.0,
    step: Optional[float] = None,
) -> tuple:
    """
    Hessienne en 0 par différences centrées + une extrapolation de Richardson.

    Returns:
        (hessienne extrapolée, écart max entre les deux niveaux)
    """
    h = step if step is not None else np.finfo(float).eps ** (1 / 3) * (1 + scale)
    eye = np.eye(dim)

    def central(h: float) -> np.ndarray:
        # points ±h e_i ± h e_j, évalués en un seul lot
        i, j = np.triu_indices(dim)
        shifts = h * (eye[i] + eye[j]), h * (eye[i] - eye[j])
        plus, minus = shifts
        values = func(np.vstack([plus, -plus, minus, -minus]))
        m = len(i)
        fpp, fmm, fpm, fmp = values[:m], values[m:2 * m], values[2 * m:3 * m], values[3 * m:]
        upper = (fpp + fmm - fpm - fmp) / (4 * h * h)
        H = np.zeros((dim, dim))
        H[i, j] = upper
        H[j, i] = upper
        return H

    coarse = central(h)
    fine = central(h / 2)
    extrapolated = (4 * fine - coarse) / 3
    return extrapolated, float(np.abs(fine - coarse).max(initial=0.0))


def hessian_report(f: ClassicalVariable, tol: float = FD_RESIDUAL_TOL) -> HessianReport:
    """
    f″(0) symétrisée et projetée sur L_symp,s, avec les résidus.

    Analytique pour les termes polynomiaux ; différences finies pour les
    termes Smooth sans hessienne fournie.
    """
    dim = 2 * f.n
    H = np.zeros((dim, dim))
    fd_residual = 0.0
    for term in f.terms:
        analytic = term.hessian()
        if analytic is not None:
            H = H + analytic
            continue
        term_hessian, residual = finite_difference_hessian(term.evaluate_batch, dim)
        if residual > tol * (1 + np.abs(term_hessian).max(initial=0.0)):
            raise NonSmoothError(
                f"Différences finies non convergentes pour '{term.name}' (résidu {residual:.3e})"
            )
        fd_residual = max(fd_residual, residual)
        H = H + term_hessian
    operator, projection_residual = project_symplectic(H)
    return HessianReport(operator, projection_residual, fd_residual)


def hessian_at_zero(f: ClassicalVariable) -> SymplecticOperator:
    """f″(0) ∈ L_symp,s(Ω)."""
    return hessian_report(f).operator


class JInvarianceResult(NamedTuple):
    passed: bool
    max_residual: float


def is_J_invariant(f: ClassicalVariable, trials: int = 100, seed: int = 0) -> JInvarianceResult:
    """Teste f(Jψ) = f(ψ) sur des ψ aléatoires de la sphère unité."""
    if trials < 1:
        raise ValueError(f"trials doit être >= 1: {trials}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((trials, 2 * f.n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    values = evaluate_batch(f, X)
    rotated = evaluate_batch(f, apply_J_array(X))
    diff = np.abs(rotated - values)
    passed = bool(np.all(diff <= J_INVARIANCE_TOL * (1 + np.abs(values))))
    return JInvarianceResult(passed, float(diff.max()))


def scale_variable(f: ClassicalVariable, alpha: float) -> ClassicalVariable:
    """f_Q(Ψ) = f(√α Ψ)/α terme à terme."""
    if not alpha > 0:
        raise ValueError(f"alpha doit être > 0: {alpha}")
    return ClassicalVariable(f.n, tuple(t.scaled(alpha) for t in f.terms), f.name)


def quadratic_part(f: ClassicalVariable) -> ClassicalVariable:
    """Partie de Taylor d'ordre 2 : ½(f″(0)ψ, ψ)."""
    return ClassicalVariable(f.n, (Quadratic(0.5, hessian_at_zero(f)),), f"{f.name}_2")


def operator_spec(op: SymplecticOperator) -> dict:
    return {"kind": "matrix", "R": op.R.tolist(), "T": op.T.tolist()}


def variable_to_dict(f: ClassicalVariable) -> dict:
    """
    Sérialisation JSON relisible par `terms_from_specs`.

    Les termes Smooth sont référencés par leur nom dans `smooth_library`,
    avec leur coefficient.
    """
    terms = []
    for t in f.terms:
        if isinstance(t, Quadratic):
            terms.append({"type": "quadratic", "coeff": t.coeff, "operator": operator_spec(t.A)})
        elif isinstance(t, FactoredQuartic):
            terms.append({
                "type": "factored_quartic",
                "coeff": t.coeff,
                "gamma1": operator_spec(t.gamma1),
                "gamma2": operator_spec(t.gamma2),
            })
        elif isinstance(t, KernelQuartic):
            terms.append({"type": "kernel_quartic", "coeff": t.coeff, "weight": t.weight})
        else:
            terms.append({"type": "smooth", "name": t.name, "coeff": t.coeff})
    return {"n": f.n, "name": f.name, "terms": terms}


def smooth_library(n: int) -> dict:
    """Termes Smooth nommés, référencés depuis les configurations JSON."""

    def norm2(X):
        return np.sum(np.atleast_2d(X) ** 2, axis=1)

    return {
        "damped_norm": Smooth(
            lambda X: norm2(X) * np.exp(-norm2(X)), n,
            hessian_at_zero=None, vectorized=True, name="damped_norm",
        ),
        "log_cosh_norm": Smooth(
            lambda X: np.log(np.cosh(norm2(X))) + norm2(X), n,
            vectorized=True, name="log_cosh_norm",
        ),
        "sine_norm": Smooth(
            lambda X: np.sin(norm2(X)), n, vectorized=True, name="sine_norm",
        ),
    }


def terms_from_specs(n: int, specs: Sequence[dict], resolve_operator: Callable[[object], SymplecticOperator], weight: float = 1.0) -> List[Term]:
    """Construit les termes depuis leur description JSON."""
    library = smooth_library(n)
    terms: List[Term] = []
    for spec in specs:
        kind = spec["type"]
        if kind == "quadratic":
            terms.append(Quadratic(spec["coeff"], resolve_operator(spec["operator"])))
        elif kind == "factored_quartic":
            terms.append(FactoredQuartic(spec["coeff"], resolve_operator(spec["gamma1"]), resolve_operator(spec["gamma2"])))
        elif kind == "kernel_quartic":
            terms.append(KernelQuartic(spec["coeff"], n, spec.get("weight", weight)))
        elif kind == "smooth":
            if spec["name"] not in library:
                raise PCSFTError(f"Terme Smooth inconnu: {spec['name']}")
            terms.append(library[spec["name"]].times(spec.get("coeff", 1.0)))
        else:
            raise PCSFTError(f"Type de terme inconnu: {kind}")
    return terms
