"""Espace des phases tronqué Ω = Q×P, opérateur symplectique J et algèbre L_symp,s"""

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import DimensionMismatchError, NonHermitianError, StructureError


HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class SpatialGrid:
    """Grille périodique équidistante de côté `box_length` en dimension d."""

    d: int
    points: int
    box_length: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise StructureError(f"Dimension spatiale non supportée: {self.d}")
        if self.points < 1:
            raise StructureError(f"Nombre de points invalide: {self.points}")
        if not self.box_length > 0:
            raise StructureError(f"Longueur de boîte invalide: {self.box_length}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points,) * self.d

    @property
    def spacing(self) -> float:
        return self.box_length / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.d

    @property
    def volume(self) -> float:
        return self.box_length ** self.d

    def axis(self) -> np.ndarray:
        """Coordonnées d'un axe, centrées sur 0 : [-L/2, L/2)."""
        return self.spacing * np.arange(self.points) - self.box_length / 2

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        axes = [self.axis()] * self.d
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers_squared(self) -> np.ndarray:
        """|k|² sur la grille de Fourier (ordre numpy.fft)."""
        k = 2 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)
        grids = np.meshgrid(*([k] * self.d), indexing="ij")
        return sum(g ** 2 for g in grids)


@dataclass(frozen=True)
class PhaseSpace:
    """
    Troncature de dimension n de Q = P = H.

    `grid` vaut None pour une base abstraite ; sinon n = points**d.
    """

    n: int
    grid: Optional[SpatialGrid] = None

    def __post_init__(self):
        if self.n < 1:
            raise StructureError(f"Dimension de troncature invalide: {self.n}")
        if self.grid is not None and self.grid.points ** self.grid.d != self.n:
            raise StructureError(
                f"n={self.n} incompatible avec la grille {self.grid.points}^{self.grid.d}"
            )

    @classmethod
    def abstract(cls, n: int) -> "PhaseSpace":
        return cls(n=n)

    @classmethod
    def spatial(cls, d: int = 1, points: int = 512, box_length: float = 2 * np.pi * 10) -> "PhaseSpace":
        grid = SpatialGrid(d=d, points=points, box_length=box_length)
        return cls(n=points ** d, grid=grid)

    @property
    def is_grid(self) -> bool:
        return self.grid is not None

    @property
    def representation(self) -> str:
        return "spatial-grid" if self.is_grid else "abstract-basis"

    @property
    def real_dimension(self) -> int:
        return 2 * self.n

    def to_dict(self) -> dict:
        if self.grid is None:
            return {"n": self.n, "representation": self.representation}
        return {
            "n": self.n,
            "representation": self.representation,
            "d": self.grid.d,
            "points": self.grid.points,
            "box_length": self.grid.box_length,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "PhaseSpace":
        if payload.get("representation", "abstract-basis") == "spatial-grid":
            return cls.spatial(payload["d"], payload["points"], payload["box_length"])
        return cls.abstract(payload["n"])


@dataclass(frozen=True)
class PhaseVector:
    """Point ψ = (q, p) de l'espace des phases."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if q.shape != p.shape:
            raise DimensionMismatchError(f"q et p de tailles différentes: {q.shape} vs {p.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("PhaseVector contient des valeurs non finies")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def as_array(self) -> np.ndarray:
        """Vecteur réel concaténé (q, p) de longueur 2n."""
        return np.concatenate([self.q, self.p])

    def to_complex(self) -> np.ndarray:
        """Identification Ω_c : Ψ = q + ip."""
        return self.q + 1j * self.p

    @classmethod
    def from_array(cls, values: np.ndarray) -> "PhaseVector":
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape[0] % 2:
            raise DimensionMismatchError(f"Longueur impaire: {values.shape[0]}")
        n = values.shape[0] // 2
        return cls(values[:n], values[n:])

    @classmethod
    def from_complex(cls, field_values: np.ndarray) -> "PhaseVector":
        flat = np.asarray(field_values, dtype=complex).reshape(-1)
        return cls(flat.real, flat.imag)

    @classmethod
    def zeros(cls, n: int) -> "PhaseVector":
        return cls(np.zeros(n), np.zeros(n))

    def __add__(self, other: "PhaseVector") -> "PhaseVector":
        return PhaseVector(self.q + other.q, self.p + other.p)

    def __neg__(self) -> "PhaseVector":
        return PhaseVector(-self.q, -self.p)

    def __mul__(self, scalar: float) -> "PhaseVector":
        return PhaseVector(scalar * self.q, scalar * self.p)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SymplecticOperator:
    """
    Opérateur de L_symp,s en forme bloc [[R, T], [-T, R]].

    R symétrique, T antisymétrique (tolérance relative 1e-12).
    """

    R: np.ndarray
    T: np.ndarray = field(default=None)

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        T = np.zeros_like(R) if self.T is None else np.asarray(self.T, dtype=float)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape != T.shape:
            raise StructureError(f"Blocs de formes incompatibles: R{R.shape}, T{T.shape}")
        scale = 1.0 + max(np.abs(R).max(initial=0.0), np.abs(T).max(initial=0.0))
        if np.abs(R - R.T).max(initial=0.0) > HERMITIAN_TOL * scale:
            raise StructureError("Le bloc R n'est pas symétrique")
        if np.abs(T + T.T).max(initial=0.0) > HERMITIAN_TOL * scale:
            raise StructureError("Le bloc T n'est pas antisymétrique")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "T", T)

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @classmethod
    def identity(cls, n: int) -> "SymplecticOperator":
        return cls(np.eye(n), np.zeros((n, n)))

    @classmethod
    def zero(cls, n: int) -> "SymplecticOperator":
        return cls(np.zeros((n, n)), np.zeros((n, n)))

    @classmethod
    def diagonal(cls, values) -> "SymplecticOperator":
        values = np.asarray(values, dtype=float)
        return cls(np.diag(values), np.zeros((values.size, values.size)))

    def __add__(self, other: "SymplecticOperator") -> "SymplecticOperator":
        return SymplecticOperator(self.R + other.R, self.T + other.T)

    def __mul__(self, scalar: float) -> "SymplecticOperator":
        return SymplecticOperator(scalar * self.R, scalar * self.T)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"R": self.R.tolist(), "T": self.T.tolist()}


@dataclass(frozen=True)
class ComplexOperator:
    """Opérateur C-linéaire hermitien M sur Ω_c."""

    M: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatchError(f"Matrice non carrée: {M.shape}")
        scale = 1.0 + np.abs(M).max(initial=0.0)
        if np.abs(M - M.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
            raise NonHermitianError("L'opérateur complexe n'est pas hermitien")
        object.__setattr__(self, "M", M)

    @property
    def n(self) -> int:
        return self.M.shape[0]


def symplectic_matrix(n: int) -> np.ndarray:
    """Matrice 2n×2n de J = [[0, 1], [-1, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def apply_J(v: PhaseVector) -> PhaseVector:
    """J(q, p) = (p, -q) ; réalise la multiplication par -i sur Ω_c."""
    return PhaseVector(v.p, -v.q)


def apply_J_array(values: np.ndarray) -> np.ndarray:
    """J appliqué à des vecteurs réels empilés, forme (..., 2n)."""
    n = values.shape[-1] // 2
    return np.concatenate([values[..., n:], -values[..., :n]], axis=-1)


def assemble(op: SymplecticOperator) -> np.ndarray:
    """
    Matrice réelle 2n×2n [[R, T], [-T, R]].

    Args:
        op: Opérateur symplectique (R symétrique, T antisymétrique)

    Returns:
        Matrice symétrique commutant avec J
    """
    if not isinstance(op, SymplecticOperator):
        raise StructureError(f"SymplecticOperator attendu, reçu {type(op).__name__}")
    return np.block([[op.R, op.T], [-op.T, op.R]])


def from_real_matrix(A: np.ndarray, tol: float = 1e-10) -> SymplecticOperator:
    """Découpe une matrice 2n×2n commutant avec J en blocs (R, T)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0] // 2
    R, T = A[:n, :n], A[:n, n:]
    scale = 1.0 + np.abs(A).max(initial=0.0)
    if np.abs(A[n:, n:] - R).max() > tol * scale or np.abs(A[n:, :n] + T).max() > tol * scale:
        raise StructureError("La matrice ne commute pas avec J")
    return SymplecticOperator(0.5 * (R + R.T), 0.5 * (T - T.T))


def to_complex_operator(op: SymplecticOperator) -> ComplexOperator:
    """[[R, T], [-T, R]] ↦ M = R - iT (A_c(q + ip) = M(q + ip))."""
    return ComplexOperator(op.R - 1j * op.T)


def realify(M: Union[ComplexOperator, np.ndarray]) -> np.ndarray:
    """Inverse de to_complex_operator : M = R - iT ↦ [[R, T], [-T, R]]."""
    M = M.M if isinstance(M, ComplexOperator) else np.asarray(M, dtype=complex)
    R = M.real
    T = -M.imag
    return np.block([[R, T], [-T, R]])


def complexify(B: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Matrice réelle J-invariante ↦ matrice complexe n×n R - iT."""
    op = from_real_matrix(B, tol=tol)
    return op.R - 1j * op.T


def complex_inner(u: PhaseVector, v: PhaseVector) -> complex:
    """
    Produit scalaire complexe ⟨u, v⟩ = Σ conj(U)·V, antilinéaire à gauche.

    Re⟨u, v⟩ = (q_u, q_v) + (p_u, p_v).
    """
    if u.n != v.n:
        raise DimensionMismatchError(f"Dimensions différentes: {u.n} vs {v.n}")
    return complex(np.vdot(u.to_complex(), v.to_complex()))


def real_inner(u: PhaseVector, v: PhaseVector) -> float:
    if u.n != v.n:
        raise DimensionMismatchError(f"Dimensions différentes: {u.n} vs {v.n}")
    return float(u.q @ v.q + u.p @ v.p)


def commutator_residual(A: np.ndarray) -> float:
    """‖AJ - JA‖_max."""
    J = symplectic_matrix(A.shape[0] // 2)
    return float(np.abs(A @ J - J @ A).max(initial=0.0))


def project_symplectic(H: np.ndarray) -> Tuple[SymplecticOperator, float]:
    """
    Symétrise puis projette sur L_symp,s : (H + J⁻¹HJ)/2.

    Returns:
        (opérateur projeté, résidu max de la projection)
    """
    H = 0.5 * (H + H.T)
    J = symplectic_matrix(H.shape[0] // 2)
    projected = 0.5 * (H + J.T @ H @ J)
    residual = float(np.abs(projected - H).max(initial=0.0))
    return from_real_matrix(projected), residual


def random_symplectic_operator(n: int, rng: np.random.Generator, scale: float = 1.0) -> SymplecticOperator:
    """Opérateur aléatoire de L_symp,s (blocs gaussiens normalisés par √n)."""
    X = rng.standard_normal((n, n))
    Y = rng.standard_normal((n, n))
    R = (X + X.T) / (2 * np.sqrt(n))
    T = (Y - Y.T) / (2 * np.sqrt(n))
    return SymplecticOperator(scale * R, scale * T)
