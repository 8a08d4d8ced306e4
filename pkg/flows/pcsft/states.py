"""États statistiques gaussiens J-invariants de dispersion α et opérateurs densité"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from .errors import DimensionMismatchError, InvalidStateError, NonHermitianError
from .phase_space import (
    ComplexOperator,
    PhaseSpace,
    PhaseVector,
    commutator_residual,
    complexify,
    realify,
)


PSD_TOL = 1e-12
DEFAULT_BATCH_SIZE = 1 << 14


@dataclass(frozen=True)
class DensityOperator:
    """Opérateur densité de von Neumann : hermitien, positif, trace 1."""

    D: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.D, dtype=complex)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise DimensionMismatchError(f"Matrice densité non carrée: {D.shape}")
        if np.abs(D - D.conj().T).max(initial=0.0) > PSD_TOL * (1 + np.abs(D).max()):
            raise NonHermitianError("Opérateur densité non hermitien")
        D = 0.5 * (D + D.conj().T)
        trace = np.trace(D).real
        if abs(trace - 1.0) > PSD_TOL:
            raise InvalidStateError(f"Trace de l'opérateur densité != 1: {trace}")
        if np.linalg.eigvalsh(D).min() < -PSD_TOL:
            raise InvalidStateError("Opérateur densité non positif")
        object.__setattr__(self, "D", D)

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityOperator":
        return cls(np.eye(n) / n)

    @classmethod
    def pure(cls, vector: np.ndarray) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True)
class GaussianState:
    """
    Mesure gaussienne centrée, symétrique et J-invariante sur Ω.

    B est l'opérateur de covariance réel (2n×2n) ; trace(B) = alpha.
    """

    space: PhaseSpace
    B: np.ndarray
    alpha: float
    name: str = ""

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        dim = self.space.real_dimension
        if B.shape != (dim, dim):
            raise DimensionMismatchError(f"Covariance {B.shape} pour un espace de dimension {dim}")
        if not self.alpha > 0:
            raise InvalidStateError(f"Dispersion alpha doit être > 0: {self.alpha}")
        norm = max(np.abs(B).max(initial=0.0), 1e-300)
        if np.abs(B - B.T).max() > PSD_TOL * norm:
            raise InvalidStateError("Covariance non symétrique")
        B = 0.5 * (B + B.T)
        if commutator_residual(B) > PSD_TOL * norm:
            raise InvalidStateError("Covariance non J-invariante (BJ != JB)")
        if np.linalg.eigvalsh(B).min() < -PSD_TOL * norm:
            raise InvalidStateError("Covariance non positive")
        if abs(np.trace(B) - self.alpha) > PSD_TOL * max(self.alpha, 1e-300):
            raise InvalidStateError(f"trace(B) = {np.trace(B)} != alpha = {self.alpha}")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return self.space.n

    def to_dict(self) -> dict:
        payload = self.space.to_dict()
        payload.update({"alpha": self.alpha, "B": self.B.reshape(-1).tolist(), "name": self.name})
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, payload: dict) -> "GaussianState":
        space = PhaseSpace.from_dict(payload)
        dim = space.real_dimension
        B = np.asarray(payload["B"], dtype=float).reshape(dim, dim)
        return cls(space, B, payload["alpha"], payload.get("name", ""))

    @classmethod
    def from_json(cls, text: str) -> "GaussianState":
        return cls.from_dict(json.loads(text))


def _as_density(D) -> DensityOperator:
    return D if isinstance(D, DensityOperator) else DensityOperator(np.asarray(D))


def from_density_operator(
    D: DensityOperator,
    alpha: float,
    space: Optional[PhaseSpace] = None,
    name: str = "",
) -> GaussianState:
    """
    Inverse à droite de T : B = (alpha/2)·realify(D).

    Args:
        D: Opérateur densité n×n
        alpha: Dispersion (> 0)
        space: Espace des phases (base abstraite de dimension n par défaut)

    Returns:
        État gaussien dont dequantize_state redonne D
    """
    if not alpha > 0:
        raise InvalidStateError(f"Dispersion alpha doit être > 0: {alpha}")
    D = _as_density(D)
    space = space or PhaseSpace.abstract(D.n)
    if space.n != D.n:
        raise DimensionMismatchError(f"Espace n={space.n} pour D de taille {D.n}")
    B = 0.5 * alpha * realify(D.D)
    return GaussianState(space, B, alpha, name)


def dispersion(state: GaussianState) -> float:
    """σ²(ρ) = ∫‖ψ‖² dρ = trace(B)."""
    return float(np.trace(state.B))


def scale_state(state: GaussianState) -> GaussianState:
    """√α-scaling ρ_scal : covariance B/alpha, dispersion 1."""
    return GaussianState(state.space, state.B / state.alpha, 1.0, state.name)


def complex_covariance(state: GaussianState) -> ComplexOperator:
    """B^c = 2B sous la correspondance realify (trace_c(B^c) = trace(B))."""
    return ComplexOperator(2.0 * complexify(state.B))


def sampling_factor(B: np.ndarray) -> np.ndarray:
    """
    Facteur L tel que L·Lᵀ = B.

    Cholesky, puis décomposition spectrale si B est (quasi) singulière.
    """
    try:
        return np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        eigenvalues, eigenvectors = np.linalg.eigh(B)
        norm = max(np.abs(eigenvalues).max(initial=0.0), 1e-300)
        if eigenvalues.min() < -PSD_TOL * norm:
            raise InvalidStateError("Covariance non positive, échantillonnage impossible")
        return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def batch_sizes(count: int, batch_size: int = DEFAULT_BATCH_SIZE) -> List[int]:
    full, rest = divmod(count, batch_size)
    return [batch_size] * full + ([rest] if rest else [])


def batch_generator(seed: int, batch_index: int) -> np.random.Generator:
    """Sous-flux déterministe dérivé de (seed, indice de lot)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(batch_index,)))


def iter_standard_batches(
    dim: int,
    seed: int,
    count: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    dtype=np.float64,
) -> Iterator[Tuple[int, np.ndarray]]:
    """(offset, ξ) : lots de normales standard de forme (taille, dim)."""
    offset = 0
    for index, size in enumerate(batch_sizes(count, batch_size)):
        xi = batch_generator(seed, index).standard_normal((size, dim), dtype=dtype)
        yield offset, xi.astype(np.float64, copy=False)
        offset += size


def map_batches(
    func: Callable[[int, np.ndarray], np.ndarray],
    dim: int,
    seed: int,
    count: int,
    workers: int = 1,
    batch_size: int = DEFAULT_BATCH_SIZE,
    dtype=np.float64,
) -> List[np.ndarray]:
    """
    Applique func(offset, ξ) à chaque lot ; résultats dans l'ordre des lots.

    L'ordre de réduction ne dépend pas du nombre de threads.
    """
    batches = list(iter_standard_batches(dim, seed, count, batch_size, dtype))
    if workers <= 1 or len(batches) == 1:
        return [func(offset, xi) for offset, xi in batches]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda item: func(*item), batches))


def sample_array(
    state: GaussianState,
    seed: int,
    count: int,
    workers: int = 1,
    dtype=np.float64,
) -> np.ndarray:
    """Tirages i.i.d. de N(0, B), forme (count, 2n)."""
    if count < 1:
        raise ValueError(f"count doit être >= 1: {count}")
    L = sampling_factor(state.B)
    chunks = map_batches(lambda _, xi: xi @ L.T, state.space.real_dimension, seed, count, workers, dtype=dtype)
    return np.vstack(chunks)


def sample(state: GaussianState, seed: int, count: int) -> List[PhaseVector]:
    """Réalisation Monte Carlo de ρ : liste de PhaseVector, déterministe par graine."""
    return [PhaseVector.from_array(row) for row in sample_array(state, seed, count)]


def random_density_operator(n: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    """Opérateur densité aléatoire de rang donné (plein rang par défaut)."""
    rank = rank or n
    G = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    D = G @ G.conj().T
    D = 0.5 * (D + D.conj().T)
    return DensityOperator(D / np.trace(D).real)


def random_state(space: PhaseSpace, rng: np.random.Generator, alpha: float = 1.0, name: str = "") -> GaussianState:
    return from_density_operator(random_density_operator(space.n, rng), alpha, space, name)
