"""Champs sur grille périodique : quadrature, laplacien spectral, champs initiaux"""

from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
import pandas as pd

from ..errors import DimensionMismatchError, StructureError
from ..phase_space import PhaseSpace, PhaseVector, SymplecticOperator


def as_field(space: PhaseSpace, psi: Union[PhaseVector, np.ndarray]) -> np.ndarray:
    """Champ complexe : forme de la grille, ou (n,) en base abstraite."""
    values = psi.to_complex() if isinstance(psi, PhaseVector) else np.asarray(psi)
    values = values.astype(np.result_type(values.dtype, np.complex64), copy=False)
    shape = space.grid.shape if space.is_grid else (space.n,)
    if values.size != space.n:
        raise DimensionMismatchError(f"Champ de taille {values.size} pour n={space.n}")
    return values.reshape(shape)


def cell_weight(space: PhaseSpace) -> float:
    """Poids de quadrature (L/N)^d ; 1 en base abstraite."""
    return space.grid.cell_volume if space.is_grid else 1.0


def integrate(space: PhaseSpace, density: np.ndarray) -> float:
    return float(cell_weight(space) * np.sum(density))


def field_norm(space: PhaseSpace, psi: np.ndarray) -> float:
    """‖Ψ‖² = ∫|Ψ|²."""
    return integrate(space, np.abs(psi) ** 2)


def _require_grid(space: PhaseSpace):
    if not space.is_grid:
        raise StructureError("Opération réservée aux espaces sur grille")


def laplacian(space: PhaseSpace, psi: np.ndarray) -> np.ndarray:
    """ΔΨ spectral (Fourier, périodique)."""
    _require_grid(space)
    k2 = space.grid.wavenumbers_squared()
    return np.fft.ifftn(-k2 * np.fft.fftn(psi))


def gradient_energy(space: PhaseSpace, psi: np.ndarray) -> float:
    """∫|∇Ψ|² par Parseval."""
    _require_grid(space)
    k2 = space.grid.wavenumbers_squared()
    spectrum = np.abs(np.fft.fftn(psi)) ** 2
    return float(cell_weight(space) * np.sum(k2 * spectrum) / space.n)


def grid_operator(space: PhaseSpace, potential: Optional[np.ndarray] = None, kinetic: float = 0.5) -> SymplecticOperator:
    """
    Matrice dense de -κΔ + V (petites grilles uniquement).

    Le laplacien spectral périodique est réel symétrique ; T = 0.
    """
    _require_grid(space)
    basis = np.eye(space.n).reshape((space.n,) + space.grid.shape)
    columns = [laplacian(space, e).real.reshape(-1) for e in basis]
    lap = np.array(columns).T
    R = -kinetic * 0.5 * (lap + lap.T)
    if potential is not None:
        R = R + np.diag(np.asarray(potential, dtype=float).reshape(-1))
    return SymplecticOperator(R, np.zeros_like(R))


def plane_wave(space: PhaseSpace, amplitude: float = 1.0, mode: int = 10) -> np.ndarray:
    """A·e^{ikx} le long du premier axe, k = 2π·mode/L."""
    _require_grid(space)
    x = space.grid.coordinates()[0]
    k = 2 * np.pi * mode / space.grid.box_length
    return amplitude * np.exp(1j * k * x)


def plane_wave_wavenumber(space: PhaseSpace, mode: int) -> float:
    return 2 * np.pi * mode / space.grid.box_length


def gaussian_packet(space: PhaseSpace, width: float = 1.0, center: float = 0.0, k0: float = 0.0, norm: float = 1.0) -> np.ndarray:
    """Paquet gaussien normalisé à ∫|Ψ|² = norm."""
    _require_grid(space)
    coords = space.grid.coordinates()
    r2 = sum((c - center) ** 2 for c in coords)
    psi = np.exp(-r2 / (2 * width ** 2)) * np.exp(1j * k0 * coords[0])
    return psi * np.sqrt(norm / field_norm(space, psi))


class GaussonParameters(NamedTuple):
    width_squared: float
    frequency: float
    period: float


def gausson_parameters(b: float, amplitude: float = 1.0, a: float = 1.0, d: int = 1) -> GaussonParameters:
    """
    Ansatz Ψ = A·exp(-|x|²/(2σ²))·e^{-iEt} dans i∂Ψ = -½ΔΨ + b ln(a³|Ψ|²)Ψ.

    Les termes en |x|² s'annulent pour σ² = -1/(2b) (b < 0) et
    E = -d·b + b·ln(a³A²).
    """
    if not b < 0:
        raise ValueError(f"Le gausson exige b < 0 avec la convention +b ln|Ψ|²: b={b}")
    width_squared = -1.0 / (2.0 * b)
    frequency = -d * b + b * np.log(a ** 3 * amplitude ** 2)
    period = 2 * np.pi / abs(frequency) if frequency != 0 else np.inf
    return GaussonParameters(width_squared, float(frequency), float(period))


def gausson(space: PhaseSpace, b: float, amplitude: float = 1.0, a: float = 1.0) -> np.ndarray:
    _require_grid(space)
    params = gausson_parameters(b, amplitude, a, space.grid.d)
    r2 = sum(c ** 2 for c in space.grid.coordinates())
    return (amplitude * np.exp(-r2 / (2 * params.width_squared))).astype(complex)


def load_field(space: PhaseSpace, path: Union[str, Path]) -> np.ndarray:
    """
    Champ initial depuis un fichier : .npy complexe, ou Parquet (colonnes re, im).

    Pour un Parquet de snapshots, la dernière étape est utilisée.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier de champ introuvable: {path}")
    if path.suffix == ".npy":
        values = np.load(path)
    else:
        df = pd.read_parquet(path)
        if "step" in df.columns:
            df = df[df["step"] == df["step"].max()].sort_values("index")
        values = df["re"].to_numpy() + 1j * df["im"].to_numpy()
    return as_field(space, values)
