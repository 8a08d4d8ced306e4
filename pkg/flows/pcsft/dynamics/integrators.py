"""Intégrateurs : flot linéaire exact, Strang split-step, point milieu implicite"""

from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from scipy.linalg import expm

from ..errors import BlowUpError, ConvergenceError, StructureError
from ..phase_space import (
    ComplexOperator,
    PhaseSpace,
    PhaseVector,
    SymplecticOperator,
    assemble,
    symplectic_matrix,
    to_complex_operator,
)
from .hamiltonians import BilinearHamiltonian, Hamiltonian, LocalHamiltonian, checked_field


BLOWUP_FACTOR = 10.0
MIDPOINT_TOL = 1e-14
MIDPOINT_MAX_ITER = 100


@dataclass
class Trajectory:
    """Échantillons (t, Ψ, ‖Ψ‖², H) d'une intégration."""

    space: PhaseSpace
    steps: List[int] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)
    norms: List[float] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)

    def record(self, step: int, t: float, psi: np.ndarray, norm: float, energy: float):
        if self.times and t <= self.times[-1]:
            raise ValueError(f"Temps non croissant: {t} <= {self.times[-1]}")
        self.steps.append(step)
        self.times.append(t)
        self.states.append(psi.copy())
        self.norms.append(norm)
        self.energies.append(energy)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norm_drift(self) -> float:
        norms = np.asarray(self.norms)
        return float(np.abs(norms - norms[0]).max() / max(abs(norms[0]), 1e-300))

    def energy_drift(self) -> float:
        energies = np.asarray(self.energies)
        scale = max(abs(energies[0]), 1e-300)
        return float(np.abs(energies - energies[0]).max() / scale)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "norm": self.norms, "energy": self.energies})

    def snapshots_frame(self) -> pd.DataFrame:
        """Format long (step, t, index, re, im) pour les snapshots Parquet."""
        frames = []
        for step, t, psi in zip(self.steps, self.times, self.states):
            flat = psi.reshape(-1)
            frames.append(pd.DataFrame({
                "step": step,
                "t": t,
                "index": np.arange(flat.size),
                "re": flat.real,
                "im": flat.imag,
            }))
        return pd.concat(frames, ignore_index=True)


def _complex_matrix(H: Union[SymplecticOperator, ComplexOperator, np.ndarray]) -> np.ndarray:
    if isinstance(H, SymplecticOperator):
        return to_complex_operator(H).M
    if isinstance(H, ComplexOperator):
        return H.M
    return ComplexOperator(np.asarray(H, dtype=complex)).M


def evolve_linear(H, psi0: Union[PhaseVector, np.ndarray], t: float):
    """
    U_t Ψ0 = e^{−iMt} Ψ0 par décomposition spectrale de M hermitienne.

    Renvoie un PhaseVector si Ψ0 en est un, sinon un tableau complexe de même forme.
    """
    M = _complex_matrix(H)
    values = psi0.to_complex() if isinstance(psi0, PhaseVector) else np.asarray(psi0, dtype=complex)
    try:
        eigenvalues, U = np.linalg.eigh(M)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"Décomposition spectrale impossible: {e}") from e
    flat = U @ (np.exp(-1j * eigenvalues * t) * (U.conj().T @ values.reshape(-1)))
    if isinstance(psi0, PhaseVector):
        return PhaseVector.from_complex(flat)
    return flat.reshape(values.shape)


def evolve_linear_real(H: SymplecticOperator, y0: PhaseVector, t: float) -> PhaseVector:
    """Flot réel y(t) = exp(J·H̃·t)·y0 des équations de Hamilton."""
    generator = symplectic_matrix(H.n) @ assemble(H)
    return PhaseVector.from_array(expm(generator * t) @ y0.as_array())


def _norm(H: Hamiltonian, psi: np.ndarray) -> float:
    return H.weight * float(np.sum(np.abs(psi) ** 2))


def _sampled(step: int, steps: int, stride: int) -> bool:
    return step % stride == 0 or step == steps


def _check_blowup(step: int, t: float, psi: np.ndarray, norm: float, norm0: float, factor: float):
    ratio = norm / max(norm0, 1e-300)
    if not np.isfinite(norm) or not np.all(np.isfinite(psi)) or ratio > factor:
        raise BlowUpError(f"Explosion de la norme à l'étape {step} (t={t:g}, ratio={ratio:.3g})", step, t, ratio)


def _validate(dt: float, steps: int, sample_stride: int):
    if not dt > 0:
        raise ValueError(f"dt doit être > 0: {dt}")
    if steps < 1 or sample_stride < 1:
        raise ValueError(f"steps et sample_stride doivent être >= 1: {steps}, {sample_stride}")


def evolve_splitstep(
    H: LocalHamiltonian,
    psi0: Union[PhaseVector, np.ndarray],
    dt: float,
    steps: int,
    sample_stride: int = 1,
    blowup_factor: float = BLOWUP_FACTOR,
) -> Trajectory:
    """
    Strang : demi-pas local e^{−iW dt/2}, pas cinétique exact en Fourier, demi-pas local.

    W = V + rate(|Ψ|²) ; |Ψ| est constant pendant la rotation locale.
    """
    if not isinstance(H, LocalHamiltonian) or not H.splittable:
        raise StructureError(f"Split-step réservé aux Hamiltoniens locaux sur grille: {H.kind}")
    _validate(dt, steps, sample_stride)
    psi = checked_field(H, psi0).astype(complex)
    kinetic_phase = np.exp(-1j * H.kinetic * H.space.grid.wavenumbers_squared() * dt)

    trajectory = Trajectory(H.space)
    norm0 = _norm(H, psi)
    trajectory.record(0, 0.0, psi, norm0, H.energy(psi))
    for step in range(1, steps + 1):
        psi = psi * np.exp(-0.5j * dt * H.local_potential(psi))
        psi = np.fft.ifftn(kinetic_phase * np.fft.fftn(psi))
        psi = psi * np.exp(-0.5j * dt * H.local_potential(psi))
        norm = _norm(H, psi)
        _check_blowup(step, step * dt, psi, norm, norm0, blowup_factor)
        if _sampled(step, steps, sample_stride):
            trajectory.record(step, step * dt, psi, norm, H.energy(psi))
    return trajectory


def midpoint_step(H: Hamiltonian, psi: np.ndarray, dt: float, tol: float = MIDPOINT_TOL, max_iter: int = MIDPOINT_MAX_ITER) -> np.ndarray:
    """Ψ' = Ψ − i·dt·H′((Ψ + Ψ')/2) par itération de point fixe."""
    scale = 1.0 + np.abs(psi).max()
    guess = psi - 1j * dt * H.gradient(psi)
    for _ in range(max_iter):
        update = psi - 1j * dt * H.gradient(0.5 * (psi + guess))
        change = np.abs(update - guess).max()
        guess = update
        if change <= tol * scale:
            return guess
    raise ConvergenceError(f"Point milieu non convergé après {max_iter} itérations (écart {change:.3g})")


def evolve_midpoint(
    H: Hamiltonian,
    psi0: Union[PhaseVector, np.ndarray],
    dt: float,
    steps: int,
    sample_stride: int = 1,
    tol: float = MIDPOINT_TOL,
    max_iter: int = MIDPOINT_MAX_ITER,
    blowup_factor: float = BLOWUP_FACTOR,
) -> Trajectory:
    """Point milieu implicite (ordre 2, conserve les invariants quadratiques)."""
    _validate(dt, steps, sample_stride)
    psi = checked_field(H, psi0).astype(complex)

    trajectory = Trajectory(H.space)
    norm0 = _norm(H, psi)
    trajectory.record(0, 0.0, psi, norm0, H.energy(psi))
    for step in range(1, steps + 1):
        psi = midpoint_step(H, psi, dt, tol, max_iter)
        norm = _norm(H, psi)
        _check_blowup(step, step * dt, psi, norm, norm0, blowup_factor)
        if _sampled(step, steps, sample_stride):
            trajectory.record(step, step * dt, psi, norm, H.energy(psi))
    return trajectory


def evolve_bilinear(
    H: BilinearHamiltonian,
    psi0: Union[PhaseVector, np.ndarray],
    dt: float,
    steps: int,
    sample_stride: int = 1,
    **kwargs,
) -> Trajectory:
    if not isinstance(H, BilinearHamiltonian):
        raise StructureError(f"evolve_bilinear attend un Hamiltonien bilinéaire: {H.kind}")
    if H.space.is_grid:
        raise StructureError("evolve_bilinear exige une base abstraite")
    return evolve_midpoint(H, psi0, dt, steps, sample_stride, **kwargs)


def evolve(
    H: Hamiltonian,
    psi0: Union[PhaseVector, np.ndarray],
    dt: float,
    steps: int,
    sample_stride: int = 1,
    method: Optional[str] = None,
) -> Trajectory:
    """Choix de l'intégrateur : split-step pour les locaux sur grille, point milieu sinon."""
    if method is None:
        method = "splitstep" if isinstance(H, LocalHamiltonian) and H.splittable else "midpoint"
    if method == "splitstep":
        return evolve_splitstep(H, psi0, dt, steps, sample_stride)
    if method == "midpoint":
        return evolve_midpoint(H, psi0, dt, steps, sample_stride)
    raise ValueError(f"Intégrateur inconnu: {method}")
