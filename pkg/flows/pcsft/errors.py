"""Exceptions du laboratoire PCSFT"""

from typing import Optional


class PCSFTError(Exception):
    """Erreur de base de la librairie."""


class StructureError(PCSFTError):
    """Un opérateur ne respecte pas la structure [[R, T], [-T, R]]."""


class DimensionMismatchError(PCSFTError):
    """Dimensions incompatibles entre vecteurs, opérateurs ou états."""


class InvalidStateError(PCSFTError):
    """État statistique ou opérateur densité invalide."""


class NonHermitianError(PCSFTError):
    """Opérateur complexe non hermitien."""


class NonSmoothError(PCSFTError):
    """Les différences finies ne convergent pas : variable non C² en 0."""


class EvaluationError(PCSFTError):
    """Valeur non finie lors de l'évaluation d'une variable."""

    def __init__(self, message: str, sample_index: Optional[int] = None):
        super().__init__(message)
        self.sample_index = sample_index


class NoiseDominatedError(PCSFTError):
    """Les restes asymptotiques sont sous le plancher de bruit Monte Carlo."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class BlowUpError(PCSFTError):
    """Explosion de la norme pendant l'intégration."""

    def __init__(self, message: str, step: int, time: float, norm_ratio: float):
        super().__init__(message)
        self.step = step
        self.time = time
        self.norm_ratio = norm_ratio


class ConvergenceError(PCSFTError):
    """Le solveur du point milieu implicite n'a pas convergé."""


class DimensionError(PCSFTError):
    """Incohérence dimensionnelle d'un terme du Hamiltonien."""

    def __init__(self, message: str, term: str):
        super().__init__(message)
        self.term = term


class ConfigError(PCSFTError):
    """Configuration d'expérience invalide."""
