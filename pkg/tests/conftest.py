import json
from pathlib import Path

import numpy as np
import pytest

from pcsft.phase_space import PhaseSpace, SymplecticOperator, random_symplectic_operator
from pcsft.variables import ClassicalVariable, FactoredQuartic, Quadratic


PRESETS_DIR = Path(__file__).resolve().parent.parent / "data" / "presets"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def abstract_space():
    return PhaseSpace.abstract(3)


@pytest.fixture
def small_grid():
    return PhaseSpace.spatial(1, 64, 16.0)


@pytest.fixture
def quartic_variable():
    """½(Aψ,ψ) + ¼(ψ,ψ)(Γ2ψ,ψ) en dimension 3, comme le preset quartic-demo."""
    A = random_symplectic_operator(3, np.random.default_rng(3))
    return ClassicalVariable.of(
        Quadratic(0.5, A),
        FactoredQuartic(0.25, SymplecticOperator.identity(3), SymplecticOperator.diagonal([1.0, 2.0, 3.0])),
        name="quartic",
    )


def load_preset(name: str) -> dict:
    with open(PRESETS_DIR / f"{name}.json", encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture(scope="session")
def prefect_harness():
    from prefect.testing.utilities import prefect_test_harness

    with prefect_test_harness():
        yield
