import numpy as np
import pytest

from pcsft.checks import (
    add_check,
    check_asymptotics,
    check_trace,
    check_trajectory,
    generate_check_report,
    mode_errors,
    profile_deviation,
    report_passed,
)
from pcsft.dequantization import trace_formula_check, verify_asymptotics
from pcsft.dynamics import Trajectory
from pcsft.phase_space import PhaseSpace, SymplecticOperator, random_symplectic_operator
from pcsft.states import DensityOperator, from_density_operator
from pcsft.variables import ClassicalVariable, Quadratic


def make_trajectory(space, states, norms, energies):
    trajectory = Trajectory(space)
    for step, (psi, norm, value) in enumerate(zip(states, norms, energies)):
        trajectory.record(step, 0.1 * step, np.asarray(psi, dtype=complex), norm, value)
    return trajectory


def test_check_trajectory_statuses(abstract_space):
    psi = np.ones(3)
    trajectory = make_trajectory(abstract_space, [psi] * 3, [1.0, 1.0, 1.0 + 1e-9], [2.0, 2.1, 2.0])
    report = check_trajectory(trajectory, {"norm_drift": 1e-8, "energy_drift": 1e-3, "unknown": 1.0}, "demo")
    assert report["checks"]["norm_drift"]["status"] == "✅"
    assert report["checks"]["energy_drift"]["status"] == "❌"
    assert report["checks"]["energy_drift"]["value"] == pytest.approx(0.05)
    assert "unknown" not in report["checks"]
    assert not report_passed(report)


def test_add_check_and_non_finite_values():
    report = {"name": "demo", "checks": {}}
    add_check(report, "phase_error", 1e-9, 1e-6, details="onde plane")
    assert report_passed(report)
    assert report["checks"]["phase_error"]["details"] == "onde plane"
    add_check(report, "nan", float("nan"), 1.0)
    assert report["checks"]["nan"]["status"] == "❌"
    assert not report_passed(report)


def test_profile_deviation(abstract_space):
    psi = np.array([1.0, 2.0, 2.0])
    trajectory = make_trajectory(abstract_space, [psi, psi * np.exp(1j), psi * 1.1], [1.0] * 3, [1.0] * 3)
    assert profile_deviation(trajectory) == pytest.approx(0.1)


def test_mode_errors_for_exact_rotation(abstract_space):
    psi0 = np.array([1.0, 0.5, 0.25j])
    frequencies = np.array([0.5, 1.0, 1.5])
    shift = 0.1 * np.sum(np.abs(psi0) ** 2)
    final = psi0 * np.exp(-1j * (frequencies + shift) * 0.1)
    trajectory = make_trajectory(abstract_space, [psi0, final], [1.0] * 2, [1.0] * 2)
    amplitude, phase = mode_errors(trajectory, frequencies, 0.1)
    assert amplitude < 1e-15
    assert phase < 1e-14


def test_check_asymptotics_exact():
    f = ClassicalVariable.of(Quadratic(0.5, SymplecticOperator.identity(2)))
    report = verify_asymptotics(f, DensityOperator.maximally_mixed(2), [0.1, 0.01, 0.001])
    result = check_asymptotics(report)
    assert report_passed(result)
    assert "remainder" in result["checks"]


def test_check_asymptotics_fitted(quartic_variable):
    report = verify_asymptotics(quartic_variable, DensityOperator.maximally_mixed(3), list(np.logspace(-1, -4, 5)))
    assert report_passed(check_asymptotics(report))
    assert not report_passed(check_asymptotics(report, slope_range=(2.5, 3.0)))


def test_check_trace(rng):
    state = from_density_operator(DensityOperator.maximally_mixed(2), 1.0)
    results = [trace_formula_check(random_symplectic_operator(2, rng), state, count=20_000, seed=i) for i in range(3)]
    report = check_trace(results)
    assert set(report["checks"]) == {"trial_0", "trial_1", "trial_2"}
    assert report["samples"] == 3


def test_generate_check_report_output(capsys, abstract_space):
    trajectory = make_trajectory(abstract_space, [np.ones(3)] * 2, [1.0, 1.0], [1.0, 1.0])
    generate_check_report([check_trajectory(trajectory, {"norm_drift": 1e-8}, "cubic-nls")])
    out = capsys.readouterr().out
    assert "RAPPORT DE VÉRIFICATION" in out
    assert "cubic-nls (2 échantillons)" in out
    assert "norm_drift" in out
