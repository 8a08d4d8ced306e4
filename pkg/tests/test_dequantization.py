import numpy as np
import numpy.testing as npt
import pytest

from pcsft.dequantization import (
    AsymptoticsReport,
    AverageEstimate,
    classical_average,
    dequantize_variable,
    isserlis_expectation,
    quantum_average,
    trace_formula_check,
    verify_asymptotics,
)
from pcsft.errors import DimensionMismatchError, NoiseDominatedError, PCSFTError
from pcsft.phase_space import ComplexOperator, PhaseSpace, SymplecticOperator, random_symplectic_operator, to_complex_operator
from pcsft.states import DensityOperator, from_density_operator, random_density_operator, random_state
from pcsft.variables import ClassicalVariable, KernelQuartic, Quadratic, Smooth, smooth_library


QUARTIC_ALPHAS = list(np.logspace(-1, -4, 5))


def test_quantum_average_of_identity():
    assert quantum_average(np.eye(3), DensityOperator.maximally_mixed(3)) == pytest.approx(1.0)


def test_quantum_average_matches_spectral_decomposition(rng):
    for _ in range(10):
        A = to_complex_operator(random_symplectic_operator(4, rng))
        D = random_density_operator(4, rng)
        weights, vectors = np.linalg.eigh(D.D)
        expected = sum(w * np.vdot(v, A.M @ v).real for w, v in zip(weights, vectors.T))
        assert quantum_average(A, D) == pytest.approx(expected, abs=1e-12)


def test_quantum_average_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        quantum_average(ComplexOperator(np.eye(2)), DensityOperator.maximally_mixed(3))


def test_dequantize_quadratic_variable(rng):
    A = random_symplectic_operator(3, rng)
    M = dequantize_variable(ClassicalVariable.of(Quadratic(0.5, A))).M
    npt.assert_allclose(M, to_complex_operator(A).M, atol=1e-15)


def test_dequantization_is_linear(rng, quartic_variable):
    g = ClassicalVariable.of(Quadratic(1.0, random_symplectic_operator(3, rng)), KernelQuartic(1.0, 3))
    combined = dequantize_variable(quartic_variable + 2.5 * g).M
    separate = dequantize_variable(quartic_variable).M + 2.5 * dequantize_variable(g).M
    npt.assert_allclose(combined, separate, atol=1e-12)


def test_smooth_dequantization_by_finite_differences():
    M = dequantize_variable(ClassicalVariable.of(smooth_library(2)["damped_norm"])).M
    npt.assert_allclose(M, 2.0 * np.eye(2), atol=1e-6)


def test_kernel_quartic_isserlis_moment():
    alpha = 0.2
    state = from_density_operator(DensityOperator.maximally_mixed(1), alpha)
    f = ClassicalVariable.of(KernelQuartic(1.0, 1))
    # q, p ~ N(0, α/2) : E[(q² + p²)²] = 2α²
    assert isserlis_expectation(f, state) == pytest.approx(2 * alpha ** 2, rel=1e-12)


def test_isserlis_rejects_smooth_terms():
    f = ClassicalVariable.of(smooth_library(1)["sine_norm"])
    with pytest.raises(PCSFTError):
        isserlis_expectation(f, np.eye(2))


def test_monte_carlo_agrees_with_isserlis(quartic_variable):
    D = random_density_operator(3, np.random.default_rng(11))
    state = from_density_operator(D, 0.5)
    estimate = classical_average(quartic_variable, state, count=200_000, seed=5)
    assert estimate.within(isserlis_expectation(quartic_variable, state), sigmas=4.0)


def test_monte_carlo_agrees_with_isserlis_for_kernel_quartic(rng):
    state = random_state(PhaseSpace.abstract(2), rng, alpha=1.0)
    f = ClassicalVariable.of(KernelQuartic(1.0, 2))
    estimate = classical_average(f, state, count=200_000, seed=2)
    assert estimate.within(isserlis_expectation(f, state), sigmas=4.0)


def test_classical_average_is_thread_independent(quartic_variable, rng):
    state = random_state(PhaseSpace.abstract(3), rng)
    serial = classical_average(quartic_variable, state, count=50_000, seed=1, workers=1)
    threaded = classical_average(quartic_variable, state, count=50_000, seed=1, workers=3)
    assert serial == threaded


def test_trace_formula_check(rng):
    A = random_symplectic_operator(3, rng)
    state = random_state(PhaseSpace.abstract(3), rng, alpha=1.0)
    result = trace_formula_check(A, state, count=100_000, seed=4)
    assert abs(result.z_score) <= 4.0
    assert result.passed
    assert result.to_dict()["analytic"] == result.analytic


def test_trace_formula_identity_gives_alpha():
    alpha = 0.5
    state = from_density_operator(DensityOperator.maximally_mixed(1), alpha)
    result = trace_formula_check(SymplecticOperator.identity(1), state, count=100_000, seed=0)
    assert result.analytic == pytest.approx(alpha, rel=1e-14)
    assert result.monte_carlo.within(alpha)


def test_quadratic_remainder_is_exact():
    f = ClassicalVariable.of(Quadratic(0.5, random_symplectic_operator(3, np.random.default_rng(5))))
    report = verify_asymptotics(f, DensityOperator.maximally_mixed(3), [0.1, 0.01, 0.001], path="isserlis")
    assert report.status == "exact"
    npt.assert_allclose(report.remainder, 0.0, atol=1e-15)
    assert report.fitted_slope is None


def test_isserlis_remainder_slope(quartic_variable):
    D = random_density_operator(3, np.random.default_rng(11))
    report = verify_asymptotics(quartic_variable, D, QUARTIC_ALPHAS, path="isserlis")
    assert report.status == "fitted"
    assert report.fitted_slope == pytest.approx(2.0, abs=1e-6)
    assert report.fit_points == [0, 1, 2, 3, 4]


def test_auto_path_picks_isserlis_for_polynomials(quartic_variable):
    report = verify_asymptotics(quartic_variable, DensityOperator.maximally_mixed(3), [0.1, 0.01, 0.001])
    assert report.path == "isserlis"


def test_monte_carlo_remainder_slope(quartic_variable):
    D = random_density_operator(3, np.random.default_rng(11))
    report = verify_asymptotics(quartic_variable, D, QUARTIC_ALPHAS, count=100_000, seed=3, path="monte-carlo")
    assert report.path == "monte-carlo"
    assert report.slope_within(1.8, 2.2)
    assert all(c.std_error > 0 for c in report.classical)


@pytest.mark.slow
def test_monte_carlo_remainder_slope_full_count(quartic_variable):
    D = random_density_operator(3, np.random.default_rng(11))
    report = verify_asymptotics(quartic_variable, D, QUARTIC_ALPHAS, count=1_000_000, seed=42, path="monte-carlo", workers=2)
    assert report.slope_within(1.8, 2.2)


def test_noise_dominated_remainder():
    cube = Smooth(lambda X: X[:, 0] ** 3, 1, vectorized=True, name="cube")
    with pytest.raises(NoiseDominatedError) as excinfo:
        verify_asymptotics(ClassicalVariable.of(cube), DensityOperator.maximally_mixed(1), [0.1, 0.01, 0.001], count=2000, path="monte-carlo")
    assert excinfo.value.report.status == "noise-dominated"


def test_alphas_validation(quartic_variable):
    D = DensityOperator.maximally_mixed(3)
    with pytest.raises(ValueError):
        verify_asymptotics(quartic_variable, D, [0.1, 0.01])
    with pytest.raises(ValueError):
        verify_asymptotics(quartic_variable, D, [0.01, 0.1, 0.001])


def test_isserlis_path_requires_polynomial():
    f = ClassicalVariable.of(smooth_library(1)["sine_norm"])
    with pytest.raises(PCSFTError):
        verify_asymptotics(f, DensityOperator.maximally_mixed(1), [0.1, 0.01, 0.001], path="isserlis")


def test_report_frame_and_amplification(quartic_variable):
    report = verify_asymptotics(quartic_variable, DensityOperator.maximally_mixed(3), QUARTIC_ALPHAS)
    frame = report.to_frame()
    assert list(frame.columns) == ["alpha", "classical", "classical_stderr", "quantum_term", "remainder"]
    payload = report.to_dict()
    # f/α tend vers ½⟨T(f)⟩ quand α → 0
    last = payload["rows"][-1]
    assert last["classical_over_alpha"] == pytest.approx(last["half_quantum_average"], abs=1e-3)


def test_report_requires_decreasing_alphas():
    estimates = [AverageEstimate(0.0, 0.0, 0, 0)] * 3
    with pytest.raises(PCSFTError):
        AsymptoticsReport([0.1, 0.2, 0.01], estimates, [0.0] * 3, [0.0] * 3)
