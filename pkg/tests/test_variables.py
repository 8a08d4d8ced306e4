import json

import numpy as np
import numpy.testing as npt
import pytest

from experiments import build_variable
from pcsft.errors import DimensionMismatchError, EvaluationError, NonSmoothError, PCSFTError
from pcsft.phase_space import PhaseVector, SymplecticOperator, apply_J, random_symplectic_operator
from pcsft.variables import (
    ClassicalVariable,
    FactoredQuartic,
    KernelQuartic,
    Quadratic,
    Smooth,
    evaluate,
    evaluate_batch,
    hessian_at_zero,
    hessian_report,
    is_J_invariant,
    quadratic_part,
    scale_variable,
    smooth_library,
    terms_from_specs,
    variable_to_dict,
)


def smooth(name, n=2):
    return ClassicalVariable.of(smooth_library(n)[name], name=name)


def test_quadratic_evaluation():
    f = ClassicalVariable.of(Quadratic(0.5, SymplecticOperator.identity(2)))
    assert evaluate(f, PhaseVector([1.0, 2.0], [3.0, 4.0])) == pytest.approx(15.0)


def test_factored_quartic_evaluation():
    f = ClassicalVariable.of(FactoredQuartic(1.0, SymplecticOperator.identity(1), SymplecticOperator.diagonal([2.0])))
    # (q² + p²)·2(q² + p²)
    assert evaluate(f, PhaseVector([1.0], [1.0])) == pytest.approx(8.0)


def test_kernel_quartic_evaluation():
    f = ClassicalVariable.of(KernelQuartic(1.0, 2, weight=0.5))
    assert evaluate(f, PhaseVector([1.0, 0.0], [1.0, 2.0])) == pytest.approx(0.5 * (4.0 + 16.0))


def test_variables_are_J_invariant(quartic_variable):
    result = is_J_invariant(quartic_variable)
    assert result.passed
    assert result.max_residual <= 1e-10


def test_non_invariant_variable_is_detected():
    f = ClassicalVariable.of(Smooth(lambda X: X[:, 0], 1, vectorized=True, name="q"))
    assert not is_J_invariant(f, trials=10).passed


def test_evaluation_is_unchanged_by_J(quartic_variable, rng):
    psi = PhaseVector(rng.standard_normal(3), rng.standard_normal(3))
    assert evaluate(quartic_variable, apply_J(psi)) == pytest.approx(evaluate(quartic_variable, psi), rel=1e-12)


def test_hessian_of_quadratic_term(rng):
    A = random_symplectic_operator(3, rng)
    H = hessian_at_zero(ClassicalVariable.of(Quadratic(0.5, A)))
    npt.assert_allclose(H.R, A.R, atol=1e-15)
    npt.assert_allclose(H.T, A.T, atol=1e-15)


def test_quartic_terms_have_zero_hessian(quartic_variable):
    quartic_only = ClassicalVariable(3, quartic_variable.terms[1:], "quartic_only")
    H = hessian_at_zero(quartic_only + ClassicalVariable.of(KernelQuartic(1.0, 3)))
    assert not H.R.any() and not H.T.any()


@pytest.mark.parametrize("name", ["damped_norm", "sine_norm", "log_cosh_norm"])
def test_smooth_hessians_by_finite_differences(name):
    report = hessian_report(smooth(name))
    npt.assert_allclose(report.operator.R, 2.0 * np.eye(2), atol=1e-6)
    npt.assert_allclose(report.operator.T, 0.0, atol=1e-6)
    assert report.projection_residual <= 1e-6


def test_analytic_hessian_is_used_when_given():
    term = Smooth(lambda x: float(np.sum(x ** 2)), 1, hessian_at_zero=2.0 * np.eye(2), name="norm2")
    npt.assert_array_equal(hessian_at_zero(ClassicalVariable.of(term)).R, [[2.0]])


def test_non_smooth_variable_is_rejected():
    norm = Smooth(lambda X: np.sqrt(np.sum(X ** 2, axis=1)), 1, vectorized=True, name="norm")
    with pytest.raises(NonSmoothError):
        hessian_at_zero(ClassicalVariable.of(norm))


def test_quadratic_part_is_second_order_taylor(quartic_variable, rng):
    f2 = quadratic_part(quartic_variable)
    psi = PhaseVector(rng.standard_normal(3), rng.standard_normal(3))
    expected = evaluate(ClassicalVariable(3, quartic_variable.terms[:1]), psi)
    assert evaluate(f2, psi) == pytest.approx(expected, rel=1e-12)


def scaling_suite(rng):
    A = random_symplectic_operator(2, rng)
    G = SymplecticOperator.diagonal([1.0, -1.0])
    library = smooth_library(2)
    return [
        ClassicalVariable.of(Quadratic(0.5, A)),
        ClassicalVariable.of(FactoredQuartic(1.0, G, G)),
        ClassicalVariable.of(KernelQuartic(0.3, 2)),
        ClassicalVariable.of(Quadratic(1.0, A), KernelQuartic(2.0, 2)),
        ClassicalVariable.of(Quadratic(0.5, A), FactoredQuartic(0.25, A, G)),
        ClassicalVariable.of(library["damped_norm"]),
        ClassicalVariable.of(library["sine_norm"]),
        ClassicalVariable.of(library["log_cosh_norm"]),
        ClassicalVariable.of(Quadratic(0.5, A), library["sine_norm"]),
        ClassicalVariable.of(library["damped_norm"], KernelQuartic(1.0, 2)),
    ]


def test_scaling_preserves_hessian(rng):
    for f in scaling_suite(rng):
        for alpha in (1e-1, 1e-3):
            H = hessian_at_zero(f)
            H_Q = hessian_at_zero(scale_variable(f, alpha))
            npt.assert_allclose(H_Q.R, H.R, atol=1e-8)
            npt.assert_allclose(H_Q.T, H.T, atol=1e-8)


def test_scaling_identity_on_random_points(rng):
    alpha = 0.01
    for f in scaling_suite(rng):
        f_Q = scale_variable(f, alpha)
        X = rng.standard_normal((100, 4))
        expected = evaluate_batch(f, np.sqrt(alpha) * X) / alpha
        npt.assert_allclose(evaluate_batch(f_Q, X), expected, rtol=1e-12, atol=1e-14)


def test_scaling_requires_positive_alpha(quartic_variable):
    with pytest.raises(ValueError):
        scale_variable(quartic_variable, 0.0)


def test_non_finite_values_report_sample_index():
    bad = Smooth(lambda X: np.where(X[:, 0] > 0.5, np.nan, X[:, 0] ** 2), 1, vectorized=True, name="bad")
    f = ClassicalVariable.of(bad)
    with pytest.raises(EvaluationError) as excinfo:
        evaluate_batch(f, np.array([[0.0, 0.0], [1.0, 0.0]]), offset=10)
    assert excinfo.value.sample_index == 11


def test_term_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        ClassicalVariable(2, (Quadratic(1.0, SymplecticOperator.identity(3)),))


def test_variable_algebra(quartic_variable, rng):
    g = ClassicalVariable.of(KernelQuartic(1.0, 3))
    psi = PhaseVector(rng.standard_normal(3), rng.standard_normal(3))
    total = evaluate(quartic_variable, psi) + 2.0 * evaluate(g, psi)
    assert evaluate(quartic_variable + 2.0 * g, psi) == pytest.approx(total, rel=1e-12)


def test_terms_from_specs():
    specs = [
        {"type": "quadratic", "coeff": 0.5, "operator": "I"},
        {"type": "factored_quartic", "coeff": 0.25, "gamma1": "I", "gamma2": "I"},
        {"type": "kernel_quartic", "coeff": 1.0},
        {"type": "smooth", "name": "sine_norm", "coeff": 2.0},
    ]
    terms = terms_from_specs(2, specs, lambda _: SymplecticOperator.identity(2))
    assert [type(t).__name__ for t in terms] == ["Quadratic", "FactoredQuartic", "KernelQuartic", "Smooth"]
    payload = variable_to_dict(ClassicalVariable(2, tuple(terms), "demo"))
    assert [t["type"] for t in payload["terms"]] == ["quadratic", "factored_quartic", "kernel_quartic", "smooth"]


def test_variable_json_round_trip(rng):
    terms = (
        Quadratic(0.5, random_symplectic_operator(2, rng)),
        FactoredQuartic(0.25, random_symplectic_operator(2, rng), SymplecticOperator.diagonal([1.0, 3.0])),
        KernelQuartic(0.75, 2, weight=0.5),
        smooth_library(2)["sine_norm"].times(2.0),
    )
    f = ClassicalVariable(2, terms, "demo")
    payload = json.loads(json.dumps(variable_to_dict(f)))
    assert payload["terms"][0]["operator"]["kind"] == "matrix"
    assert payload["terms"][3]["coeff"] == 2.0
    reloaded = build_variable(payload, 2)
    assert reloaded.name == "demo"
    X = 0.5 * rng.standard_normal((50, 4))
    npt.assert_allclose(evaluate_batch(reloaded, X), evaluate_batch(f, X), rtol=1e-12, atol=1e-14)


def test_smooth_coefficient_scales_hessian():
    term = Smooth(lambda x: float(np.sum(x ** 2)), 1, hessian_at_zero=2.0 * np.eye(2), name="norm2")
    doubled = term.times(3.0)
    assert doubled.coeff == 3.0
    npt.assert_allclose(doubled.hessian(), 6.0 * np.eye(2))
    assert doubled.evaluate_batch(np.array([[1.0, 1.0]]))[0] == pytest.approx(6.0)


def test_unknown_smooth_term():
    with pytest.raises(PCSFTError):
        terms_from_specs(1, [{"type": "smooth", "name": "missing"}], lambda _: None)
