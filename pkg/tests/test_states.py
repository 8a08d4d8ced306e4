import numpy as np
import numpy.testing as npt
import pytest

from pcsft.dequantization import dequantize_state
from pcsft.errors import InvalidStateError, NonHermitianError
from pcsft.phase_space import PhaseSpace, commutator_residual
from pcsft.states import (
    DEFAULT_BATCH_SIZE,
    DensityOperator,
    GaussianState,
    complex_covariance,
    dispersion,
    from_density_operator,
    random_density_operator,
    random_state,
    sample,
    sample_array,
    scale_state,
)


def test_maximally_mixed_state_has_dispersion_alpha():
    state = from_density_operator(DensityOperator.maximally_mixed(4), 0.3)
    assert dispersion(state) == pytest.approx(0.3, rel=1e-14)
    npt.assert_allclose(state.B, 0.3 / 8 * np.eye(8), atol=1e-16)


def test_covariance_is_J_invariant(rng):
    state = random_state(PhaseSpace.abstract(5), rng, alpha=2.0)
    assert commutator_residual(state.B) <= 1e-14
    assert np.linalg.eigvalsh(state.B).min() >= -1e-14


@pytest.mark.parametrize("n", [2, 4, 8])
def test_density_round_trip(rng, n):
    for _ in range(20):
        D = random_density_operator(n, rng)
        alpha = float(rng.uniform(1e-4, 1.0))
        back = dequantize_state(from_density_operator(D, alpha))
        npt.assert_allclose(back.D, D.D, atol=1e-12)
        assert np.trace(back.D).real == pytest.approx(1.0, abs=1e-12)


def test_pure_state_round_trip():
    D = DensityOperator.pure(np.array([1.0, 1j, 0.0]))
    back = dequantize_state(from_density_operator(D, 1e-3))
    npt.assert_allclose(back.D, D.D, atol=1e-12)


def test_complex_covariance_trace_equals_dispersion(rng):
    state = random_state(PhaseSpace.abstract(3), rng, alpha=0.7)
    assert np.trace(complex_covariance(state).M).real == pytest.approx(0.7, rel=1e-12)


def test_scaled_state_has_unit_dispersion(rng):
    state = random_state(PhaseSpace.abstract(3), rng, alpha=0.01)
    scaled = scale_state(state)
    assert scaled.alpha == 1.0
    assert dispersion(scaled) == pytest.approx(1.0, rel=1e-12)


def test_non_J_invariant_covariance_is_rejected():
    with pytest.raises(InvalidStateError):
        GaussianState(PhaseSpace.abstract(1), np.diag([1.0, 0.0]), 1.0)


def test_dispersion_must_match_trace():
    with pytest.raises(InvalidStateError):
        GaussianState(PhaseSpace.abstract(1), 0.5 * np.eye(2), 2.0)


def test_trace_tolerance_does_not_grow_with_dimension():
    space = PhaseSpace.abstract(4)
    with pytest.raises(InvalidStateError):
        GaussianState(space, 0.125 * (1 + 5e-12) * np.eye(8), 1.0)
    state = GaussianState(space, 0.125 * (1 + 1e-14) * np.eye(8), 1.0)
    assert dispersion(state) == pytest.approx(1.0, rel=1e-12)


def test_dispersion_must_be_positive():
    with pytest.raises(InvalidStateError):
        from_density_operator(DensityOperator.maximally_mixed(2), 0.0)


def test_density_operator_validation():
    with pytest.raises(InvalidStateError):
        DensityOperator(np.eye(2))
    with pytest.raises(NonHermitianError):
        DensityOperator(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(InvalidStateError):
        DensityOperator(np.diag([1.5, -0.5]))


def test_sampling_is_deterministic(rng):
    state = random_state(PhaseSpace.abstract(2), rng)
    first = sample(state, seed=7, count=50)
    second = sample(state, seed=7, count=50)
    assert all(np.array_equal(a.as_array(), b.as_array()) for a, b in zip(first, second))
    other = sample_array(state, seed=8, count=50)
    assert not np.array_equal(other, sample_array(state, seed=7, count=50))


def test_sampling_does_not_depend_on_workers(rng):
    state = random_state(PhaseSpace.abstract(3), rng)
    count = 2 * DEFAULT_BATCH_SIZE + 123
    serial = sample_array(state, seed=11, count=count, workers=1)
    threaded = sample_array(state, seed=11, count=count, workers=4)
    npt.assert_array_equal(serial, threaded)


def test_empirical_covariance_matches_B(rng):
    state = random_state(PhaseSpace.abstract(2), rng, alpha=1.0)
    X = sample_array(state, seed=3, count=200_000)
    npt.assert_allclose(X.mean(axis=0), 0.0, atol=0.01)
    npt.assert_allclose(X.T @ X / X.shape[0], state.B, atol=0.01)


def test_singular_covariance_can_be_sampled():
    state = from_density_operator(DensityOperator.pure(np.array([1.0, 0.0])), 1.0)
    X = sample_array(state, seed=0, count=1000)
    npt.assert_allclose(X[:, 1], 0.0, atol=1e-12)
    npt.assert_allclose(X[:, 3], 0.0, atol=1e-12)


def test_state_json_round_trip(rng):
    state = random_state(PhaseSpace.abstract(2), rng, alpha=0.5, name="demo")
    back = GaussianState.from_json(state.to_json())
    npt.assert_array_equal(back.B, state.B)
    assert back.alpha == 0.5 and back.name == "demo"


def complex_samples(X, n):
    return X[:, :n] + 1j * X[:, n:]


def within_standard_errors(values, expected, k=4.0):
    """|moyenne - attendu| <= k erreurs standard, parties réelle et imaginaire."""
    values = np.asarray(values)
    mean = values.mean(axis=0)
    stderr_re = values.real.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    stderr_im = values.imag.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    ok_re = np.abs(mean.real - np.real(expected)) <= k * stderr_re + 1e-15
    ok_im = np.abs(mean.imag - np.imag(expected)) <= k * stderr_im + 1e-15
    return bool(np.all(ok_re) and np.all(ok_im))


def test_complex_covariance_matches_monte_carlo(rng):
    n = 3
    state = random_state(PhaseSpace.abstract(n), rng, alpha=1.0)
    y1 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y2 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    expected = np.vdot(complex_covariance(state).M @ y1, y2)
    psi = complex_samples(sample_array(state, seed=5, count=200_000), n)
    products = (psi @ y1.conj()) * (psi.conj() @ y2)
    assert within_standard_errors(products, expected)


def test_odd_moments_vanish(rng):
    n = 3
    state = random_state(PhaseSpace.abstract(n), rng, alpha=1.0)
    X = sample_array(state, seed=9, count=200_000)
    assert within_standard_errors(X, np.zeros(2 * n))
    triples = [(0, 0, 0), (0, 1, 2), (1, 4, 5), (3, 3, 1), (2, 5, 5), (4, 4, 4)]
    third = np.column_stack([X[:, i] * X[:, j] * X[:, k] for i, j, k in triples])
    assert within_standard_errors(third, np.zeros(len(triples)))


def test_covariance_error_shrinks_with_count(rng):
    state = random_state(PhaseSpace.abstract(3), rng, alpha=1.0)

    def mean_squared_error(count):
        errors = []
        for seed in range(200):
            X = sample_array(state, seed=seed, count=count)
            errors.append(np.sum((X.T @ X / count - state.B) ** 2))
        return np.mean(errors)

    ratio = np.sqrt(mean_squared_error(2000) / mean_squared_error(4000))
    assert 1.25 <= ratio <= 1.6


def test_mean_squared_norm_is_alpha_trace(rng):
    D = random_density_operator(3, rng)
    alpha = 0.3
    state = from_density_operator(D, alpha)
    X = sample_array(state, seed=13, count=200_000)
    norms = np.sum(X ** 2, axis=1)
    assert within_standard_errors(norms, alpha * np.trace(D.D).real)
