import numpy as np
import numpy.testing as npt
import pytest

from pcsft.errors import DimensionMismatchError, NonHermitianError, StructureError
from pcsft.phase_space import (
    ComplexOperator,
    PhaseSpace,
    PhaseVector,
    SpatialGrid,
    SymplecticOperator,
    apply_J,
    assemble,
    commutator_residual,
    complex_inner,
    from_real_matrix,
    project_symplectic,
    random_symplectic_operator,
    real_inner,
    realify,
    symplectic_matrix,
    to_complex_operator,
)


def random_vector(rng, n):
    return PhaseVector(rng.standard_normal(n), rng.standard_normal(n))


def test_apply_J_swaps_and_negates():
    v = apply_J(PhaseVector([2.0], [3.0]))
    npt.assert_array_equal(v.q, [3.0])
    npt.assert_array_equal(v.p, [-2.0])


def test_J_squared_is_minus_identity(rng):
    for _ in range(10):
        v = random_vector(rng, 5)
        w = apply_J(apply_J(v))
        npt.assert_array_equal(w.q, -v.q)
        npt.assert_array_equal(w.p, -v.p)


def test_apply_J_on_zero():
    v = apply_J(PhaseVector.zeros(3))
    assert not v.q.any() and not v.p.any()


def test_apply_J_is_multiplication_by_minus_i(rng):
    v = random_vector(rng, 4)
    npt.assert_allclose(apply_J(v).to_complex(), -1j * v.to_complex())


def test_assemble_identity_commutes_with_J():
    A = assemble(SymplecticOperator.identity(2))
    npt.assert_array_equal(A, np.eye(4))
    assert commutator_residual(A) == 0.0


def test_assemble_with_antisymmetric_block():
    op = SymplecticOperator(np.diag([1.0, 2.0]), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    A = assemble(op)
    J = symplectic_matrix(2)
    assert np.abs(A @ J - J @ A).max() <= 1e-14
    npt.assert_array_equal(A, A.T)


def test_non_symmetric_R_is_rejected():
    with pytest.raises(StructureError):
        assemble(SymplecticOperator(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2))))


def test_non_antisymmetric_T_is_rejected():
    with pytest.raises(StructureError):
        SymplecticOperator(np.eye(2), np.eye(2))


def test_random_operators_commute_with_J(rng):
    for n in (1, 3, 8):
        A = assemble(random_symplectic_operator(n, rng))
        assert commutator_residual(A) <= 1e-14
        npt.assert_allclose(A, A.T, atol=1e-15)


def test_to_complex_operator_identity():
    M = to_complex_operator(SymplecticOperator.identity(3)).M
    npt.assert_array_equal(M, np.eye(3))


def test_to_complex_operator_pure_T_block():
    op = SymplecticOperator(np.zeros((2, 2)), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    M = to_complex_operator(op).M
    npt.assert_allclose(M, np.array([[0.0, -1j], [1j, 0.0]]))
    npt.assert_allclose(M, M.conj().T)


def test_complex_operator_acts_like_assembled_matrix(rng):
    op = random_symplectic_operator(4, rng)
    v = random_vector(rng, 4)
    real_image = PhaseVector.from_array(assemble(op) @ v.as_array())
    npt.assert_allclose(to_complex_operator(op).M @ v.to_complex(), real_image.to_complex(), atol=1e-12)


def test_realify_round_trip(rng):
    op = random_symplectic_operator(5, rng)
    npt.assert_allclose(realify(to_complex_operator(op)), assemble(op))
    back = from_real_matrix(realify(to_complex_operator(op)))
    npt.assert_allclose(back.R, op.R)
    npt.assert_allclose(back.T, op.T)


def test_from_real_matrix_rejects_non_commuting(rng):
    with pytest.raises(StructureError):
        from_real_matrix(np.diag([1.0, 2.0, 3.0, 4.0]))


def test_non_hermitian_complex_operator():
    with pytest.raises(NonHermitianError):
        ComplexOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_complex_inner_conventions():
    e_q = PhaseVector([1.0], [0.0])
    e_p = PhaseVector([0.0], [1.0])
    assert complex_inner(e_q, e_q) == 1.0
    assert complex_inner(e_q, e_p) == 1j
    assert complex_inner(e_p, e_q) == -1j


def test_real_part_of_inner_product_is_real_product(rng):
    for _ in range(100):
        u, v = random_vector(rng, 6), random_vector(rng, 6)
        assert complex_inner(u, v).real == pytest.approx(real_inner(u, v), rel=1e-12, abs=1e-12)


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        complex_inner(PhaseVector.zeros(2), PhaseVector.zeros(3))


def test_quadratic_form_bridge(rng):
    op = random_symplectic_operator(4, rng)
    A, M = assemble(op), to_complex_operator(op).M
    for _ in range(100):
        v = random_vector(rng, 4)
        real_form = v.as_array() @ A @ v.as_array()
        Psi = v.to_complex()
        complex_form = np.vdot(M @ Psi, Psi).real
        assert real_form == pytest.approx(complex_form, rel=1e-10, abs=1e-12)


def test_project_symplectic_keeps_symplectic_operators(rng):
    op = random_symplectic_operator(3, rng)
    projected, residual = project_symplectic(assemble(op))
    assert residual <= 1e-14
    npt.assert_allclose(projected.R, op.R, atol=1e-15)


def test_project_symplectic_removes_non_invariant_part():
    H = np.diag([1.0, 2.0, 3.0, 4.0])
    projected, residual = project_symplectic(H)
    npt.assert_allclose(projected.R, np.diag([2.0, 3.0]))
    assert residual == pytest.approx(1.0)


def test_phase_vector_rejects_non_finite():
    with pytest.raises(ValueError):
        PhaseVector([np.nan], [0.0])


def test_phase_vector_from_odd_array():
    with pytest.raises(DimensionMismatchError):
        PhaseVector.from_array(np.zeros(3))


def test_spatial_phase_space():
    space = PhaseSpace.spatial(2, 8, 4.0)
    assert space.n == 64
    assert space.grid.shape == (8, 8)
    assert space.representation == "spatial-grid"
    assert PhaseSpace.from_dict(space.to_dict()) == space


def test_grid_size_must_match_n():
    with pytest.raises(StructureError):
        PhaseSpace(n=5, grid=SpatialGrid(1, 4, 1.0))


def test_grid_axis_is_centered():
    grid = SpatialGrid(1, 4, 2.0)
    npt.assert_allclose(grid.axis(), [-1.0, -0.5, 0.0, 0.5])
