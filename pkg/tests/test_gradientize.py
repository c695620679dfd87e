import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradiform import (ConstantVerdict, GeneralSolveConfig, GradientizeError,
                       MatrixFamily, OneForm, QuadratureRule, VectorField,
                       check_necessary_constant, consistency_check,
                       eval_field, general_residual, jacobian,
                       potential_via_transform, sample_ball,
                       solve_consistency_constant, solve_general,
                       solve_symmetrizer, transform_field)
from gradiform.homotopy import dG_matrix
from gradiform.zoo import jj_circuit_linear, lorenz, quadratic, rotation

ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])
RULE = QuadratureRule.gauss_legendre(64)


def random_real_diagonalizable(rng, n=3, cond_cap=50.0):
    while True:
        P = rng.standard_normal((n, n))
        if np.linalg.cond(P) < cond_cap:
            break
    lam = rng.uniform(-3.0, -0.5, n) + 0.5 * np.arange(n)
    return P @ np.diag(lam) @ np.linalg.inv(P)


class TestConsistencyConstant:
    def test_rotation_nullspace_span(self):
        rep = solve_consistency_constant(ROT)
        assert len(rep.nullspace_basis) == 1
        B = rep.nullspace_basis[0]
        ref = np.array([[1.0, -1.0], [1.0, 1.0]])
        scale = B[0, 0] / ref[0, 0]
        assert np.allclose(B, scale * ref, atol=1e-10)
        assert rep.verdict is ConstantVerdict.CONSISTENCY_ONLY
        assert rep.necessary_residual > 1e-6

    def test_rotation_transformed_unchanged(self):
        rep = solve_consistency_constant(ROT)
        D = rep.chosen_D
        A = D @ ROT @ np.linalg.inv(D)
        assert np.allclose(A, ROT, atol=1e-10)  # D^T D = c I commutes

    def test_defective_never_gradientized(self):
        J = jacobian(jj_circuit_linear(r=1, beta_c=1, beta_L=1), np.zeros(3))
        rep = solve_consistency_constant(J)
        assert rep.verdict in (ConstantVerdict.INFEASIBLE,
                               ConstantVerdict.CONSISTENCY_ONLY)

    def test_identity_flag_tracks_symmetry(self):
        assert solve_consistency_constant(
            np.array([[2.0, 1.0], [1.0, 3.0]])).identity_solves_necessary
        assert not solve_consistency_constant(ROT).identity_solves_necessary

    def test_det_precondition_reported(self):
        rep = solve_consistency_constant(ROT)
        assert rep.det_precondition_gap == pytest.approx(0.0)


class TestCheckNecessary:
    def test_identity_symmetric(self):
        J = np.array([[2.0, 1.0], [1.0, 3.0]])
        assert check_necessary_constant(np.eye(2), J) == 0.0

    def test_hand_arithmetic(self):
        D = np.array([[1.0, -1.0], [1.0, 1.0]])
        # D^T D = 2I, so the residual is max|2J - 2J^T| = 4
        assert check_necessary_constant(D, ROT) == pytest.approx(4.0)

    def test_zero_jacobian(self):
        D = np.array([[3.0, 1.0], [0.0, 2.0]])
        assert check_necessary_constant(D, np.zeros((2, 2))) == 0.0

    def test_singular_rejected(self):
        with pytest.raises(ValueError):
            check_necessary_constant(np.zeros((2, 2)), ROT)


class TestSymmetrizer:
    def test_symmetric_matrix(self):
        J = np.array([[2.0, 1.0], [1.0, 3.0]])
        rep = solve_symmetrizer(J)
        assert rep.verdict is ConstantVerdict.GRADIENTIZED
        assert rep.identity_solves_necessary
        assert rep.transformed_asymmetry < 1e-10

    def test_real_spectrum_upper_triangular(self):
        rep = solve_symmetrizer(np.array([[-1.0, 2.0], [0.0, -3.0]]))
        assert rep.verdict is ConstantVerdict.GRADIENTIZED
        assert rep.transformed_asymmetry < 1e-10

    def test_rotation_infeasible(self):
        assert solve_symmetrizer(ROT).verdict is ConstantVerdict.INFEASIBLE

    def test_defective_infeasible(self):
        J = jacobian(jj_circuit_linear(r=1, beta_c=1, beta_L=1), np.zeros(3))
        assert solve_symmetrizer(J).verdict is not \
            ConstantVerdict.GRADIENTIZED

    @pytest.mark.parametrize("seed", range(6))
    def test_random_real_diagonalizable(self, seed):
        J = random_real_diagonalizable(np.random.default_rng(seed))
        rep = solve_symmetrizer(J)
        assert rep.verdict is ConstantVerdict.GRADIENTIZED
        assert rep.transformed_asymmetry < 1e-8


class TestTransformField:
    def test_identity(self):
        lor = lorenz()
        t = transform_field(lor, np.eye(3))
        x = np.array([0.3, -0.7, 1.2])
        assert np.allclose(eval_field(t, x), eval_field(lor, x))

    def test_scaling_commutes_with_identity_field(self):
        ident = quadratic(np.eye(2))
        t = transform_field(ident, 2.0 * np.eye(2))
        x = np.array([0.5, -1.5])
        assert np.allclose(eval_field(t, x), x)

    def test_swap(self):
        field = VectorField(dim=2, func=lambda x: np.array(
            [x[0] + 2 * x[1], x[0] ** 2]))
        swap = np.array([[0.0, 1.0], [1.0, 0.0]])
        t = transform_field(field, swap)
        x = np.array([0.7, -0.4])
        g = eval_field(field, swap @ x)
        assert np.allclose(eval_field(t, x), [g[1], g[0]])

    def test_jacobian_similarity(self):
        D = np.array([[1.0, 0.5], [0.0, 2.0]])
        field = quadratic([[1.0, 2.0], [3.0, 4.0]])
        t = transform_field(field, D)
        J = jacobian(t, np.array([0.2, 0.9]))
        expected = D @ np.array([[1.0, 2.0], [3.0, 4.0]]) @ np.linalg.inv(D)
        assert np.allclose(J, expected)

    def test_singular_rejected(self):
        with pytest.raises(np.linalg.LinAlgError):
            transform_field(lorenz(), np.zeros((3, 3)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_necessary_condition_equivalence(seed):
    # D^T D J - J^T D^T D = D^T (A - A^T) D with A = D J D^{-1}
    rng = np.random.default_rng(seed)
    n = 3
    J = rng.standard_normal((n, n))
    D = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
    if abs(np.linalg.det(D)) < 1e-3:
        return
    A = D @ J @ np.linalg.inv(D)
    lhs = D.T @ D @ J - J.T @ (D.T @ D)
    rhs = D.T @ (A - A.T) @ D
    assert np.allclose(lhs, rhs, atol=1e-8 * (1 + np.max(np.abs(lhs))))


@settings(max_examples=15, deadline=None)
@given(c=st.floats(0.1, 10.0))
def test_gauge_invariance(c):
    rep1 = solve_consistency_constant(ROT)
    D = rep1.chosen_D
    # scaling D leaves both residual verdict inputs invariant in the
    # relative sense: transformed field D J D^{-1} is unchanged
    A1 = D @ ROT @ np.linalg.inv(D)
    A2 = (c * D) @ ROT @ np.linalg.inv(c * D)
    assert np.allclose(A1, A2)


class TestGeneralResidual:
    def test_closed_field_identity_theta(self):
        field = quadratic([[2.0, 1.0], [1.0, 3.0]])
        family = MatrixFamily(dim=2, degree=1)
        samples = sample_ball(2, 8, 1.0, seed=4)
        r = general_residual(field, family, family.identity_params(), samples)
        assert np.max(np.abs(r)) < 1e-12

    def test_constant_family_reduces_to_asymmetry(self):
        field = quadratic([[1.0, 2.0], [3.0, 4.0]])
        family = MatrixFamily(dim=2, degree=0)
        theta = family.identity_params()
        theta[0] = 2.0  # D = diag(2, 1)
        D = np.array([[2.0, 0.0], [0.0, 1.0]])
        A = D @ np.array([[1.0, 2.0], [3.0, 4.0]]) @ np.linalg.inv(D)
        samples = sample_ball(2, 4, 1.0, seed=5)
        r = general_residual(field, family, theta, samples)
        assert np.allclose(r, A[0, 1] - A[1, 0])

    def test_lorenz_identity_matches_dG(self):
        lor = lorenz()
        family = MatrixFamily(dim=3, degree=1)
        samples = sample_ball(3, 4, 1.0, seed=6)
        r = general_residual(lor, family, family.identity_params(), samples)
        r = r.reshape(len(samples), 3)
        for k, x in enumerate(samples):
            A = dG_matrix(lor, x)
            assert np.allclose(r[k], [A[0, 1], A[0, 2], A[1, 2]])


class TestSolveGeneral:
    def test_closed_field_converges(self):
        field = quadratic([[2.0, 1.0], [1.0, 3.0]])
        family = MatrixFamily(dim=2, degree=1)
        cfg = GeneralSolveConfig(samples=sample_ball(2, 8, 1.0, seed=7))
        rep = solve_general(field, family, cfg)
        assert rep.converged
        assert rep.residual_norm < 1e-10

    def test_constant_case_matches_symmetrizer_verdict(self):
        J = np.array([[-1.0, 2.0], [0.0, -3.0]])
        field = quadratic(J)
        family = MatrixFamily(dim=2, degree=0)
        cfg = GeneralSolveConfig(samples=sample_ball(2, 8, 1.0, seed=8),
                                 max_iter=300)
        rep = solve_general(field, family, cfg)
        srep = solve_symmetrizer(J)
        assert srep.verdict is ConstantVerdict.GRADIENTIZED
        assert rep.converged
        assert rep.residual_norm < 1e-8

    def test_jj_nonlinear_reports_without_ground_truth(self):
        field = jj_circuit_linear()
        family = MatrixFamily(dim=3, degree=1)
        cfg = GeneralSolveConfig(samples=sample_ball(3, 8, 0.5, seed=9),
                                 max_iter=15)
        rep = solve_general(field, family, cfg)
        assert np.isfinite(rep.residual_norm)
        assert rep.iterations <= 15


class TestConsistencyAndPotential:
    def test_closed_transformed_field(self):
        field = quadratic([[2.0, 1.0], [1.0, 3.0]])
        samples = sample_ball(2, 6, 1.0, seed=10)
        assert consistency_check(field, samples, RULE) < 1e-6

    def test_rotation_violation_reported(self):
        val = consistency_check(rotation(), sample_ball(2, 6, 1.0, seed=11),
                                RULE)
        assert val > 0.1  # order-one violation, reported not raised

    def test_lorenz_after_constant_transform_nonzero(self):
        D = np.diag([1.0, 2.0, 3.0])
        t = transform_field(lorenz(), D)
        val = consistency_check(t, sample_ball(3, 4, 1.0, seed=12), RULE)
        assert val > 1e-2

    def test_potential_quadratic(self):
        field = quadratic([[2.0, 1.0], [1.0, 3.0]])
        val = potential_via_transform(field, np.eye(2), [1.0, 0.0], RULE)
        assert val == pytest.approx(1.0)

    def test_potential_gradient_after_symmetrizer(self):
        J = np.array([[-1.0, 2.0], [0.0, -3.0]])
        rep = solve_symmetrizer(J)
        D = rep.chosen_D
        t = transform_field(quadratic(J), D)
        for x in sample_ball(2, 6, 1.0, seed=13):
            f = eval_field(t, x)
            h = 1e-6
            for i in range(2):
                e = np.zeros(2)
                e[i] = h
                fd = (potential_via_transform(quadratic(J), D, x + e, RULE)
                      - potential_via_transform(quadratic(J), D, x - e,
                                                RULE)) / (2 * h)
                assert abs(fd - f[i]) < 1e-8

    def test_rotation_refused(self):
        with pytest.raises(GradientizeError):
            potential_via_transform(rotation(), np.eye(2), [1.0, 0.0], RULE)
