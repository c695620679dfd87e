import numpy as np
import pytest

from gradiform import (OneForm, Verdict, VectorField, circle_loop, classify,
                       closedness, frobenius_defect, loop_integral,
                       sample_ball)
from gradiform.integrability import Loop
from gradiform.zoo import jj_circuit, lorenz, quadratic, rotation

SAMPLES3 = sample_ball(3, 32, 1.5, seed=11)


def scaled_gradient_field():
    # f = h(x) grad V with h = 1 + x_1^2, V = |x|^2 / 2: Frobenius
    # integrable (integrating factor 1/h) but not closed
    def func(x):
        return (1.0 + x[0] ** 2) * x

    def jac(x):
        J = (1.0 + x[0] ** 2) * np.eye(3)
        J[:, 0] += 2.0 * x[0] * x
        return J

    return VectorField(dim=3, func=func, jac=jac)


class TestClosedness:
    def test_symmetric_quadratic_closed(self):
        field = quadratic([[2.0, 1.0, 0.0], [1.0, 3.0, 0.5],
                           [0.0, 0.5, 1.0]])
        rep = closedness(field, SAMPLES3)
        assert rep.max_asymmetry == 0.0
        assert rep.verdict is Verdict.CLOSED

    def test_lorenz_not_closed(self):
        rep = closedness(lorenz(), SAMPLES3)
        assert rep.verdict is not Verdict.CLOSED

    def test_jj_not_closed(self):
        rep = closedness(jj_circuit(), SAMPLES3)
        assert rep.verdict is not Verdict.CLOSED

    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            closedness(lorenz(), np.empty((0, 3)))


class TestFrobeniusDefect:
    def test_gradient_field_zero(self):
        field = quadratic([[2.0, 1.0, 0.0], [1.0, 3.0, 0.5],
                           [0.0, 0.5, 1.0]])
        for x in SAMPLES3[:8]:
            assert frobenius_defect(field, x) < 1e-12

    def test_lorenz_oracle(self):
        # f=(0,26,-5/3), curl f=(2,-1,17): |f.curl f| = 163/3
        val = frobenius_defect(lorenz(10, 28, 8 / 3), [1.0, 1.0, 1.0])
        assert val == pytest.approx(163.0 / 3.0, abs=1e-9)

    def test_dimension_two_is_zero(self):
        assert frobenius_defect(rotation(), [0.3, 0.8]) == 0.0

    def test_quadratic_scaling(self):
        # defect is bilinear in f and its derivatives: scaling f by c
        # scales the defect by c^2
        x = np.array([0.4, -0.7, 1.1])
        base = frobenius_defect(lorenz(), x)
        lor = lorenz()
        scaled = VectorField(dim=3, func=lambda p: 3.0 * lor.func(p),
                             jac=lambda p: 3.0 * lor.jac(p))
        assert frobenius_defect(scaled, x) == pytest.approx(9.0 * base,
                                                            rel=1e-12)


class TestLoopIntegral:
    def test_gradient_field_zero_circulation(self):
        form = OneForm(quadratic([[2.0, 1.0], [1.0, 3.0]]))
        assert abs(loop_integral(form, circle_loop())) < 1e-10

    def test_rotation_circulation(self):
        val = loop_integral(OneForm(rotation()), circle_loop())
        assert val == pytest.approx(2.0 * np.pi, abs=1e-6)

    def test_lorenz_nonzero_witness(self):
        loop = circle_loop(radius=1.0, center=[0.0, 0.0, 1.0], dim=3)
        val = loop_integral(OneForm(lorenz()), loop)
        # quadrature oracle: circulation of (g1, g2) around the circle;
        # dominated by the rho*x dy term giving ~ rho*pi minus sigma*pi
        assert abs(val) > 1.0

    def test_open_curve_rejected(self):
        bad = Loop(gamma=lambda s: np.array([s, 0.0]))
        with pytest.raises(ValueError):
            loop_integral(OneForm(rotation()), bad)

    def test_fd_velocity_fallback(self):
        loop = Loop(gamma=lambda s: np.array([np.cos(2 * np.pi * s),
                                              np.sin(2 * np.pi * s)]))
        val = loop_integral(OneForm(rotation()), loop)
        assert val == pytest.approx(2.0 * np.pi, abs=1e-6)


class TestClassify:
    def test_symmetric_quadratic(self):
        field = quadratic([[2.0, 1.0, 0.0], [1.0, 3.0, 0.5],
                           [0.0, 0.5, 1.0]])
        rep = classify(field, SAMPLES3)
        assert rep.verdict is Verdict.CLOSED
        assert rep.frobenius_defect_max <= 1e-8

    def test_lorenz_non_integrable(self):
        rep = classify(lorenz(), SAMPLES3)
        assert rep.verdict is Verdict.NON_INTEGRABLE

    def test_integrating_factor_case(self):
        rep = classify(scaled_gradient_field(), SAMPLES3)
        assert rep.verdict is Verdict.FROBENIUS_INTEGRABLE

    def test_loops_reported(self):
        rep = classify(rotation(), sample_ball(2, 8, 1.0, seed=2),
                       loops=[circle_loop()])
        assert len(rep.loop_integrals) == 1
        assert rep.loop_integrals[0][1] == pytest.approx(2 * np.pi, abs=1e-6)
