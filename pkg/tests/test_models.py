"""Parametric families: stdf, densities, estimator, angular law.

Key oracles:
  - exponent density vs. mixed finite differences of the rectangle mass
    (the density is d^2/dxdy of -rect_mass up to sign conventions)
  - stdf partials vs. finite differences of the stdf
  - total angular mass vs. direct adaptive quadrature of the raw density
  - the moment identity E_Q[f] = 0 (the true angular measure satisfies the
    constraint the Euclidean weights enforce)
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from angular_gof import models as md
from angular_gof import geometry as g

PI_2 = math.pi / 2.0
PI_4 = math.pi / 4.0


class TestLogisticStdf:
    def test_symmetric_point(self):
        # [TRIVIAL] ell(1,1) = 2^r
        for r in (0.2, 0.5, 0.9):
            assert md.LogisticModel(r).stdf(1.0, 1.0) == pytest.approx(2.0 ** r, rel=1e-14)

    def test_margins(self):
        m = md.LogisticModel(0.5)
        assert m.stdf(3.0, 0.0) == 3.0
        assert m.stdf(0.0, 2.0) == 2.0
        assert m.stdf(0.0, 0.0) == 0.0

    def test_value(self):
        # [DERIVED] r = 0.5: (2^2 + 3^2)^0.5 with x=4? no: ell(x,y) =
        # (x^2 + y^2)^(1/2) at r = 1/2; ell(3,4) = 5
        assert md.LogisticModel(0.5).stdf(3.0, 4.0) == pytest.approx(5.0, rel=1e-14)

    def test_r1_is_sum(self):
        assert md.LogisticModel(1.0).stdf(1.3, 2.2) == pytest.approx(3.5, rel=1e-14)

    @given(
        r=st.floats(0.05, 1.0),
        x=st.floats(1e-3, 100.0),
        y=st.floats(1e-3, 100.0),
        c=st.floats(0.01, 100.0),
    )
    @settings(max_examples=200)
    def test_homogeneity_and_bounds(self, r, x, y, c):
        m = md.LogisticModel(r)
        v = m.stdf(x, y)
        assert m.stdf(c * x, c * y) == pytest.approx(c * v, rel=1e-9)
        assert max(x, y) <= v * (1 + 1e-12)
        assert v <= (x + y) * (1 + 1e-12)

    def test_rejects_bad_r(self):
        with pytest.raises(ValueError):
            md.LogisticModel(0.0)
        with pytest.raises(ValueError):
            md.LogisticModel(1.2)


class TestHuslerReissStdf:
    def test_symmetric_point(self):
        # [TRIVIAL] ell(1,1) = 2 Phi(r)
        for r in (0.5, 1.0, 2.0):
            assert md.HuslerReissModel(r).stdf(1.0, 1.0) == pytest.approx(
                2.0 * norm.cdf(r), rel=1e-14
            )

    def test_margins(self):
        m = md.HuslerReissModel(1.0)
        assert m.stdf(3.0, 0.0) == 3.0
        assert m.stdf(0.0, 2.0) == 2.0

    def test_value(self):
        # [DERIVED] r=1, x=2, y=1: 2 Phi(1 + log(2)/2) + Phi(1 - log(2)/2)
        expect = 2.0 * norm.cdf(1.0 + math.log(2.0) / 2.0) + norm.cdf(1.0 - math.log(2.0) / 2.0)
        assert md.HuslerReissModel(1.0).stdf(2.0, 1.0) == pytest.approx(expect, rel=1e-12)

    @given(r=st.floats(0.1, 5.0), x=st.floats(1e-3, 50.0), y=st.floats(1e-3, 50.0))
    @settings(max_examples=200)
    def test_bounds(self, r, x, y):
        v = md.HuslerReissModel(r).stdf(x, y)
        assert max(x, y) <= v * (1 + 1e-10)
        assert v <= (x + y) * (1 + 1e-10)


class TestDensities:
    def test_logistic_point(self):
        # [DERIVED] lambda(1,1) at r=0.5: (1/r - 1) (1)^... / (2)^(2-r)
        # = 1 / 2^1.5
        assert md.LogisticModel(0.5).exponent_density(1.0, 1.0) == pytest.approx(
            2.0 ** -1.5, rel=1e-14
        )

    def test_hr_point(self):
        # [DERIVED] lambda(1,1) at r=1: phi(1)/2
        assert md.HuslerReissModel(1.0).exponent_density(1.0, 1.0) == pytest.approx(
            norm.pdf(1.0) / 2.0, rel=1e-14
        )

    @pytest.mark.parametrize(
        "model",
        [md.LogisticModel(0.3), md.LogisticModel(0.7), md.HuslerReissModel(0.8),
         md.HuslerReissModel(2.0)],
    )
    def test_density_is_mixed_derivative_of_rect_mass(self, model):
        # [DERIVED] lambda(x,y) = d2/dxdy Lambda([0,x]x[0,y]) via central FD
        for x, y in ((0.7, 0.9), (1.5, 0.6), (2.0, 2.5)):
            h = 1e-4
            fd = (
                model.rect_mass(x + h, y + h)
                - model.rect_mass(x + h, y - h)
                - model.rect_mass(x - h, y + h)
                + model.rect_mass(x - h, y - h)
            ) / (4 * h * h)
            assert model.exponent_density(x, y) == pytest.approx(fd, rel=5e-5)

    @pytest.mark.parametrize(
        "model", [md.LogisticModel(0.4), md.HuslerReissModel(1.3)]
    )
    def test_partials_match_finite_differences(self, model):
        for x, y in ((1.0, 1.0), (0.5, 2.0), (3.0, 0.7)):
            h = 1e-6 * max(x, y)
            dx_fd = (model.stdf(x + h, y) - model.stdf(x - h, y)) / (2 * h)
            dy_fd = (model.stdf(x, y + h) - model.stdf(x, y - h)) / (2 * h)
            dx, dy = model.stdf_partials(x, y)
            assert dx == pytest.approx(dx_fd, rel=1e-6)
            assert dy == pytest.approx(dy_fd, rel=1e-6)

    def test_partials_sum_via_euler(self):
        # Homogeneity of degree 1: x dx + y dy = ell
        for model in (md.LogisticModel(0.6), md.HuslerReissModel(1.5)):
            x, y = 1.7, 0.4
            dx, dy = model.stdf_partials(x, y)
            assert x * dx + y * dy == pytest.approx(model.stdf(x, y), rel=1e-12)

    def test_rect_mass_identity(self):
        # [TRIVIAL] Lambda([0,a]x[0,b]) = a + b - ell(a,b)
        m = md.LogisticModel(0.5)
        assert m.rect_mass(1.0, 1.0) == pytest.approx(2.0 - math.sqrt(2.0), rel=1e-14)

    def test_density_rejects_axis(self):
        with pytest.raises(ValueError):
            md.LogisticModel(0.5).exponent_density(0.0, 1.0)


class TestEstimator:
    def test_logistic_round_trip(self):
        for r in (0.2, 0.5, 0.85):
            chi = md.LogisticModel(r).extremal_coefficient()
            est = md.estimate_param("logistic", chi)
            assert not est.clamped
            assert est.r == pytest.approx(r, rel=1e-12)

    def test_hr_round_trip(self):
        for r in (0.4, 1.0, 2.5):
            chi = md.HuslerReissModel(r).extremal_coefficient()
            est = md.estimate_param("hr", chi)
            assert not est.clamped
            assert est.r == pytest.approx(r, rel=1e-9)

    def test_clamping(self):
        assert md.estimate_param("logistic", 0.9).clamped
        assert md.estimate_param("logistic", 2.3).clamped
        assert md.estimate_param("hr", 1.0).clamped
        assert md.estimate_param("hr", 2.0) == md.ParamEstimate(8.0, True)

    def test_expansion_constants(self):
        # [DERIVED] closed forms: g = 1/(2^r ln 2) and 1/(2 phi(r))
        gval, loc = md.expansion_constants(md.LogisticModel(0.5))
        assert loc == (1.0, 1.0)
        assert gval == pytest.approx(1.0 / (2.0 ** 0.5 * math.log(2.0)), rel=1e-14)
        gval, _ = md.expansion_constants(md.HuslerReissModel(1.0))
        assert gval == pytest.approx(1.0 / (2.0 * norm.pdf(1.0)), rel=1e-14)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            md.estimate_param("gauss", 1.5)
        with pytest.raises(ValueError):
            md.make_model("gauss", 1.5)


class TestAngularLaw:
    @pytest.mark.parametrize(
        "model,p",
        [
            (md.LogisticModel(0.5), 2.0),
            (md.LogisticModel(0.3), 1.0),
            (md.HuslerReissModel(1.0), 2.0),
            (md.HuslerReissModel(0.7), 3.0),
        ],
    )
    def test_total_mass_against_adaptive_quadrature(self, model, p):
        # [DERIVED] oracle: scipy.integrate.quad of the raw angular density
        # (independent of the panel/substitution machinery)
        oracle, err = quad(
            lambda t: md.angular_density(model, p, t), 0.0, PI_2,
            points=[PI_4], limit=200,
        )
        law = md.get_law(model, p)
        assert law.total_mass == pytest.approx(oracle, rel=1e-8)

    def test_mass_of_symmetric_family_at_r_half_p2(self):
        # [DERIVED] frozen from two independent quadratures: logistic r = 0.5,
        # p = 2 has total angular mass pi/2.
        law = md.get_law(md.LogisticModel(0.5), 2.0)
        assert law.total_mass == pytest.approx(PI_2, rel=1e-10)

    @pytest.mark.parametrize(
        "model", [md.LogisticModel(0.5), md.LogisticModel(0.8), md.HuslerReissModel(1.0)]
    )
    def test_moment_constraint_holds(self, model):
        # The true angular probability measure satisfies E_Q[f] = 0.
        law = md.get_law(model, 2.0)
        assert law.mean_f == pytest.approx(0.0, abs=1e-9)
        assert law.var_f > 0.0

    def test_cdf_properties(self):
        law = md.get_law(md.HuslerReissModel(1.0), 2.0)
        th = np.linspace(0.0, PI_2, 1001)
        Q = law.normalized_cdf(th)
        assert Q[0] == pytest.approx(0.0, abs=1e-12)
        assert Q[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(Q) >= -1e-12)

    def test_symmetry_of_exchangeable_families(self):
        # Q(pi/4) = 1/2 and Q(theta) + Q(pi/2 - theta) = 1 for p = 2
        law = md.get_law(md.LogisticModel(0.6), 2.0)
        assert law.normalized_cdf(PI_4) == pytest.approx(0.5, abs=1e-10)
        th = np.array([0.2, 0.5, 0.7])
        assert law.normalized_cdf(th) + law.normalized_cdf(PI_2 - th) == pytest.approx(
            np.ones(3), abs=1e-9
        )

    def test_cdf_against_quadrature_at_interior_points(self):
        model = md.LogisticModel(0.5)
        law = md.get_law(model, 2.0)
        for theta in (0.3, PI_4, 1.1):
            oracle, _ = quad(lambda t: md.angular_density(model, 2.0, t), 0.0, theta, limit=200)
            assert law.cdf(theta) == pytest.approx(oracle, rel=1e-7)

    def test_f_integral_against_quadrature(self):
        model = md.HuslerReissModel(1.0)
        law = md.get_law(model, 2.0)
        for theta in (0.5, 1.2):
            oracle, _ = quad(
                lambda t: g.constraint_f(2.0, t) * md.angular_density(model, 2.0, t),
                0.0, theta, limit=200,
            )
            assert law.f_integral(theta) == pytest.approx(oracle / law.total_mass, rel=1e-6)

    def test_near_independence_is_atomic(self):
        # Parameters within ~1e-9 of independence: the mass collapses onto the
        # endpoints below float resolution; the law must report total ~ 2 with
        # endpoint atoms rather than a silently truncated measure.
        law = md.get_law(md.LogisticModel(1.0 - 1e-9), 2.0)
        assert law.total_mass == pytest.approx(2.0, rel=1e-6)
        assert law.normalized_cdf(1e-10) == pytest.approx(0.5, rel=1e-5)

    def test_grad_normalized_cdf_matches_coarse_fd(self):
        th = np.array([0.4, PI_4, 1.2])
        model = md.LogisticModel(0.5)
        grad = md.grad_normalized_cdf(model, 2.0, th)
        dr = 5e-3
        lo = md.get_law(md.LogisticModel(0.5 - dr), 2.0).normalized_cdf(th)
        hi = md.get_law(md.LogisticModel(0.5 + dr), 2.0).normalized_cdf(th)
        assert grad == pytest.approx((hi - lo) / (2 * dr), rel=5e-3, abs=1e-6)

    def test_cache_returns_same_object(self):
        a = md.get_law(md.LogisticModel(0.5), 2.0)
        b = md.get_law(md.LogisticModel(0.5), 2.0)
        assert a is b
