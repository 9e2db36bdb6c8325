"""Weighted L1 distance between step and smooth CDFs.

Oracle: brute-force Riemann/midpoint sums.  For the singular weight the oracle
integrates in the transformed variable u = sqrt|theta - pi/4| (du-sums are
well-behaved there), which exercises a completely different code path from the
cellwise panel quadrature under test.
"""

import math

import numpy as np
import pytest

from angular_gof import wasserstein as ws
from angular_gof.empirical import StepCDF, angular_dataset
from angular_gof.geometry import WeightKind, weight_q
from angular_gof.models import LogisticModel, get_law

PI_4 = math.pi / 4.0
PI_2 = math.pi / 2.0


def _riemann_oracle(F, G, kind, n=2_000_001):
    if kind is WeightKind.CONSTANT:
        t = (np.arange(n) + 0.5) * (PI_2 / n)
        return float(np.mean(np.abs(F(t) - G(t))) * PI_2)
    # substitute theta = pi/4 +/- u^2 on each side: q dtheta = 2 du
    total = 0.0
    for sign, umax in ((-1.0, math.sqrt(PI_4)), (1.0, math.sqrt(PI_2 - PI_4))):
        u = (np.arange(n) + 0.5) * (umax / n)
        t = PI_4 + sign * u * u
        total += float(np.mean(np.abs(F(t) - G(t))) * 2.0 * umax)
    return total


def _smooth_cdf(t):
    """A simple analytic CDF on [0, pi/2] (normalized sin^2)."""
    t = np.asarray(t, dtype=float)
    out = np.sin(t) ** 2
    return out[()] if np.ndim(t) == 0 else out


class TestAgainstRiemannOracle:
    @pytest.mark.parametrize("kind", [WeightKind.CONSTANT, WeightKind.INV_SQRT_PI4])
    def test_single_step(self, kind):
        F = StepCDF(np.array([0.6]), np.array([1.0]))
        val, _ = ws.weighted_l1_distance(F, _smooth_cdf, kind)
        oracle = _riemann_oracle(F, _smooth_cdf, kind)
        assert val == pytest.approx(oracle, rel=1e-5)

    @pytest.mark.parametrize("kind", [WeightKind.CONSTANT, WeightKind.INV_SQRT_PI4])
    def test_many_steps(self, kind):
        rng = np.random.default_rng(5)
        locs = np.sort(rng.uniform(0.01, PI_2 - 0.01, size=30))
        w = rng.dirichlet(np.ones(30))
        F = StepCDF(locs, np.cumsum(w))
        val, n_cells = ws.weighted_l1_distance(F, _smooth_cdf, kind)
        oracle = _riemann_oracle(F, _smooth_cdf, kind)
        assert val == pytest.approx(oracle, rel=1e-5)
        assert n_cells >= 31

    def test_step_at_pi4_with_singular_weight(self):
        # jump exactly at the singularity: the closed-form antiderivative keeps
        # the integral finite and exact
        F = StepCDF(np.array([PI_4]), np.array([1.0]))
        val, _ = ws.weighted_l1_distance(F, _smooth_cdf, WeightKind.INV_SQRT_PI4)
        oracle = _riemann_oracle(F, _smooth_cdf, WeightKind.INV_SQRT_PI4)
        assert val == pytest.approx(oracle, rel=1e-5)

    def test_against_parametric_cdf(self):
        rng = np.random.default_rng(6)
        law = get_law(LogisticModel(0.5), 2.0)
        locs = np.sort(rng.uniform(0.02, PI_2 - 0.02, size=20))
        F = StepCDF(locs, np.cumsum(rng.dirichlet(np.ones(20))))
        for kind in (WeightKind.CONSTANT, WeightKind.INV_SQRT_PI4):
            val, _ = ws.weighted_l1_distance(F, law.normalized_cdf, kind)
            oracle = _riemann_oracle(F, law.normalized_cdf, kind)
            assert val == pytest.approx(oracle, rel=2e-5)


class TestProperties:
    def test_zero_distance_to_itself_as_smooth(self):
        # G equal to the step values on each cell gives zero
        F = StepCDF(np.array([0.4, 1.0]), np.array([0.5, 1.0]))
        val, _ = ws.weighted_l1_distance(F, F, WeightKind.CONSTANT)
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_monotone_guard(self):
        def bad(t):
            return -np.asarray(t, dtype=float)

        F = StepCDF(np.array([0.5]), np.array([1.0]))
        with pytest.raises(ValueError):
            ws.weighted_l1_distance(F, bad, WeightKind.CONSTANT)

    def test_bounded_by_sup_distance(self):
        # |F - G| <= 1 so the distance is at most int q
        F = StepCDF(np.array([1.5]), np.array([1.0]))
        val, _ = ws.weighted_l1_distance(F, _smooth_cdf, WeightKind.CONSTANT)
        assert val <= PI_2 + 1e-12


class TestTestStatistic:
    def test_scaling_and_metadata(self):
        rng = np.random.default_rng(7)
        u = rng.uniform(size=(800, 2))
        # induce dependence via common shock
        z = rng.uniform(size=800)
        x = np.column_stack([np.maximum(u[:, 0], z), np.maximum(u[:, 1], z)])
        ds = angular_dataset(x, 28, 2.0)
        law = get_law(LogisticModel(0.5), 2.0)
        stat = ws.test_statistic(ds, law, WeightKind.INV_SQRT_PI4)
        raw, _ = ws.weighted_l1_distance(
            __import__("angular_gof.empirical", fromlist=["empirical_angular_cdf"]).empirical_angular_cdf(ds),
            law.normalized_cdf, WeightKind.INV_SQRT_PI4,
        )
        assert stat.value == pytest.approx(math.sqrt(28) * raw, rel=1e-12)
        assert stat.k == 28
        assert stat.weight_kind is WeightKind.INV_SQRT_PI4

    def test_statistic_small_under_matching_model(self):
        # data sampled from the logistic model itself should give a smaller
        # statistic than badly mismatched data
        from angular_gof import datagen

        rng = np.random.default_rng(8)
        good = datagen.sample(datagen.gumbel(2.0), 4000, rng)
        bad = datagen.sample(datagen.comonotone(), 4000, rng)
        law = get_law(LogisticModel(0.5), 2.0)
        k = 60
        s_good = ws.test_statistic(angular_dataset(good, k, 2.0), law, WeightKind.INV_SQRT_PI4)
        ds_bad = angular_dataset(bad, k, 2.0)
        # comonotone data is degenerate for the weight estimator; use raw
        # weights for the comparison
        from angular_gof.empirical import select_exceedances, empirical_angular_cdf

        ds_raw = select_exceedances(bad, k, 2.0)
        v_bad, _ = ws.weighted_l1_distance(
            empirical_angular_cdf(ds_raw, reweighted=False),
            law.normalized_cdf, WeightKind.INV_SQRT_PI4,
        )
        assert s_good.value < math.sqrt(k) * v_bad
