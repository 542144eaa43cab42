import math

import numpy as np
import pytest

from nsmlab.geometry import Ball, DiagBox, Unconstrained
from nsmlab.problems import (
    Objective,
    hessian_bounds,
    least_squares_objective,
    synth_linreg,
    toy_objective,
)
from nsmlab.theory import (
    TheoryConstants,
    bound_curve,
    estimate_cos_phi,
    finite_diff_check,
    strongly_convex_gamma,
    theorem_gamma,
    threshold_probability,
)


class TestThresholdProbability:
    def test_perfect_alignment(self):
        assert threshold_probability(1.0) == 0.5

    def test_toy_dimension_ten(self):
        # 1 / (1 + sqrt(10)) = 0.2403 to four decimals.
        thr = threshold_probability(1.0 / math.sqrt(10.0))
        assert thr == pytest.approx(1.0 / (1.0 + math.sqrt(10.0)), rel=1e-14)
        assert round(thr, 4) == 0.2403

    def test_vanishing_alignment(self):
        assert threshold_probability(1e-12) < 1e-11

    def test_rejects_out_of_range(self):
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                threshold_probability(bad)

    def test_strictly_increasing(self):
        grid = np.linspace(1e-6, 1.0, 1000)
        values = [threshold_probability(c) for c in grid]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestTheoremGamma:
    def test_half_r_when_aligned(self):
        assert theorem_gamma(10.0, 1.0, 0.0) == 5.0

    def test_toy_plugin_value(self):
        expected = 5.0 * math.sqrt(10.0)
        assert theorem_gamma(10.0, 1.0 / math.sqrt(10.0), 0.0) == pytest.approx(expected, rel=1e-12)

    def test_blows_up_at_threshold(self):
        cos_phi = 0.5
        thr = threshold_probability(cos_phi)
        assert theorem_gamma(1.0, cos_phi, thr - 1e-9) > 1e6

    def test_rejects_q_at_threshold(self):
        cos_phi = 0.5
        thr = threshold_probability(cos_phi)
        with pytest.raises(ValueError, match="threshold"):
            theorem_gamma(1.0, cos_phi, thr)

    def test_strictly_increasing_in_q(self):
        cos_phi = 1.0 / math.sqrt(10.0)
        thr = threshold_probability(cos_phi)
        grid = np.linspace(0.0, thr * 0.999, 500)
        values = [theorem_gamma(10.0, cos_phi, q) for q in grid]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestStronglyConvexGamma:
    def test_kappa_one_matches_aligned_case(self):
        assert strongly_convex_gamma(10.0, 1.0, 0.0) == 5.0

    def test_plugin_value(self):
        assert strongly_convex_gamma(8.0, 4.0, 0.1) == pytest.approx(32.0, rel=1e-12)

    def test_identity_with_theorem_gamma(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            kappa = 10.0 ** rng.uniform(0, 2)
            r = 10.0 ** rng.uniform(-1, 2)
            q = rng.uniform(0.0, 0.999 / (1.0 + kappa))
            a = strongly_convex_gamma(r, kappa, q)
            b = theorem_gamma(r, 1.0 / kappa, q)
            assert abs(a - b) <= 1e-12 * abs(b)

    def test_rejects_q_at_threshold(self):
        with pytest.raises(ValueError):
            strongly_convex_gamma(1.0, 4.0, 0.2)


class TestBoundCurve:
    def test_single_step(self):
        assert bound_curve(3.0, 1) == 9.0

    def test_at_e_steps(self):
        # For T = e the curve is gamma^2 * 2 / e; T must be an integer, so
        # check the closed form at T = 3 instead of e itself.
        assert bound_curve(1.0, 3) == pytest.approx((1 + math.log(3)) / 3, rel=1e-15)

    def test_strictly_decreasing_from_three(self):
        ts = np.arange(3, 1_000_001)
        vals = 1.0 * (1.0 + np.log(ts)) / ts
        assert np.all(np.diff(vals) < 0)

    def test_rejects_zero_steps(self):
        with pytest.raises(ValueError):
            bound_curve(1.0, 0)


class TestTheoryConstants:
    def test_valid_bundle(self):
        tc = TheoryConstants(cos_phi=0.5, r=10.0, p=0.1, q=0.2, gamma=25.0)
        assert tc.threshold == pytest.approx(1.0 / 3.0)

    def test_q_below_p_rejected(self):
        with pytest.raises(ValueError):
            TheoryConstants(cos_phi=0.5, r=10.0, p=0.3, q=0.2, gamma=1.0)

    def test_kappa_consistency(self):
        TheoryConstants(cos_phi=0.25, r=1.0, p=0.0, q=0.1, gamma=1.0, kappa=4.0)
        with pytest.raises(ValueError):
            TheoryConstants(cos_phi=0.5, r=1.0, p=0.0, q=0.1, gamma=1.0, kappa=4.0)


class TestEstimateCosPhi:
    def test_toy_exact_constant(self):
        d = 10
        est = estimate_cos_phi(toy_objective(d), DiagBox(10.0, d), 1000,
                               np.random.default_rng(0))
        assert abs(est - 1.0 / math.sqrt(d)) <= 1e-9

    def test_toy_single_sample_suffices(self):
        d = 4
        est = estimate_cos_phi(toy_objective(d), DiagBox(10.0, d), 1,
                               np.random.default_rng(1))
        assert abs(est - 0.5) <= 1e-9

    def test_radial_quadratic_is_one(self):
        dim = 3
        quad = Objective(
            value=lambda x: float(np.dot(x, x)),
            subgradient=lambda x: 2.0 * np.asarray(x, dtype=np.float64),
            dim=dim,
            optimum=np.zeros(dim),
        )
        est = estimate_cos_phi(quad, Unconstrained(dim), 200, np.random.default_rng(2))
        assert abs(est - 1.0) <= 1e-9

    def test_least_squares_at_least_inverse_condition(self):
        data = synth_linreg(6, 40, 10.0, np.random.default_rng(3))
        obj = least_squares_objective(data)
        mu, beta = hessian_bounds(data)
        kappa_hessian = beta / mu
        ball = Ball(obj.optimum, 5.0)
        est = estimate_cos_phi(obj, ball, 500, np.random.default_rng(4))
        assert est >= 1.0 / kappa_hessian - 1e-9

    def test_requires_optimum(self):
        bare = Objective(lambda x: 0.0, lambda x: np.zeros(2), 2, optimum=None)
        with pytest.raises(ValueError, match="optimum"):
            estimate_cos_phi(bare, Unconstrained(2), 10, 0)


class TestFiniteDiffCheck:
    def test_quadratic_tiny_error(self):
        dim = 4
        quad = Objective(
            value=lambda x: float(np.dot(x, x)),
            subgradient=lambda x: 2.0 * np.asarray(x, dtype=np.float64),
            dim=dim,
        )
        assert finite_diff_check(quad, np.array([1.0, -2.0, 0.5, 3.0])) < 1e-8

    def test_toy_truncation_error(self):
        obj = toy_objective(3)
        assert finite_diff_check(obj, np.full(3, 2.0)) < 1e-6

    def test_detects_wrong_gradient(self):
        dim = 3
        broken = Objective(
            value=lambda x: float(np.dot(x, x)),
            subgradient=lambda x: 2.0 * np.asarray(x, dtype=np.float64) + 1.0,
            dim=dim,
        )
        assert finite_diff_check(broken, np.ones(3)) > 0.1
