import numpy as np
import pytest

from nsmlab.geometry import Ball, DiagBox, Unconstrained, distance_sq, normalize, project


def all_sets(rng):
    d = 6
    return [
        Ball(rng.standard_normal(d), 2.5),
        DiagBox(3.0, d),
        Unconstrained(d),
    ]


class TestProjectExamples:
    def test_ball_radial_scaling(self):
        ball = Ball(np.zeros(2), 1.0)
        np.testing.assert_allclose(ball.project([3.0, 4.0]), [0.6, 0.8], rtol=0, atol=1e-15)

    def test_diagbox_mean_inside_bound(self):
        box = DiagBox(10.0, 2)
        np.testing.assert_array_equal(box.project([0.0, 2.0]), [1.0, 1.0])

    def test_diagbox_mean_clamps_to_bound(self):
        box = DiagBox(10.0, 3)
        np.testing.assert_array_equal(box.project([20.0, 30.0, 40.0]), [10.0, 10.0, 10.0])

    def test_unconstrained_identity(self):
        free = Unconstrained(2)
        np.testing.assert_array_equal(free.project([5.0, -7.0]), [5.0, -7.0])

    def test_feasible_point_unchanged(self):
        ball = Ball(np.zeros(3), 2.0)
        x = np.array([0.5, -0.5, 1.0])
        np.testing.assert_array_equal(ball.project(x), x)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            Ball(np.zeros(3), 1.0).project([1.0, 2.0])

    def test_non_finite_input(self):
        with pytest.raises(ValueError, match="non-finite"):
            DiagBox(1.0, 2).project([np.nan, 0.0])

    def test_project_function_dispatches(self):
        np.testing.assert_array_equal(project(Unconstrained(2), [1.0, 2.0]), [1.0, 2.0])


class TestNormalizeExamples:
    def test_three_four_five(self):
        direction, is_zero = normalize(np.array([3.0, 4.0]))
        assert not is_zero
        np.testing.assert_allclose(direction, [0.6, 0.8], rtol=0, atol=1e-15)

    def test_zero_vector(self):
        direction, is_zero = normalize(np.zeros(2))
        assert is_zero
        np.testing.assert_array_equal(direction, [0.0, 0.0])

    def test_below_tolerance(self):
        direction, is_zero = normalize(np.array([1e-13, 0.0]), zero_tol=1e-12)
        assert is_zero
        np.testing.assert_array_equal(direction, [0.0, 0.0])


class TestDistanceSq:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ([0.0, 0.0], [3.0, 4.0], 25.0),
            ([1.0, 1.0], [1.0, 1.0], 0.0),
            ([-1.0, 2.0, 0.0], [1.0, 0.0, 2.0], 12.0),
        ],
    )
    def test_examples(self, a, b, expected):
        assert distance_sq(a, b) == expected

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            distance_sq([1.0], [1.0, 2.0])


class TestProjectionProperties:
    def test_idempotent(self):
        rng = np.random.default_rng(0)
        for s in all_sets(rng):
            for _ in range(1000):
                x = rng.standard_normal(6) * 10.0
                once = s.project(x)
                twice = s.project(once)
                assert np.max(np.abs(twice - once)) <= 1e-12

    def test_nonexpansive(self):
        rng = np.random.default_rng(1)
        for s in all_sets(rng):
            for _ in range(1000):
                a = rng.standard_normal(6) * 10.0
                b = rng.standard_normal(6) * 10.0
                lhs = np.linalg.norm(s.project(a) - s.project(b))
                assert lhs <= np.linalg.norm(a - b) + 1e-12

    def test_feasible_output(self):
        rng = np.random.default_rng(2)
        for s in all_sets(rng):
            for _ in range(1000):
                x = rng.standard_normal(6) * 10.0
                assert s.contains(s.project(x), tol=1e-12)

    def test_normalize_unit_or_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            v = rng.standard_normal(4) * 10.0 ** rng.uniform(-14, 6)
            direction, is_zero = normalize(v)
            n = np.linalg.norm(direction)
            if is_zero:
                assert n == 0.0
            else:
                assert abs(n - 1.0) <= 1e-12

    def test_samples_are_members(self):
        rng = np.random.default_rng(4)
        for s in all_sets(rng):
            for _ in range(200):
                assert s.contains(s.sample(rng))


class TestDiameters:
    def test_ball(self):
        assert Ball(np.zeros(4), 3.0).diameter == 6.0

    def test_diagbox(self):
        # Endpoints are (-R, ..., -R) and (R, ..., R): length 2 R sqrt(d).
        assert DiagBox(10.0, 4).diameter == pytest.approx(40.0)

    def test_unconstrained_declared(self):
        assert Unconstrained(3).diameter is None
        assert Unconstrained(3, diameter=7.0).diameter == 7.0

    def test_bad_construction(self):
        with pytest.raises(ValueError):
            Ball(np.zeros(2), -1.0)
        with pytest.raises(ValueError):
            DiagBox(0.0, 2)
        with pytest.raises(ValueError):
            Unconstrained(0)
