import math

import numpy as np
import pytest

from nsmlab.corruption import (
    CorruptionChannel,
    FixedVector,
    NegateIterate,
    ScaledOpposite,
    WorstCaseDirectional,
    corrupt_vector,
)


class TestCorruptVector:
    def test_negate_iterate(self):
        adv = NegateIterate(np.ones(4))
        x = np.full(4, 5.0)
        np.testing.assert_array_equal(corrupt_vector(adv, x, np.zeros(4), 1.0), -x)

    def test_negate_iterate_fallback_at_zero(self):
        # The zero test is exact: only a literally zero leading coordinate
        # triggers the fallback vector.
        adv = NegateIterate(np.ones(3))
        x = np.zeros(3)
        np.testing.assert_array_equal(corrupt_vector(adv, x, np.zeros(3), 1.0), np.ones(3))
        tiny = np.full(3, 1e-300)
        np.testing.assert_array_equal(corrupt_vector(adv, tiny, np.zeros(3), 1.0), -tiny)

    def test_scaled_opposite(self):
        adv = ScaledOpposite(15.0)
        g = np.array([1.0, 0.0])
        np.testing.assert_array_equal(corrupt_vector(adv, np.zeros(2), g, 1.0), [-15.0, 0.0])

    def test_worst_case_directional(self):
        adv = WorstCaseDirectional()
        b = corrupt_vector(adv, np.array([10.0, 0.0]), np.zeros(2), 1.0,
                           x_star=np.zeros(2), r=10.0)
        np.testing.assert_allclose(b, [-10.0, 0.0], atol=1e-12)

    def test_worst_case_magnitude_scales_with_gamma(self):
        adv = WorstCaseDirectional()
        b = corrupt_vector(adv, np.array([1.0, 0.0]), np.zeros(2), 0.5,
                           x_star=np.zeros(2), r=10.0)
        assert np.linalg.norm(b) == pytest.approx(20.0, rel=1e-12)

    def test_worst_case_at_optimum_pushes_along_axis(self):
        adv = WorstCaseDirectional()
        x = np.zeros(3)
        b = corrupt_vector(adv, x, np.zeros(3), 2.0, x_star=x, r=10.0)
        np.testing.assert_array_equal(b, [5.0, 0.0, 0.0])

    def test_worst_case_missing_context(self):
        with pytest.raises(ValueError, match="x_star"):
            corrupt_vector(WorstCaseDirectional(), np.zeros(2), np.zeros(2), 1.0)

    def test_fixed_vector(self):
        adv = FixedVector(np.array([-3.0, -3.0]))
        np.testing.assert_array_equal(
            corrupt_vector(adv, np.ones(2), np.zeros(2), 1.0), [-3.0, -3.0]
        )

    def test_scaled_opposite_rejects_zero_factor(self):
        with pytest.raises(ValueError):
            ScaledOpposite(0.0)


class TestChannel:
    def test_degenerate_p_zero(self):
        ch = CorruptionChannel(0.0, FixedVector(np.ones(2)), 0)
        g = np.array([1.0, 2.0])
        for _ in range(50):
            h, corrupt = ch.next_feedback(np.zeros(2), g, 1.0)
            assert not corrupt
            np.testing.assert_array_equal(h, g)
        assert ch.corruptions_made == 0 and ch.draws_made == 50

    def test_degenerate_p_one(self):
        ch = CorruptionChannel(1.0, FixedVector(np.full(2, 7.0)), 0)
        for _ in range(50):
            h, corrupt = ch.next_feedback(np.zeros(2), np.ones(2), 1.0)
            assert corrupt
            np.testing.assert_array_equal(h, [7.0, 7.0])
        assert ch.corruptions_made == 50

    def test_frequency_concentrates(self):
        p, n = 0.25, 100_000
        ch = CorruptionChannel(p, FixedVector(np.ones(1)), 42)
        hits = sum(ch.next_feedback(np.zeros(1), np.ones(1), 1.0)[1] for _ in range(n))
        assert abs(hits / n - p) <= 3.0 * math.sqrt(p * (1 - p) / n)

    def test_equal_seeds_equal_sequences(self):
        rng = np.random.default_rng(5)
        ch1 = CorruptionChannel(0.5, ScaledOpposite(2.0), 7)
        ch2 = CorruptionChannel(0.5, ScaledOpposite(2.0), 7)
        for _ in range(200):
            x = rng.standard_normal(3)
            g = rng.standard_normal(3)
            h1, c1 = ch1.next_feedback(x, g, 1.0)
            h2, c2 = ch2.next_feedback(x, g, 1.0)
            assert c1 == c2
            np.testing.assert_array_equal(h1, h2)

    def test_flags_independent_of_iterate(self):
        ch1 = CorruptionChannel(0.5, NegateIterate(np.ones(2)), 11)
        ch2 = CorruptionChannel(0.5, NegateIterate(np.ones(2)), 11)
        rng = np.random.default_rng(6)
        for _ in range(200):
            x1 = rng.standard_normal(2)
            x2 = rng.standard_normal(2) * 100.0
            _, c1 = ch1.next_feedback(x1, np.ones(2), 1.0)
            _, c2 = ch2.next_feedback(x2, np.ones(2), 1.0)
            assert c1 == c2

    def test_reserve_matches_sequential_draws(self):
        # The compiled loop pre-draws uniforms in bulk; the stream must be
        # the one sequential calls would consume.
        ch_bulk = CorruptionChannel(0.3, FixedVector(np.ones(1)), 13)
        u = ch_bulk.reserve_uniforms(100)
        ch_seq = CorruptionChannel(0.3, FixedVector(np.ones(1)), 13)
        flags = [ch_seq.next_feedback(np.zeros(1), np.ones(1), 1.0)[1] for _ in range(100)]
        np.testing.assert_array_equal(u < 0.3, flags)
        assert ch_bulk.draws_made == 100

    def test_counter_invariant(self):
        ch = CorruptionChannel(0.5, FixedVector(np.ones(1)), 0)
        ch.reserve_uniforms(10)
        with pytest.raises(RuntimeError):
            ch.note_corruptions(11)

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            CorruptionChannel(1.5, FixedVector(np.ones(1)), 0)
