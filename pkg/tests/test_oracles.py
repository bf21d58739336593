import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spa_kit.errors import RepeatedPole, TooManyPoles
from spa_kit.oracles import (g_function, g_grid, g_monotonicity_check, lemma_first_check,
                             lemma_second_check, lemma_suite, random_disk_points,
                             random_system, spiral_gaps)
from spa_kit.poleselect import augment, coverage_distance, spiral_poles, winding_constant
from spa_kit.spa import simple_pole_coefficients
from spa_kit.tfcore import check_realness, dumps

disk = st.complex_numbers(max_magnitude=0.999)


def g_textbook(x, m):
    """The closed form as usually written; loses digits for large x."""
    return (2 * x + 1 - 2 * math.sqrt(x * (x + 1))
            * math.cos(2 * math.sqrt(math.pi) * (math.sqrt(x + 1) - math.sqrt(x)))) / (m / 2 + 1)


class TestLemmaFirst:
    @given(disk, disk)
    def test_single_pole_is_equality(self, q, p):
        r = lemma_first_check(q, [p])
        assert r.lhs == pytest.approx(abs(q - p), abs=1e-15)
        assert r.rhs == pytest.approx(abs(p - q), abs=1e-15)
        assert r.passed

    @given(st.lists(disk, min_size=1, max_size=6))
    def test_origin(self, poles):
        r = lemma_first_check(0.0, poles)
        assert r.lhs == pytest.approx(float(np.prod(np.abs(poles))), rel=1e-12, abs=1e-300)
        assert r.passed

    @given(disk, st.lists(disk, min_size=1, max_size=8))
    def test_holds(self, q, poles):
        assert lemma_first_check(q, poles).passed

    def test_rhs_by_hand(self):
        # m = 2: |q| |p1-q| + |q| |p2-q| + |p1-q| |p2-q|
        q, p = 0.5, [0.1, -0.2j]
        a, b = abs(p[0] - q), abs(p[1] - q)
        r = lemma_first_check(q, p)
        assert r.rhs == pytest.approx(0.5 * a + 0.5 * b + a * b, rel=1e-14)
        assert r.lhs == pytest.approx(abs(0.25 - 0.1 * -0.2j), rel=1e-14)

    def test_cap(self):
        with pytest.raises(TooManyPoles):
            lemma_first_check(0.0, np.full(13, 0.1))


class TestLemmaSecond:
    def test_exact_pole(self):
        r = lemma_second_check(0.4, [0.4])
        assert r.lhs == 0.0 and r.rhs == 0.0 and r.passed

    def test_symmetric_pair(self):
        r = lemma_second_check(0.0, [0.1, -0.1], 4096)
        assert r.lhs == pytest.approx(0.01 / 0.99, abs=1e-9)
        assert r.rhs >= r.lhs

    def test_rhs_single_pole(self):
        # m = 1: |p - q| / ((1 - |q|)(1 - |p|))
        r = lemma_second_check(0.2, [0.5], 64)
        assert r.rhs == pytest.approx(0.3 / (0.8 * 0.5), rel=1e-14)

    def test_repeated(self):
        with pytest.raises(RepeatedPole):
            lemma_second_check(0.0, [0.3, 0.3])

    def test_cap(self):
        with pytest.raises(TooManyPoles):
            lemma_second_check(0.0, 0.09 * np.exp(2j * np.pi * np.arange(11) / 11))

    @pytest.mark.parametrize("seed", range(3))
    def test_partial_fraction_identity(self, seed):
        rng = np.random.default_rng(seed)
        p = random_disk_points(rng, 4, 0.9)
        c = simple_pole_coefficients(p)
        z = random_disk_points(rng, 64, 3.0)
        z = z[np.min(np.abs(z[:, None] - p[None, :]), axis=1) > 0.05]
        lhs = np.sum(c / (z[:, None] - p[None, :]), axis=1)
        rhs = 1 / np.prod(z[:, None] - p[None, :], axis=1)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


class TestG:
    def test_two_poles_at_one(self):
        assert g_function(1.0, 2) == pytest.approx(1.3553706878939482, abs=1e-12)
        assert g_function(1.0, 2) < math.pi / 2

    @pytest.mark.parametrize("m", [2, 8, 64])
    def test_matches_textbook_form(self, m):
        for x in [1.0, 2.5, 10.0, 49.5]:
            assert g_function(x, m) == pytest.approx(g_textbook(x, m), rel=1e-10)

    @pytest.mark.parametrize("m", [4, 16, 128])
    def test_is_squared_spiral_gap(self, m):
        k = np.arange(1, m // 2)
        np.testing.assert_allclose(g_function(k.astype(float), m), spiral_gaps(m) ** 2,
                                   rtol=0, atol=1e-10)

    @pytest.mark.parametrize("m", [2, 10, 64])
    def test_limit(self, m):
        assert g_function(1e6, m) == pytest.approx(math.pi / (m / 2 + 1), abs=1e-3)
        assert math.pi / (m / 2 + 1) == pytest.approx((2 * math.pi * winding_constant(m)) ** 2)

    def test_grid(self):
        g = g_grid()
        assert g[0] == 1.0 and g[-1] == pytest.approx(1e6)
        assert np.all(np.diff(g) > 0)
        assert np.count_nonzero(g <= 50) == 99

    @pytest.mark.parametrize("m", range(2, 65, 2))
    def test_monotone_below_limit(self, m):
        assert g_monotonicity_check(m).passed

    def test_detects_decrease(self):
        assert not g_monotonicity_check(4, [5.0, 1.0]).passed


class TestRandomSystem:
    def test_deterministic(self):
        assert dumps(random_system(42, 2, 3, max_mult=3)) == dumps(random_system(42, 2, 3,
                                                                                  max_mult=3))

    def test_dims_and_caps(self):
        S = random_system(7, 3, 2, max_poles=6, max_mult=2, pole_radius_cap=0.5)
        assert S.dims == (3, 2)
        assert len(S.terms) <= 6 and S.m_max <= 2
        assert np.abs(S.poles).max() < 0.5

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            random_system(0, pole_radius_cap=1.0)

    def test_always_real(self):
        for seed in range(1000):
            assert check_realness(random_system(seed, 2, 2, max_mult=3), 1e-9).passed

    @pytest.mark.parametrize("seed", range(10))
    def test_simple_poles_cover_exactly(self, seed):
        S = random_system(seed, max_mult=1)
        P = augment(spiral_poles(4), [q for q in S.poles if q.imag >= 0])
        assert coverage_distance(P, S).D == 0.0


class TestSuite:
    def test_records(self):
        recs = lemma_suite(seed=3, count=40, circle_samples=256, g_max_m=8)
        assert [r["check"] for r in recs] == ["lemma_first", "lemma_second", "g_monotone"]
        assert all(r["passed"] and r["counterexample"] is None for r in recs)
        assert recs[0]["count"] == 40 and recs[2]["count"] == 4

    def test_reproducible(self):
        assert lemma_suite(5, 20, 128, g_max_m=4) == lemma_suite(5, 20, 128, g_max_m=4)
