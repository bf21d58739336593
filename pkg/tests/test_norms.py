import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spa_kit.errors import DimensionMismatch, TruncationOverflow
from spa_kit.norms import (block_toeplitz, h2_distance, h2_norm, hinf_distance, hinf_norm,
                           hinf_norm_toeplitz, spectral_norms)
from spa_kit.oracles import random_system
from spa_kit.tfcore import RationalSystem

from conftest import siso

seeds = st.integers(0, 100_000)


def brute_h2(S, T):
    """Direct Frobenius sum of the binomial impulse formula over ``k = 1..T``."""
    k = np.arange(1, T + 1)
    h = np.zeros((T,) + S.dims, dtype=complex)
    for t in S.terms:
        for j, C in enumerate(t.coefficients, start=1):
            if t.pole == 0:
                w = (k == j).astype(float)
            else:
                binom = np.array([comb(int(x) - 1, j - 1) if x >= j else 0 for x in k], float)
                w = binom * t.pole ** np.maximum(k - j, 0).astype(float)
            h += w[:, None, None] * C[None]
    return math.sqrt(float(np.sum(np.abs(h) ** 2)))


class TestH2:
    def test_unit_delay(self):
        assert h2_norm(siso((0.0, [1.0]))) == pytest.approx(1.0, abs=1e-12)

    def test_geometric(self):
        assert h2_norm(siso((0.5, [1.0])), 1e-9) == pytest.approx(2 / math.sqrt(3), abs=1e-9)

    def test_sum_with_delay(self):
        # impulse is 2, 0.5, 0.25, ... so the energy is 4 + 1/3
        S = siso((0.5, [1.0]), (0.0, [1.0]))
        assert h2_norm(S) == pytest.approx(brute_h2(S, 10_000), abs=1e-8)
        assert h2_norm(S) == pytest.approx(math.sqrt(4 + 1 / 3), abs=1e-9)

    def test_zero_system(self):
        assert h2_norm(RationalSystem.zero((2, 2))) == 0.0

    def test_bad_tol(self):
        with pytest.raises(ValueError):
            h2_norm(siso((0.5, [1.0])), 0.0)

    def test_overflow_near_circle(self):
        with pytest.raises(TruncationOverflow):
            h2_norm(siso((0.9999999, [1.0])), 1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_against_long_brute_force(self, seed):
        S = random_system(seed, 2, 2, max_poles=4, max_mult=2, pole_radius_cap=0.99)
        assert h2_norm(S, 1e-9) == pytest.approx(brute_h2(S, 100_000), abs=1e-7)


class TestHinf:
    def test_geometric(self):
        assert hinf_norm(siso((0.5, [1.0])), 1e-6) == pytest.approx(2.0, abs=1e-6)

    def test_allpass(self):
        assert hinf_norm(siso((0.0, [1.0]))) == pytest.approx(1.0, abs=1e-12)

    def test_slow_pole(self):
        assert hinf_norm(siso((0.9, [1.0])), 1e-6) == pytest.approx(10.0, abs=1e-6)

    def test_interior_peak(self):
        # a resonant pair peaks away from the grid endpoints
        S = siso((0.6 + 0.7j, [1.0]), (0.6 - 0.7j, [1.0]))
        z = np.exp(1j * np.linspace(0.0, np.pi, 2_000_001))
        dense = float(np.max(np.abs(1 / (z - (0.6 + 0.7j)) + 1 / (z - (0.6 - 0.7j)))))
        v = hinf_norm(S, 1e-10)
        assert v == pytest.approx(dense, rel=1e-9)

    def test_distance_two_ways(self):
        S1 = siso((0.1, [1.0]))
        S2 = siso((-0.1, [1.0]))
        # difference is 0.2 / (z^2 - 0.01), peaking at z = +-1
        assert hinf_distance(S1, S2) == pytest.approx(0.2 / 0.99, abs=1e-8)
        theta = np.linspace(0.0, 2 * np.pi, 100_001)
        z = np.exp(1j * theta)
        pointwise = np.max(np.abs(1 / (z - 0.1) - 1 / (z + 0.1)))
        assert hinf_distance(S1, S2) == pytest.approx(pointwise, abs=1e-8)

    @given(seeds)
    def test_not_below_coarse_grid(self, seed):
        S = random_system(seed, 2, 3, max_mult=2)
        theta = np.linspace(0.0, 2 * np.pi, 997)
        coarse = spectral_norms(np.stack([S(np.exp(1j * t)) for t in theta])).max()
        assert hinf_norm(S) >= coarse - 1e-12


class TestToeplitz:
    def test_block_layout(self):
        s = np.arange(1.0, 4.0).reshape(3, 1, 1)
        np.testing.assert_array_equal(block_toeplitz(s), [[1, 0, 0], [2, 1, 0], [3, 2, 1]])

    @pytest.mark.parametrize("T", [1, 7, 30])
    def test_unit_delay(self, T):
        assert hinf_norm_toeplitz(siso((0.0, [1.0])), T) == pytest.approx(1.0)

    def test_geometric_from_below(self):
        v = hinf_norm_toeplitz(siso((0.5, [1.0])), 50)
        assert 1.99 < v <= 2.0

    def test_bad_T(self):
        with pytest.raises(ValueError):
            hinf_norm_toeplitz(siso((0.5, [1.0])), 0)

    @pytest.mark.parametrize("seed", range(20))
    def test_monotone_and_bounded(self, seed):
        S = random_system(seed, 2, 2, max_mult=2)
        a, b, c = (hinf_norm_toeplitz(S, T) for T in (10, 20, 40))
        assert a <= b + 1e-12 and b <= c + 1e-12
        assert c <= hinf_norm(S, 1e-8) + 1e-6


class TestMetric:
    @given(seeds)
    def test_self_distance(self, seed):
        S = random_system(seed, 2, 2, max_mult=3)
        assert h2_distance(S, S) == 0.0
        assert hinf_distance(S, S) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            h2_distance(random_system(1, 1, 1), random_system(1, 2, 1))
        with pytest.raises(DimensionMismatch):
            hinf_distance(random_system(1, 1, 1), random_system(1, 1, 2))

    def test_triangle_inequality(self):
        for seed in range(50):
            A, B, C = (random_system(3 * seed + i, 2, 2, max_mult=2) for i in range(3))
            for d in (h2_distance, hinf_distance):
                assert d(A, C) <= d(A, B) + d(B, C) + 1e-9

    @given(seeds)
    def test_h2_below_scaled_hinf(self, seed):
        rng = np.random.default_rng(seed)
        n, m = rng.integers(1, 4, size=2)
        S = random_system(seed, int(n), int(m), max_mult=2)
        assert h2_norm(S) <= math.sqrt(min(n, m)) * hinf_norm(S) + 1e-6

    @given(seeds, st.floats(-5.0, 5.0).filter(lambda a: abs(a) > 1e-3))
    def test_homogeneity(self, seed, alpha):
        S = random_system(seed, 2, 2, max_mult=2)
        assert h2_norm(alpha * S) == pytest.approx(abs(alpha) * h2_norm(S), rel=1e-10)
        assert hinf_norm(alpha * S) == pytest.approx(abs(alpha) * hinf_norm(S), rel=1e-10)
