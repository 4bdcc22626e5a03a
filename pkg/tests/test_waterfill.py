import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdgap import spectra, waterfill

TWO_LEVEL = spectra.parse_spectrum("1.8:0.5,0.2:0.5")
SEMI_HALF = spectra.semi_flat(0.5)
FLAT = spectra.flat()

# Frozen by an independent high-precision (50-digit decimal) bisection oracle.
RR_WF_TWO_LEVEL_AT_02 = 0.792481250360578


class TestDWf:
    def test_flat_quarter(self):
        assert waterfill.d_wf(FLAT, 0.25) == 0.25

    def test_semi_flat_level_one(self):
        assert waterfill.d_wf(SEMI_HALF, 1.0) == 0.5

    def test_two_level(self):
        assert waterfill.d_wf(TWO_LEVEL, 0.5) == pytest.approx(0.35, abs=1e-15)

    def test_saturates_at_one(self):
        assert waterfill.d_wf(TWO_LEVEL, 1.8) == 1.0
        assert waterfill.d_wf(TWO_LEVEL, 7.0) == 1.0

    @pytest.mark.parametrize("t", [0.0, -0.5])
    def test_nonpositive_t(self, t):
        with pytest.raises(ValueError):
            waterfill.d_wf(FLAT, t)

    @given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=300))
    def test_nondecreasing_in_t(self, k, seed):
        s = spectra.sample_random(k, seed)
        grid = [0.01 * i for i in range(1, 150)]
        ds = [waterfill.d_wf(s, t) for t in grid]
        assert all(a <= b + 1e-15 for a, b in zip(ds, ds[1:]))
        assert all(0.0 < d <= 1.0 for d in ds)


class TestRWf:
    def test_flat_quarter(self):
        assert waterfill.r_wf(FLAT, 0.25) == 1.0

    def test_semi_flat(self):
        assert waterfill.r_wf(SEMI_HALF, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_zero_above_max(self):
        assert waterfill.r_wf(TWO_LEVEL, 1.8) == 0.0
        assert waterfill.r_wf(TWO_LEVEL, 10.0) == 0.0

    def test_zero_levels_contribute_nothing(self):
        # semi_flat(0.5) has a zero level; rate must stay finite and equal
        # the active-level term alone.
        assert waterfill.r_wf(SEMI_HALF, 0.125) == 0.5 * 0.5 * math.log2(2.0 / 0.125)

    @given(st.integers(min_value=2, max_value=8), st.integers(min_value=0, max_value=300))
    def test_nonincreasing_in_t(self, k, seed):
        s = spectra.sample_random(k, seed)
        grid = [0.01 * i for i in range(1, 150)]
        rs = [waterfill.r_wf(s, t) for t in grid]
        assert all(a >= b - 1e-15 for a, b in zip(rs, rs[1:]))
        assert all(r >= 0.0 for r in rs)


class TestTForDistortion:
    def test_flat(self):
        assert waterfill.t_for_distortion(FLAT, 0.25) == 0.25

    def test_semi_flat(self):
        assert waterfill.t_for_distortion(SEMI_HALF, 0.5) == 1.0

    def test_two_level_inverse(self):
        assert waterfill.t_for_distortion(TWO_LEVEL, 0.35) == pytest.approx(0.5, abs=1e-13)

    @pytest.mark.parametrize("d", [0.0, 1.0, 1.5, -0.2])
    def test_domain_errors(self, d):
        with pytest.raises(ValueError):
            waterfill.t_for_distortion(FLAT, d)

    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=200))
    def test_round_trip(self, k, seed):
        s = spectra.sample_random(k, seed)
        for i in range(1, 20):
            d = 0.005 + (0.995 - 0.005) * i / 20.0
            t = waterfill.t_for_distortion(s, d)
            assert abs(waterfill.d_wf(s, t) - d) < 1e-10


class TestRrWf:
    def test_flat_closed_form(self):
        assert waterfill.rr_wf(FLAT, 0.25) == 1.0

    def test_semi_flat_half(self):
        # (f/2) log2(1/D) with f=0.5, D=0.5.
        assert waterfill.rr_wf(SEMI_HALF, 0.5) == pytest.approx(0.25, abs=1e-12)

    def test_two_level_oracle_value(self):
        assert waterfill.rr_wf(TWO_LEVEL, 0.2) == pytest.approx(
            RR_WF_TWO_LEVEL_AT_02, abs=1e-12
        )

    def test_strictly_decreasing_in_distortion(self):
        s = spectra.sample_random(5, 17)
        grid = [0.05 * i for i in range(1, 20)]
        rs = [waterfill.rr_wf(s, d) for d in grid]
        assert all(a > b for a, b in zip(rs, rs[1:]))


class TestDdWf:
    def test_flat_rate_one(self):
        assert waterfill.dd_wf(FLAT, 1.0) == 0.25

    def test_rate_zero_is_one(self):
        assert waterfill.dd_wf(FLAT, 0.0) == 1.0
        assert waterfill.dd_wf(TWO_LEVEL, 0.0) == 1.0

    def test_semi_flat_half(self):
        # rr_wf(semi_flat(0.5), D) = 0.25 log2(1/D); rate 0.5 inverts to 0.25.
        assert waterfill.dd_wf(SEMI_HALF, 0.5) == pytest.approx(0.25, abs=1e-12)

    def test_negative_rate(self):
        with pytest.raises(ValueError):
            waterfill.dd_wf(FLAT, -0.1)

    def test_flat_closed_form_grid(self):
        for i in range(1, 61):
            r = 0.1 * i
            assert abs(waterfill.dd_wf(FLAT, r) - 2.0 ** (-2.0 * r)) < 1e-10

    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=200))
    def test_inverts_rr_wf(self, k, seed):
        s = spectra.sample_random(k, seed)
        for d in (0.1, 0.5, 0.9):
            r = waterfill.rr_wf(s, d)
            assert abs(waterfill.dd_wf(s, r) - d) < 1e-9


class TestPerCoordDistortions:
    def test_flat(self):
        assert waterfill.per_coord_distortions(FLAT, 0.25) == [0.25]

    def test_zero_level_gets_one(self):
        assert waterfill.per_coord_distortions(SEMI_HALF, 1.0) == [0.5, 1.0]

    def test_all_ones_above_max(self):
        assert waterfill.per_coord_distortions(TWO_LEVEL, 2.5) == [1.0, 1.0]

    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=200),
           st.floats(min_value=0.01, max_value=3.0))
    def test_weighted_reconstruction_identity(self, k, seed, t):
        s = spectra.sample_random(k, seed)
        ds = waterfill.per_coord_distortions(s, t)
        recon = sum(w * v * d for w, v, d in zip(s.weights, s.values, ds))
        assert abs(recon - waterfill.d_wf(s, t)) < 1e-12


class TestWfPoint:
    def test_point_consistency(self):
        p = waterfill.point_at_distortion(TWO_LEVEL, 0.35)
        assert abs(p.distortion - waterfill.d_wf(TWO_LEVEL, p.level_t)) < 1e-10
        assert p.rate_bits == waterfill.r_wf(TWO_LEVEL, p.level_t)

    def test_rate_zero_iff_level_above_max(self):
        assert waterfill.r_wf(TWO_LEVEL, 1.8) == 0.0
        assert waterfill.r_wf(TWO_LEVEL, 1.7999) > 0.0
