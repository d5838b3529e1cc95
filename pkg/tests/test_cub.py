import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from cubfuzzy import (
    CubParams,
    FrequencyTable,
    RatingScale,
    cub_pmf,
    fit_em,
    fit_em_counts,
    gini_index,
    log_likelihood,
    moment_init,
    preliminary_pi,
    sample,
    shifted_binomial_pmf,
)
from cubfuzzy.errors import (
    DegenerateDataError,
    DomainError,
    EstimationError,
    NumericalError,
)

# b_r(0.1809), m=7, from exact rational arithmetic (see exact_shifted_binomial)
B_INFORMAT = [
    3.504543065406286e-05,
    0.0009520965919981057,
    0.010777533423240029,
    0.06506635435397758,
    0.2209612390188351,
    0.40019756966352205,
    0.3020101615177731,
]
# 0.7936 * b_r(0.1809) + 0.2064 / 7, exact rationals
P_INFORMAT = [
    0.02951352633948135,
    0.030241298141123984,
    0.03803876481039757,
    0.08112237310103089,
    0.20484055357106185,
    0.3470825055706854,
    0.269160978466219,
]


def exact_shifted_binomial(m, xi):
    xi = Fraction(xi)
    return [math.comb(m - 1, r - 1) * xi ** (m - r) * (1 - xi) ** (r - 1) for r in range(1, m + 1)]


def grid_oracle(counts, m, h=200):
    """Argmax of the CUB log-likelihood over cell centres of an h x h grid."""
    g = (np.arange(h) + 0.5) / h
    r = np.arange(1, m + 1)
    b = binom.pmf(r[None, :] - 1, m - 1, 1 - g[:, None])
    p = g[:, None, None] * b[None, :, :] + (1 - g[:, None, None]) / m
    ll = (np.log(p) * counts).sum(-1)
    i, j = np.unravel_index(np.argmax(ll), ll.shape)
    return g[i], g[j], ll.max()


class TestScale:
    def test_defaults(self):
        s = RatingScale(7)
        assert (s.ip, s.lb, s.ub) == (4, 3, 7)
        assert s.is_balanced

    @pytest.mark.parametrize("kw", [dict(m=3), dict(m=7, lb=4), dict(m=7, ub=4), dict(m=7, ip=7)])
    def test_rejects_bad_bounds(self, kw):
        with pytest.raises(DomainError):
            RatingScale(**kw)

    def test_even_scale_is_not_balanced(self):
        s = RatingScale(6)
        assert not s.is_balanced
        with pytest.raises(DomainError):
            s.require_balanced()


class TestShiftedBinomial:
    def test_symmetric_half(self, scale7):
        b = shifted_binomial_pmf(scale7, 0.5)
        assert b[0] == b[6] == 1 / 64
        np.testing.assert_allclose(b, b[::-1])

    def test_xi_zero_puts_mass_on_top(self, scale7):
        assert shifted_binomial_pmf(scale7, 0.0).tolist() == [0, 0, 0, 0, 0, 0, 1]

    def test_informat_exact(self, scale7):
        b = shifted_binomial_pmf(scale7, 0.1809)
        exact = [float(v) for v in exact_shifted_binomial(7, "0.1809")]
        np.testing.assert_allclose(b, exact, rtol=1e-13)
        np.testing.assert_allclose(b, B_INFORMAT, rtol=1e-13)
        assert int(np.argmax(b)) + 1 == 6

    def test_matches_scipy(self):
        for m in (5, 7, 9, 11):
            for xi in (0.05, 0.3, 0.77):
                ref = binom.pmf(np.arange(m), m - 1, 1 - xi)
                np.testing.assert_allclose(shifted_binomial_pmf(RatingScale(m), xi), ref, rtol=1e-12)

    @pytest.mark.parametrize("xi", [-0.01, 1.01, float("nan")])
    def test_domain(self, scale7, xi):
        with pytest.raises(DomainError):
            shifted_binomial_pmf(scale7, xi)


class TestCubPmf:
    def test_uniform_when_pi_zero(self, scale7):
        np.testing.assert_allclose(cub_pmf(scale7, CubParams(0, 0.3)), np.full(7, 1 / 7), rtol=1e-15)

    def test_pure_binomial_when_pi_one(self, scale7):
        np.testing.assert_array_equal(
            cub_pmf(scale7, CubParams(1, 0.5)), shifted_binomial_pmf(scale7, 0.5)
        )

    def test_informat_mixture(self, scale7):
        p = cub_pmf(scale7, CubParams(0.7936, 0.1809))
        combo = 0.7936 * np.array(B_INFORMAT) + 0.2064 / 7
        np.testing.assert_allclose(p, combo, rtol=1e-12)
        np.testing.assert_allclose(p, P_INFORMAT, rtol=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(
        pi=st.floats(0, 1),
        xi=st.floats(0, 1),
        m=st.integers(4, 15),
    )
    def test_normalized_and_mixture_identity(self, pi, xi, m):
        s = RatingScale(m)
        p = cub_pmf(s, CubParams(pi, xi))
        assert abs(p.sum() - 1) < 1e-12
        mix = pi * shifted_binomial_pmf(s, xi) + (1 - pi) / m
        assert np.max(np.abs(p - mix)) <= 1e-14
        if 0 < pi < 1:
            assert np.all(p > 0)

    @settings(max_examples=100, deadline=None)
    @given(pi=st.floats(0, 1), a=st.floats(0, 1), b=st.floats(0, 1))
    def test_lower_xi_means_higher_ratings(self, pi, a, b):
        lo, hi = sorted((a, b))
        s = RatingScale(7)
        mean = lambda x: float(np.dot(s.categories, cub_pmf(s, CubParams(pi, x))))
        assert mean(lo) >= mean(hi) - 1e-12

    def test_bad_params(self):
        with pytest.raises(DomainError):
            CubParams(1.2, 0.5)


class TestSample:
    def test_uniform_frequencies(self, scale7):
        r = sample(scale7, CubParams(0, 0.5), 70000, 11)
        f = np.bincount(r - 1, minlength=7) / r.size
        assert np.all(np.abs(f - 1 / 7) < 0.01)

    def test_degenerate(self, scale7):
        assert np.all(sample(scale7, CubParams(1, 0), 500, 3) == 7)

    def test_matches_pmf(self, scale7):
        params = CubParams(0.8, 0.2)
        r = sample(scale7, params, 100000, 2024)
        f = np.bincount(r - 1, minlength=7) / r.size
        assert np.all(np.abs(f - cub_pmf(scale7, params)) < 0.01)

    def test_deterministic(self, scale7):
        a = sample(scale7, CubParams(0.5, 0.4), 1000, 99)
        b = sample(scale7, CubParams(0.5, 0.4), 1000, 99)
        np.testing.assert_array_equal(a, b)
        assert a.min() >= 1 and a.max() <= 7

    def test_zero_n(self, scale7):
        with pytest.raises(DomainError):
            sample(scale7, CubParams(0.5, 0.5), 0, 1)


class TestFrequencyTable:
    def test_cdf(self):
        ft = FrequencyTable.from_ratings([4, 4, 5, 7], RatingScale(7))
        np.testing.assert_allclose(ft.freqs, [0, 0, 0, 0.5, 0.25, 0, 0.25])
        np.testing.assert_allclose(ft.cdf, [0, 0, 0, 0.5, 0.75, 0.75, 1])
        assert ft.n == 4
        assert ft.F(0) == 0 and ft.F(7) == 1

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            FrequencyTable.from_counts(np.zeros(7))


class TestGini:
    def test_uniform(self, scale7, flat_freq):
        assert gini_index(flat_freq, scale7) == pytest.approx(1, abs=1e-15)

    def test_point_mass(self, scale7):
        assert gini_index(FrequencyTable.from_counts([0, 0, 5, 0, 0, 0, 0]), scale7) == 0

    def test_two_point(self, scale7):
        ft = FrequencyTable.from_counts([1, 1, 0, 0, 0, 0, 0])
        assert gini_index(ft, scale7) == pytest.approx(7 / 12, abs=1e-15)

    def test_scale_mismatch(self, flat_freq):
        with pytest.raises(DomainError):
            gini_index(flat_freq, RatingScale(5))


class TestPreliminaryPi:
    def test_exact_for_theoretical_frequencies(self, scale7):
        ft = FrequencyTable.from_probabilities(cub_pmf(scale7, CubParams(0.6, 0.3)))
        assert preliminary_pi(ft, scale7, 0.3) == pytest.approx(0.6, abs=1e-10)

    def test_gini_identity(self, scale7):
        # sum p^2 = pi^2 sum b^2 + (1 - pi^2)/m
        for pi, xi in [(0.6, 0.3), (0.2, 0.85), (0.95, 0.05)]:
            p = cub_pmf(scale7, CubParams(pi, xi))
            b = shifted_binomial_pmf(scale7, xi)
            assert np.dot(p, p) == pytest.approx(pi**2 * np.dot(b, b) + (1 - pi**2) / 7, abs=1e-15)
            g_sb = 7 / 6 * (1 - np.dot(b, b))
            g = gini_index(FrequencyTable.from_probabilities(p), scale7)
            assert g == pytest.approx(1 - pi**2 * (1 - g_sb), abs=1e-12)

    def test_uniform_gives_zero(self, scale7, flat_freq):
        assert preliminary_pi(flat_freq, scale7, 0.3) == 0

    def test_pure_binomial_gives_one(self, scale7):
        ft = FrequencyTable.from_probabilities(shifted_binomial_pmf(scale7, 0.25))
        assert preliminary_pi(ft, scale7, 0.25) == pytest.approx(1, abs=1e-12)

    def test_domain(self, scale7, flat_freq):
        with pytest.raises(DomainError):
            preliminary_pi(flat_freq, scale7, 0.0)

    def test_degenerate_relation(self, monkeypatch):
        # interior xi never yields a uniform shifted Binomial for m > 3; stub one in
        from cubfuzzy import cub as cubmod

        monkeypatch.setattr(cubmod, "shifted_binomial_pmf", lambda scale, xi: np.full(scale.m, 0.25))
        with pytest.raises(EstimationError):
            preliminary_pi(FrequencyTable.from_counts([1, 1, 1, 1]), RatingScale(4), 0.5)


class TestMomentInit:
    def test_top_ratings_clamp(self, scale7):
        p = moment_init(FrequencyTable.from_counts([0, 0, 0, 0, 0, 0, 9]), scale7)
        assert p.xi == 0.01

    def test_midpoint(self, scale7, flat_freq):
        p = moment_init(flat_freq, scale7)
        assert p.xi == pytest.approx(0.5)
        assert 0.05 <= p.pi <= 0.95

    def test_simulated(self, scale7):
        r = sample(scale7, CubParams(0.8, 0.2), 10000, 5)
        p = moment_init(FrequencyTable.from_ratings(r, scale7), scale7)
        # E[R] = pi (1 + (m-1)(1-xi)) + (1-pi)(m+1)/2 = 5.44, so xi0 -> (7 - 5.44)/6 = 0.26
        assert abs(p.xi - 0.26) < 0.01
        assert abs(p.xi - 0.2) < 0.07


class TestLogLikelihood:
    def test_single_uniform(self, scale7):
        assert log_likelihood([3], scale7, CubParams(0, 0.4)) == pytest.approx(math.log(1 / 7))

    def test_additive(self, scale7):
        params = CubParams(0.7, 0.3)
        one = log_likelihood([5], scale7, params)
        assert log_likelihood([5] * 12, scale7, params) == pytest.approx(12 * one)

    def test_three_points(self, scale7):
        b = [math.comb(6, r - 1) / 64 for r in (1, 4, 7)]
        expected = sum(math.log(0.5 * v + 0.5 / 7) for v in b)
        assert log_likelihood([1, 4, 7], scale7, CubParams(0.5, 0.5)) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(-6.550341490997944, abs=1e-12)

    def test_zero_probability(self, scale7):
        with pytest.raises(NumericalError) as exc:
            log_likelihood([7, 3], scale7, CubParams(1, 0))
        assert exc.value.category == 3

    def test_out_of_range(self, scale7):
        with pytest.raises(DomainError):
            log_likelihood([0, 3], scale7, CubParams(0.5, 0.5))


class TestFitEM:
    def test_recovers_parameters(self, scale7):
        r = sample(scale7, CubParams(0.8, 0.2), 5000, 17)
        fit = fit_em(r, scale7, tolerance=1e-6)
        assert fit.converged
        assert abs(fit.params.pi - 0.8) < 0.03
        assert abs(fit.params.xi - 0.2) < 0.01
        gp, gx, gl = grid_oracle(np.bincount(r - 1, minlength=7), 7)
        assert abs(fit.params.pi - gp) <= 1 / 200 and abs(fit.params.xi - gx) <= 1 / 200
        assert fit.loglik >= gl - 1e-9

    def test_uniform_data(self, scale7):
        r = sample(scale7, CubParams(0, 0.5), 5000, 23)
        fit = fit_em(r, scale7)
        assert fit.params.pi < 0.1
        gp, _, gl = grid_oracle(np.bincount(r - 1, minlength=7), 7)
        assert gp < 0.1
        assert fit.loglik >= gl - 1e-6

    @settings(max_examples=60, deadline=None)
    @given(counts=st.lists(st.integers(0, 400), min_size=7, max_size=7).filter(
        lambda c: sum(1 for v in c if v > 0) >= 2))
    def test_ascent(self, counts):
        fit = fit_em_counts(counts, RatingScale(7))
        d = np.diff(fit.loglik_trace)
        assert np.all(d >= -1e-10)
        if fit.converged:
            assert abs(fit.loglik_trace[-1] - fit.loglik_trace[-2]) < 1e-6

    @pytest.mark.parametrize("pi,xi", [(0.3, 0.9), (0.95, 0.1), (0.8, 0.2), (0.3, 0.45), (0.6, 0.7)])
    def test_fixpoint(self, scale7, pi, xi):
        counts = cub_pmf(scale7, CubParams(pi, xi)) * 1e5
        fit = fit_em_counts(counts, scale7)
        assert abs(fit.params.pi - pi) < 1e-3
        assert abs(fit.params.xi - xi) < 1e-3

    def test_degenerate(self, scale7):
        with pytest.raises(DegenerateDataError):
            fit_em([5] * 20, scale7)

    def test_trace_and_iterations(self, scale7):
        r = sample(scale7, CubParams(0.6, 0.4), 800, 1)
        fit = fit_em(r, scale7, max_iter=3, tolerance=1e-12)
        assert fit.iterations == 3 and not fit.converged
        assert len(fit.loglik_trace) == 4
        assert fit.n == 800
