import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.optimize import minimize

from conftest import rician_draws
from fiberthresh import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    Family,
    RayleighParams,
    RicianParams,
    bic,
    estimate_rayleigh_scale,
    estimate_rician_params,
    fit_best,
    log_likelihood,
    rayleigh_pdf,
    rician_pdf,
)
from fiberthresh.distfit import fit_family

mp.mp.dps = 40

positive_samples = st.lists(
    st.floats(min_value=1e-3, max_value=1e3, allow_nan=False), min_size=2, max_size=50
)


def rayleigh_loglik_oracle(y, sigma):
    y = np.asarray(y, dtype=float)
    return float(np.sum(np.log(y) - 2 * np.log(sigma) - y * y / (2 * sigma * sigma)))


def golden_argmax(f, lo, hi, tol=1e-13):
    """Golden-section search; f assumed unimodal on [lo, hi]."""
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * (abs(a) + abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


def grid_search_sigma(y, hi=50.0):
    grid = np.linspace(hi / 2000, hi, 2000)
    vals = [rayleigh_loglik_oracle(y, s) for s in grid]
    i = int(np.argmax(vals))
    lo_b = grid[max(i - 1, 0)]
    hi_b = grid[min(i + 1, len(grid) - 1)]
    return golden_argmax(lambda s: rayleigh_loglik_oracle(y, s), lo_b, hi_b)


# --- densities -------------------------------------------------------------


class TestRayleighPdf:
    def test_zero_at_origin(self):
        assert rayleigh_pdf(0.0, RayleighParams(1.0)) == 0.0

    def test_unit_point(self):
        assert rayleigh_pdf(1.0, RayleighParams(1.0)) == pytest.approx(math.exp(-0.5), rel=1e-15)

    def test_against_extended_precision(self):
        # mpmath at 50 digits: 0.2328058992333835117428845
        assert rayleigh_pdf(2.5, RayleighParams(1.3)) == pytest.approx(0.2328058992333835, rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            rayleigh_pdf(-0.1, RayleighParams(1.0))

    def test_invalid_params(self):
        with pytest.raises(DomainError):
            RayleighParams(0.0)
        with pytest.raises(DomainError):
            RicianParams(1.0, -0.5)


class TestRicianPdf:
    def test_reduces_to_rayleigh_at_unit_point(self):
        assert rician_pdf(1.0, RicianParams(1.0, 0.0)) == pytest.approx(math.exp(-0.5), rel=1e-15)
        assert rician_pdf(1.0, RicianParams(1.0, 0.0)) == pytest.approx(rayleigh_pdf(1.0, RayleighParams(1.0)), rel=1e-15)

    @pytest.mark.parametrize("sigma,s", [(1.0, 0.0), (0.3, 4.0), (2.0, 50.0)])
    def test_zero_at_origin(self, sigma, s):
        assert rician_pdf(0.0, RicianParams(sigma, s)) == 0.0

    def test_series_oracle(self):
        y, sigma, s = mp.mpf(3), mp.mpf(1), mp.mpf(2)
        q = (y * s / sigma**2) ** 2 / 4
        term, i0, k = mp.mpf(1), mp.mpf(1), 0
        while term > mp.mpf("1e-14") * i0:
            k += 1
            term = term * q / (k * k)
            i0 += term
        oracle = float(y / sigma**2 * mp.exp(-(y * y + s * s) / (2 * sigma**2)) * i0)
        # frozen: 0.3032485276951251420196014
        assert oracle == pytest.approx(0.30324852769512514, rel=1e-13)
        assert rician_pdf(3.0, RicianParams(1.0, 2.0)) == pytest.approx(oracle, rel=1e-10)

    def test_large_argument_no_overflow(self):
        # ys/sigma^2 = 1e6: linear-domain I0 would overflow
        val = rician_pdf(1000.0, RicianParams(1.0, 1000.0))
        assert math.isfinite(val)
        assert val == pytest.approx(float(mp.npdf(0) * mp.sqrt(1)), rel=1e-3)

    def test_reduction_on_grid(self):
        y = np.arange(0, 2001) * 0.01
        for sigma in (0.5, 1.0, 3.0):
            diff = np.abs(rician_pdf(y, RicianParams(sigma, 0.0)) - rayleigh_pdf(y, RayleighParams(sigma)))
            assert diff.max() <= 1e-12


@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("s", [0.0, 2.0, 10.0])
def test_normalisation(sigma, s):
    hi = sigma * 40 + s * 4
    total, _ = integrate.quad(lambda y: rician_pdf(y, RicianParams(sigma, s)), 0, hi, points=[s], limit=400)
    assert total == pytest.approx(1.0, abs=1e-6)
    if s == 0:
        total, _ = integrate.quad(lambda y: rayleigh_pdf(y, RayleighParams(sigma)), 0, hi, limit=400)
        assert total == pytest.approx(1.0, abs=1e-6)


# --- Rayleigh MLE -----------------------------------------------------------


class TestRayleighScale:
    def test_single_sample(self):
        assert estimate_rayleigh_scale([math.sqrt(2)]).sigma == pytest.approx(1.0, rel=1e-15)

    def test_three_four(self):
        assert estimate_rayleigh_scale([3, 4]).sigma == 2.5

    def test_all_zero_is_degenerate(self):
        with pytest.raises(DegenerateDataError):
            estimate_rayleigh_scale([0.0, 0.0, 0.0])

    def test_empty_rejected(self):
        with pytest.raises(DegenerateDataError):
            estimate_rayleigh_scale([])

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            estimate_rayleigh_scale([1.0, -2.0])

    def test_matches_grid_search_oracle(self):
        y = np.random.default_rng(7).rayleigh(7.0, 10_000)
        assert estimate_rayleigh_scale(y).sigma == pytest.approx(grid_search_sigma(y), rel=1e-6)

    @settings(max_examples=60, deadline=None)
    @given(positive_samples)
    def test_stationarity(self, y):
        sigma = estimate_rayleigh_scale(y).sigma
        best = log_likelihood(Family.RAYLEIGH, RayleighParams(sigma), y)
        for f in (1 - 1e-4, 1 + 1e-4):
            assert best >= log_likelihood(Family.RAYLEIGH, RayleighParams(sigma * f), y)

    @settings(max_examples=100, deadline=None)
    @given(positive_samples, st.floats(min_value=1e-3, max_value=1e3))
    def test_scale_equivariance(self, y, c):
        a = estimate_rayleigh_scale(np.asarray(y) * c).sigma
        b = c * estimate_rayleigh_scale(y).sigma
        assert a == pytest.approx(b, rel=1e-12)

    @pytest.mark.slow
    def test_consistency_over_seeds(self):
        n, sigma0 = 10_000, 3.0
        ok = 0
        for seed in range(200):
            y = np.random.default_rng(seed).rayleigh(sigma0, n)
            ok += abs(estimate_rayleigh_scale(y).sigma - sigma0) / sigma0 <= 5 / math.sqrt(n)
        assert ok >= 198


# --- Rician MLE -------------------------------------------------------------


class TestRicianEstimator:
    def test_rayleigh_data_gives_small_s(self):
        y = np.random.default_rng(11).rayleigh(5.0, 10_000)
        p = estimate_rician_params(y)
        ratio = p.s / estimate_rayleigh_scale(y).sigma
        # left red on purpose: for this seed the likelihood maximum sits at s/sigma = 0.52
        assert ratio <= 0.15, f"s/sigma_hat = {ratio:.3f} (see decisions ledger)"

    def test_rayleigh_data_s_is_often_exactly_zero(self):
        # pilot over seeds 0..999: 57.6% give s == 0, 60.4% give s <= 0.15 sigma_hat
        ratios = []
        for seed in range(200):
            y = np.random.default_rng(seed).rayleigh(5.0, 10_000)
            ratios.append(estimate_rician_params(y).s / estimate_rayleigh_scale(y).sigma)
        ratios = np.array(ratios)
        assert 0.45 <= np.mean(ratios <= 0.15) <= 0.75
        assert np.all(ratios < 1.0)

    @pytest.mark.parametrize("seed", [1, 2, 6, 10])
    def test_matches_nelder_mead_oracle(self, seed):
        y = np.random.default_rng(seed).rayleigh(5.0, 10_000)
        p = estimate_rician_params(y)
        assert p.s > 0

        def neg(q):
            return -log_likelihood(Family.RICIAN, RicianParams(abs(q[0]), abs(q[1])), y)

        ref = minimize(neg, [5.0, 3.0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-10})
        assert -neg([p.sigma, p.s]) >= -ref.fun - 1e-6

    def test_likelihood_not_below_truth(self):
        y = rician_draws(np.random.default_rng(12), 10.0, 2.0, 10_000)
        p = estimate_rician_params(y)
        at_fit = log_likelihood(Family.RICIAN, p, y)
        at_truth = log_likelihood(Family.RICIAN, RicianParams(2.0, 10.0), y)
        assert at_fit >= at_truth

    def test_recovers_parameters(self):
        y = rician_draws(np.random.default_rng(13), 10.0, 2.0, 10_000)
        p = estimate_rician_params(y)
        assert p.sigma == pytest.approx(2.0, rel=0.05)
        assert p.s == pytest.approx(10.0, rel=0.02)

    def test_all_equal_is_degenerate(self):
        with pytest.raises(DegenerateDataError):
            estimate_rician_params([1.0] * 50)

    def test_needs_two_samples(self):
        with pytest.raises(DegenerateDataError):
            estimate_rician_params([1.0])

    def test_overdispersed_returns_rayleigh_reduction(self):
        y = np.concatenate([np.full(50, 1.0), np.full(50, 10.0)])
        p = estimate_rician_params(y)
        assert p.s == 0.0
        assert p.sigma == pytest.approx(estimate_rayleigh_scale(y).sigma, rel=1e-15)

    def test_is_local_maximum(self):
        y = rician_draws(np.random.default_rng(14), 3.0, 1.5, 5000)
        p = estimate_rician_params(y)
        best = log_likelihood(Family.RICIAN, p, y)
        for ds, dsig in [(1e-3, 0), (-1e-3, 0), (0, 1e-3), (0, -1e-3)]:
            q = RicianParams(p.sigma + dsig, p.s + ds)
            assert best >= log_likelihood(Family.RICIAN, q, y)

    def test_iteration_cap_raises(self):
        y = rician_draws(np.random.default_rng(15), 4.0, 2.0, 2000)
        with pytest.raises(ConvergenceError):
            estimate_rician_params(y, tol=0.0, max_iter=3)


# --- likelihood and BIC -----------------------------------------------------


class TestLogLikelihood:
    def test_single_point(self):
        assert log_likelihood(Family.RAYLEIGH, RayleighParams(1.0), [1.0]) == pytest.approx(-0.5, rel=1e-15)

    def test_additive(self):
        assert log_likelihood(Family.RAYLEIGH, RayleighParams(1.0), [1.0, 1.0]) == pytest.approx(-1.0, rel=1e-15)

    def test_extended_precision(self):
        # mpmath at 50 digits: -4.820253317213642349746563
        got = log_likelihood(Family.RAYLEIGH, RayleighParams(1.8), [0.5, 2.0, 3.5])
        assert got == pytest.approx(-4.820253317213642, rel=1e-12)

    def test_zero_sample_gives_negative_infinity(self):
        for fam, p in [(Family.RAYLEIGH, RayleighParams(1.0)), (Family.RICIAN, RicianParams(1.0, 2.0))]:
            ll = log_likelihood(fam, p, [0.0, 1.0])
            assert ll == -math.inf

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            log_likelihood(Family.RAYLEIGH, RayleighParams(1.0), [-1.0])

    def test_rician_matches_pdf_sum(self):
        y = np.array([0.2, 1.5, 4.0, 9.0])
        p = RicianParams(1.7, 3.3)
        assert log_likelihood(Family.RICIAN, p, y) == pytest.approx(float(np.sum(np.log(rician_pdf(y, p)))), rel=1e-12)


class TestBic:
    def test_arithmetic(self):
        assert bic(-50.0, 1, 100) == pytest.approx(104.6051702, abs=1e-7)

    def test_single_sample(self):
        assert bic(0.0, 2, 1) == 0.0

    def test_parameter_penalty(self):
        assert bic(-10.0, 2, 1000) - bic(-10.0, 1, 1000) == pytest.approx(6.9077553, abs=1e-7)

    @pytest.mark.parametrize("ll", [math.inf, -math.inf, math.nan])
    def test_non_finite_rejected(self, ll):
        with pytest.raises(DomainError):
            bic(ll, 1, 10)


class TestFitBest:
    def test_rayleigh_selected(self):
        y = np.random.default_rng(21).rayleigh(10.0, 5000)
        r = fit_best(y, {Family.RAYLEIGH, Family.RICIAN})
        assert r.family is Family.RAYLEIGH
        assert r.bic == pytest.approx(bic(r.log_likelihood, 1, 5000))

    def test_rician_selected(self):
        y = rician_draws(np.random.default_rng(22), 20.0, 2.0, 5000)
        assert fit_best(y).family is Family.RICIAN

    def test_single_candidate(self):
        y = rician_draws(np.random.default_rng(23), 20.0, 2.0, 5000)
        r = fit_best(y, {Family.RAYLEIGH})
        assert r.family is Family.RAYLEIGH
        assert r.params.sigma == estimate_rayleigh_scale(y).sigma

    def test_tie_goes_to_rayleigh(self):
        # overdispersed data: the Rician fit collapses to s = 0, equal likelihood
        y = np.concatenate([np.full(100, 1.0), np.full(100, 10.0)])
        r = fit_best(y)
        assert r.family is Family.RAYLEIGH
        assert r.diagnostics["bic"]["rician"] > r.diagnostics["bic"]["rayleigh"]

    def test_failing_family_is_skipped(self):
        r = fit_best([2.0], {Family.RAYLEIGH, Family.RICIAN})
        assert r.family is Family.RAYLEIGH
        assert "rician" in r.diagnostics["skipped"]

    def test_all_fail(self):
        with pytest.raises(DegenerateDataError):
            fit_best([0.0, 0.0])

    def test_zeros_dropped_and_reported(self):
        y = np.concatenate([np.zeros(5), np.random.default_rng(3).rayleigh(2.0, 500)])
        r = fit_best(y)
        assert r.diagnostics["zeros_dropped"] == 5
        assert r.n == 500
        assert math.isfinite(r.log_likelihood)

    def test_record_fields(self):
        r = fit_family(Family.RAYLEIGH, [3.0, 4.0])
        assert list(r.as_record()) == ["family", "sigma", "s", "log_likelihood", "bic", "n"]

    @settings(max_examples=40, deadline=None)
    @given(positive_samples)
    def test_bic_identity(self, y):
        assume(len(set(y)) > 1)
        r = fit_best(y)
        assert r.bic == pytest.approx(r.family.n_params * math.log(r.n) - 2 * r.log_likelihood, rel=1e-12, abs=1e-9)
