import math

import numpy as np
import pytest

from levysmile import ArbitrageBoundsError, IVConvergenceError, Quote, bs_price, bs_vega, implied_vol


X = math.log(50.0)


class TestBsPrice:
    def test_atm_vanishing_variance(self):
        assert bs_price("call", X, X, 1e-18, 0.2) == 0.0
        assert bs_price("call", X, X, 0.5, 1e-14) == 0.0

    def test_atm_reference_value(self):
        # 50 * (Phi(d1) - Phi(-d1)) with d1 = sigma sqrt(t) / 2
        d1 = 0.2 * math.sqrt(0.1) / 2.0
        expected = 50.0 * (math.erf(d1 / math.sqrt(2.0)))
        got = bs_price("call", X, X, 0.1, 0.2)
        assert got == pytest.approx(expected, rel=1e-14)
        assert got == pytest.approx(1.2615, abs=2e-4)

    def test_put_call_parity(self):
        for lm in (-0.4, -0.1, 0.0, 0.2):
            k = X + lm
            call = bs_price("call", X, k, 0.7, 0.35)
            put = bs_price("put", X, k, 0.7, 0.35)
            assert call - put == pytest.approx(math.exp(X) - math.exp(k), abs=1e-10)

    def test_call_bounds(self):
        k = X + 0.1
        p = bs_price("call", X, k, 0.5, 0.25)
        assert max(math.exp(X) - math.exp(k), 0.0) < p < math.exp(X)

    def test_monotone_in_sigma(self):
        sigmas = np.linspace(0.05, 2.0, 30)
        prices = [bs_price("call", X, X + 0.2, 0.3, s) for s in sigmas]
        assert all(b > a for a, b in zip(prices, prices[1:]))

    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            bs_price("straddle", X, X, 1.0, 0.2)


class TestVega:
    def test_matches_finite_difference(self):
        h = 1e-6
        for lm, t, sig in ((-0.2, 0.5, 0.3), (0.1, 0.1, 0.2), (0.0, 2.0, 0.8)):
            k = X + lm
            fd = (bs_price("call", X, k, t, sig + h) - bs_price("call", X, k, t, sig - h)) / (2 * h)
            assert bs_vega(X, k, t, sig) == pytest.approx(fd, rel=1e-7)


class TestImpliedVol:
    def test_round_trip(self):
        price = bs_price("call", X, X + 0.1, 0.4, 0.2)
        assert implied_vol("call", X, X + 0.1, 0.4, price) == pytest.approx(0.2, abs=1e-9)

    def test_upper_bound_rejected(self):
        with pytest.raises(ArbitrageBoundsError):
            implied_vol("call", X, X, 0.5, math.exp(X))

    def test_below_intrinsic_rejected(self):
        k = X - 0.2
        with pytest.raises(ArbitrageBoundsError):
            implied_vol("call", X, k, 0.5, math.exp(X) - math.exp(k))

    def test_high_vol_deep_otm(self):
        # flat-vega wing exercises the bisection safeguard
        price = bs_price("call", X, X + 0.5, 0.05, 1.7)
        assert implied_vol("call", X, X + 0.5, 0.05, price) == pytest.approx(1.7, abs=1e-7)

    def test_out_of_bracket_reported(self):
        price = bs_price("call", X, X, 0.5, 6.0)  # above the 5.0 cap
        with pytest.raises(IVConvergenceError):
            implied_vol("call", X, X, 0.5, price)

    def test_put_round_trip(self):
        price = bs_price("put", X, X - 0.15, 0.25, 0.45)
        assert implied_vol("put", X, X - 0.15, 0.25, price) == pytest.approx(0.45, abs=1e-9)

    def test_round_trip_grid(self):
        # sigma in [0.05, 2], |k - x| <= 1, t in [0.02, 2]; corners where
        # the price degenerates below vega resolution are skipped.
        checked = 0
        for sig in (0.05, 0.2, 0.7, 2.0):
            for lm in (-1.0, -0.3, 0.0, 0.3, 1.0):
                for t in (0.02, 0.25, 2.0):
                    price = bs_price("call", X, X + lm, t, sig)
                    lo = max(math.exp(X) - math.exp(X + lm), 0.0)
                    if price - lo < 1e-12 * math.exp(X):
                        continue
                    if bs_vega(X, X + lm, t, sig) < 1e-8 * math.exp(X):
                        continue
                    got = implied_vol("call", X, X + lm, t, price)
                    assert got == pytest.approx(sig, abs=1e-7)
                    checked += 1
        assert checked >= 40


class TestQuote:
    def test_valid_quote(self):
        q = Quote(t=0.25, k=X + 0.1, x=X, iv=0.3)
        assert q.log_moneyness == pytest.approx(0.1)

    def test_invalid_maturity(self):
        with pytest.raises(ValueError):
            Quote(t=0.0, k=X, x=X, iv=0.3)

    def test_invalid_vol(self):
        with pytest.raises(ValueError):
            Quote(t=0.5, k=X, x=X, iv=6.0)
