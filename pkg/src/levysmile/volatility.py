"""Zero-rate Black-Scholes pricing and implied-volatility inversion.

Implied volatility is the smile coordinate used by the calibration and
verification layers; the solver is a safeguarded Newton iteration on
log-price with an analytic vega and a bisection fallback, bracketed on
[1e-4, 5].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ArbitrageBoundsError, IVConvergenceError

IV_MIN = 1e-4
IV_MAX = 5.0

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / _SQRT2)


def norm_pdf(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


@dataclass(frozen=True)
class Quote:
    """One observed implied-volatility point: maturity, log-strike, log-spot, vol."""

    t: float
    k: float
    x: float
    iv: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"quote maturity must be > 0, got {self.t}")
        if not (IV_MIN <= self.iv <= IV_MAX):
            raise ValueError(f"quote iv must lie in [{IV_MIN}, {IV_MAX}], got {self.iv}")

    @property
    def log_moneyness(self) -> float:
        return self.k - self.x


def bs_price(kind: str, x: float, k: float, t: float, sigma: float) -> float:
    """Black-Scholes value at zero rates for spot e^x, strike e^k.

    Degenerate total variance (sigma^2 * t below machine noise) returns
    the payoff's intrinsic value.
    """
    if kind not in ("call", "put"):
        raise ValueError(f"kind must be 'call' or 'put', got {kind!r}")
    if t <= 0 or sigma < 0:
        raise ValueError("bs_price requires t > 0 and sigma >= 0")
    spot, strike = math.exp(x), math.exp(k)
    total_sd = sigma * math.sqrt(t)
    if total_sd < 1e-12:
        if kind == "call":
            return max(spot - strike, 0.0)
        return max(strike - spot, 0.0)
    d1 = (x - k) / total_sd + 0.5 * total_sd
    d2 = d1 - total_sd
    if kind == "call":
        return spot * norm_cdf(d1) - strike * norm_cdf(d2)
    return strike * norm_cdf(-d2) - spot * norm_cdf(-d1)


def bs_vega(x: float, k: float, t: float, sigma: float) -> float:
    """dPrice/dSigma, identical for calls and puts."""
    total_sd = sigma * math.sqrt(t)
    if total_sd < 1e-12:
        return 0.0
    d1 = (x - k) / total_sd + 0.5 * total_sd
    return math.exp(x) * norm_pdf(d1) * math.sqrt(t)


def arbitrage_bounds(kind: str, x: float, k: float) -> tuple[float, float]:
    """Open interval of attainable prices (intrinsic, upper)."""
    spot, strike = math.exp(x), math.exp(k)
    if kind == "call":
        return max(spot - strike, 0.0), spot
    return max(strike - spot, 0.0), strike


def implied_vol(kind: str, x: float, k: float, t: float, price: float) -> float:
    """Invert bs_price in sigma.

    Raises ArbitrageBoundsError when the price is not strictly inside
    the static no-arbitrage interval, IVConvergenceError when the root
    is outside [1e-4, 5] or the iteration stalls.
    """
    lo_bound, hi_bound = arbitrage_bounds(kind, x, k)
    if not (lo_bound < price < hi_bound):
        raise ArbitrageBoundsError(
            f"{kind} price {price!r} outside arbitrage interval ({lo_bound!r}, {hi_bound!r})"
        )
    scale = math.exp(x)
    tol = 1e-10 * scale

    lo, hi = IV_MIN, IV_MAX
    f_lo = bs_price(kind, x, k, t, lo) - price
    f_hi = bs_price(kind, x, k, t, hi) - price
    if f_lo > 0 or f_hi < 0:
        raise IVConvergenceError(
            f"implied volatility lies outside [{IV_MIN}, {IV_MAX}] for price {price!r}"
        )

    # Newton on log(price); monotonicity of bs_price in sigma keeps the
    # bracket [lo, hi] valid, bisect whenever Newton leaves it.
    sigma = min(max(math.sqrt(2.0 * math.pi / t) * price / scale, 0.05), 2.0)
    for _ in range(100):
        value = bs_price(kind, x, k, t, sigma)
        diff = value - price
        if abs(diff) < tol:
            return sigma
        if diff > 0:
            hi = min(hi, sigma)
        else:
            lo = max(lo, sigma)
        vega = bs_vega(x, k, t, sigma)
        step_ok = vega > 0 and value > 0
        if step_ok:
            # Newton step for log(value) - log(price)
            sigma_new = sigma - value * (math.log(value) - math.log(price)) / vega
        if not step_ok or not (lo < sigma_new < hi):
            sigma_new = 0.5 * (lo + hi)
        sigma = sigma_new
    raise IVConvergenceError(
        f"implied volatility iteration failed to reach |error| < {tol!r} "
        f"(last sigma {sigma!r})"
    )
