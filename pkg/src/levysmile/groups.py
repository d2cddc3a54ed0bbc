"""Group parameters for the exponential OU volatility/intensity factor.

The driving factor is an Ornstein-Uhlenbeck process with unit mean
reversion and constant vol beta, so its invariant law is N(0, beta^2/2).
Volatility and jump intensity load on it exponentially,
sigma(y) = a e^y and zeta(y) = b e^y, which admits closed forms:

    <sig^2> = a^2 e^{beta^2}
    <zeta>  = b e^{beta^2/4}
    V3 = (rho/beta) a^3 e^{5 beta^2/4} (e^{beta^2} - 1)
    U3 = (rho/beta) 2 a b (e^{beta^2} - e^{beta^2/2})
    V2 = -beta Lam a^2 e^{beta^2}
    U2 = -beta Lam b e^{beta^2/4}

``ou_quadrature_oracle`` recomputes the same quantities for arbitrary
sigma(y), zeta(y) by solving the centered Poisson equations
A0 eta = sigma^2 - <sig^2> and A0 xi = zeta - <zeta> with the
integrating-factor representation

    d_y eta(y) = (2 / (beta^2 p(y))) Int_{-inf}^{y} (sigma^2 - <sig^2>) p du

(p the invariant density) and averaging the brackets

    V3 = -(rho/2) <beta sigma d_y eta>     U3 = -rho <beta sigma d_y xi>
    V2 =  (1/2)  <beta Lam  d_y eta>       U2 =       <beta Lam  d_y xi>

by Gauss-Hermite quadrature.  Only derivatives of eta and xi enter, so
the additive constant left free by the Poisson equation is irrelevant.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .measures import AnyMeasure
from .pricing import ModelParams


@dataclass(frozen=True)
class OuSpec:
    """Exponential OU specification of the fast factor.

    a:    volatility scale, sigma(y) = a e^y (> 0)
    b:    intensity scale, zeta(y) = b e^y (>= 0)
    beta: factor volatility (> 0)
    lam:  market price of volatility risk (constant)
    rho:  spot/factor correlation in [-1, 1]
    eps:  fast time scale, the factor mixes on a time of order eps^2
    """

    a: float
    b: float
    beta: float
    lam: float
    rho: float
    eps: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"volatility scale a must be > 0, got {self.a}")
        if not self.b >= 0:
            raise ValueError(f"intensity scale b must be >= 0, got {self.b}")
        if not self.beta > 0:
            raise ValueError(f"factor vol beta must be > 0, got {self.beta}")
        if not abs(self.rho) <= 1:
            raise ValueError(f"correlation rho must lie in [-1, 1], got {self.rho}")
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")

    def sigma(self, y):
        return self.a * np.exp(y)

    def zeta(self, y):
        return self.b * np.exp(y)


@dataclass(frozen=True)
class GroupParams:
    """Averages and group parameters, plus their eps-scaled versions."""

    sig2_bar: float
    zeta_bar: float
    v3: float
    u3: float
    v2: float
    u2: float
    eps: float = 1.0

    def __post_init__(self):
        if not self.sig2_bar > 0:
            raise ValueError(f"sig2_bar must be > 0, got {self.sig2_bar}")
        if not self.zeta_bar >= 0:
            raise ValueError(f"zeta_bar must be >= 0, got {self.zeta_bar}")

    @property
    def v3e(self) -> float:
        return self.eps * self.v3

    @property
    def u3e(self) -> float:
        return self.eps * self.u3

    @property
    def v2e(self) -> float:
        return self.eps * self.v2

    @property
    def u2e(self) -> float:
        return self.eps * self.u2

    def to_model_params(self, measure: AnyMeasure) -> ModelParams:
        """Assemble pricing parameters with the eps-scaled groups."""
        return ModelParams(
            sig2_bar=self.sig2_bar,
            zeta_bar=self.zeta_bar,
            measure=measure,
            v3e=self.v3e,
            u3e=self.u3e,
            v2e=self.v2e,
            u2e=self.u2e,
        )


def ou_closed_forms(spec: OuSpec) -> GroupParams:
    """Closed-form averages and group parameters for the exponential OU spec."""
    b2 = spec.beta**2
    sig2_bar = spec.a**2 * math.exp(b2)
    zeta_bar = spec.b * math.exp(b2 / 4.0)
    v3 = (spec.rho / spec.beta) * spec.a**3 * math.exp(1.25 * b2) * (math.exp(b2) - 1.0)
    u3 = (spec.rho / spec.beta) * 2.0 * spec.a * spec.b * (math.exp(b2) - math.exp(b2 / 2.0))
    v2 = -spec.beta * spec.lam * spec.a**2 * math.exp(b2)
    u2 = -spec.beta * spec.lam * spec.b * math.exp(b2 / 4.0)
    return GroupParams(sig2_bar, zeta_bar, v3, u3, v2, u2, eps=spec.eps)


def ou_quadrature_oracle(
    sigma: Callable,
    zeta: Callable,
    beta: float,
    lam: float,
    rho: float,
    eps: float = 1.0,
    n_nodes: int = 128,
    right_tail_from: float = 0.0,
) -> GroupParams:
    """Numerical group parameters for arbitrary sigma(y), zeta(y) on the OU factor.

    The derivative of each Poisson solution is evaluated pointwise from
    the integrating-factor form; for y above ``right_tail_from`` the
    cumulative integral switches to the complementary tail (the two
    agree by the centering condition and the switch keeps both forms
    well conditioned).  Averages use ``n_nodes`` Gauss-Hermite nodes
    against the invariant law N(0, beta^2/2).
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    var = beta**2 / 2.0
    norm = 1.0 / math.sqrt(2.0 * math.pi * var)

    def density(y):
        return norm * np.exp(-0.5 * y * y / var)

    nodes, weights = np.polynomial.hermite.hermgauss(n_nodes)
    y_nodes = beta * nodes  # sqrt(2 var) x
    w_nodes = weights / math.sqrt(math.pi)

    def average(fn):
        return float(np.dot(w_nodes, fn(y_nodes)))

    sig2_bar = average(lambda y: np.asarray(sigma(y), dtype=float) ** 2)
    zeta_bar = average(lambda y: np.asarray(zeta(y), dtype=float))

    def solution_slope(centered_fn):
        def weighted(u):
            # The invariant density underflows long before sigma or zeta
            # can overflow; returning 0 there keeps quad's probes finite.
            d = density(u)
            if d == 0.0:
                return 0.0
            return float(centered_fn(u)) * d

        def cumulative(y):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                if y <= right_tail_from:
                    val, _ = integrate.quad(
                        weighted, -np.inf, y, epsabs=1e-13, epsrel=1e-11, limit=200
                    )
                else:
                    tail, _ = integrate.quad(
                        weighted, y, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200
                    )
                    val = -tail
            return val

        def slope(y):
            y = np.atleast_1d(y)
            out = np.array([cumulative(v) for v in y])
            return (2.0 / beta**2) * out / density(y)

        return slope

    deta = solution_slope(lambda u: np.asarray(sigma(u), dtype=float) ** 2 - sig2_bar)
    dxi = solution_slope(lambda u: np.asarray(zeta(u), dtype=float) - zeta_bar)

    deta_vals = deta(y_nodes)
    dxi_vals = dxi(y_nodes)
    sig_vals = np.asarray(sigma(y_nodes), dtype=float)

    v3 = -0.5 * rho * float(np.dot(w_nodes, beta * sig_vals * deta_vals))
    u3 = -rho * float(np.dot(w_nodes, beta * sig_vals * dxi_vals))
    v2 = 0.5 * float(np.dot(w_nodes, beta * lam * deta_vals))
    u2 = float(np.dot(w_nodes, beta * lam * dxi_vals))
    return GroupParams(sig2_bar, zeta_bar, v3, u3, v2, u2, eps=eps)


def ou_spec_to_dict(spec: OuSpec) -> dict:
    return {
        "a": spec.a,
        "b": spec.b,
        "beta": spec.beta,
        "lam": spec.lam,
        "rho": spec.rho,
        "eps": spec.eps,
    }


def ou_spec_from_dict(data: dict) -> OuSpec:
    if not isinstance(data, dict):
        raise ValueError("OU spec JSON must be an object")
    keys = ("a", "b", "beta", "lam", "rho", "eps")
    missing = [k for k in keys if k not in data]
    if missing:
        raise ValueError(f"OU spec JSON missing keys: {missing}")
    try:
        vals = {k: float(data[k]) for k in keys}
    except (TypeError, ValueError):
        raise ValueError("OU spec parameters must be numbers") from None
    return OuSpec(**vals)
