"""Shared independent oracles for the test suite.

Everything here is written from the measure densities and textbook
definitions, never from the library's closed forms, so agreement is
meaningful evidence.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from levysmile import Dirac, Gumbel, Merton, Uniform, VarianceGamma
from levysmile.pricing import ModelParams, OptionSpec, char_exponent, payoff_transform

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-11, limit=400)


def _cquad(f, a, b, **kw):
    opts = dict(_QUAD_OPTS)
    opts.update(kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, complex_func=True, **opts)
    return val


def char_integral_quadrature(measure, lam: complex) -> complex:
    """Direct density quadrature of integral (e^{i lam z} - 1 - i lam z) nu(dz)."""
    lam = complex(lam)

    def core(z):
        return np.exp(1j * lam * z) - 1.0 - 1j * lam * z

    if isinstance(measure, Merton):
        m, s = measure.m, measure.s
        dens = lambda z: math.exp(-0.5 * ((z - m) / s) ** 2) / (s * math.sqrt(2 * math.pi))
        center = m - lam.imag * s * s
        lo = min(m, center) - 14.0 * s
        hi = max(m, center) + 14.0 * s
        return _cquad(lambda z: core(z) * dens(z), lo, hi)
    if isinstance(measure, Gumbel):
        m, sig = measure.m, measure.sigma
        dens = lambda z: math.exp((z - m) / sig - math.exp((z - m) / sig)) / sig
        left_rate = 1.0 / sig - lam.imag  # positive on the strip
        lo = m - 50.0 / left_rate
        hi = m + sig * (7.0 + abs(lam.imag) * sig)
        return _cquad(lambda z: core(z) * dens(z), lo, hi, limit=800)
    if isinstance(measure, Dirac):
        return complex(core(measure.a))
    if isinstance(measure, Uniform):
        a, b = measure.a, measure.b
        return _cquad(lambda z: core(z) / (b - a), a, b)
    if isinstance(measure, VarianceGamma):
        # Exponentials combined per term so the integrand decays on the
        # whole strip instead of overflowing at large probe points.
        a, b, big_b = measure.a, measure.b, measure.B
        pos = _cquad(
            lambda z: (np.exp((1j * lam - a) * z) - (1.0 + 1j * lam * z) * np.exp(-a * z)) / z,
            0.0,
            np.inf,
        )
        neg = _cquad(
            lambda z: (np.exp(-(1j * lam + b) * z) - (1.0 - 1j * lam * z) * np.exp(-b * z)) / z,
            0.0,
            np.inf,
        )
        return pos + big_b * neg
    raise TypeError(f"no density oracle for {type(measure)!r}")


def exp_moment_quadrature(measure) -> float:
    val = char_integral_quadrature(measure, -1j)
    assert abs(val.imag) < 1e-10
    return val.real


def random_measure(rng: np.random.Generator, variant: str):
    if variant == "merton":
        return Merton(m=rng.uniform(-0.6, 0.3), s=rng.uniform(0.05, 0.5))
    if variant == "gumbel":
        return Gumbel(m=rng.uniform(-0.6, 0.2), sigma=rng.uniform(0.05, 0.5))
    if variant == "dirac":
        return Dirac(a=rng.uniform(-0.5, 0.5))
    if variant == "variancegamma":
        return VarianceGamma(
            a=rng.uniform(2.0, 60.0), b=rng.uniform(1.0, 30.0), B=rng.uniform(0.0, 15.0)
        )
    if variant == "uniform":
        return Uniform(a=rng.uniform(-0.6, -0.02), b=rng.uniform(0.02, 0.6))
    raise ValueError(variant)


ALL_VARIANTS = ("merton", "gumbel", "dirac", "variancegamma", "uniform")


def random_model_params(rng: np.random.Generator, variant: str) -> ModelParams:
    return ModelParams(
        sig2_bar=rng.uniform(0.01, 0.3),
        zeta_bar=rng.uniform(0.0, 3.0),
        measure=random_measure(rng, variant),
        v3e=rng.uniform(-0.05, 0.05),
        u3e=rng.uniform(-0.05, 0.05),
        v2e=rng.uniform(-0.05, 0.05),
        u2e=rng.uniform(-0.05, 0.05),
    )


def random_strip_lambda(rng: np.random.Generator, measure, min_abs: float = 0.3) -> complex:
    """A transform argument safely inside the measure strip, away from 0."""
    lo, hi = measure.strip()
    lo = max(lo, -3.0)
    hi = min(hi, 3.0)
    for _ in range(100):
        lam = complex(rng.uniform(-25.0, 25.0), rng.uniform(lo + 0.15 * (hi - lo), hi - 0.15 * (hi - lo)))
        if abs(lam) >= min_abs:
            return lam
    raise RuntimeError("could not sample a lambda")


def simpson_weights(n: int) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def slow_correction_double_integral(
    params: ModelParams,
    c1: float,
    c0: float,
    dsig2: float,
    dzeta: float,
    option: OptionSpec,
    lam_i: float,
    L: float,
    n: int,
    n_time: int = 200,
    fd_step: float = 2e-3,
) -> complex:
    """Literal double-integral evaluation of the slow correction.

    The z-derivative of the zeroth-order transform e^{s phi(z)} is taken
    by Richardson-extrapolated central differences in z (the slow state
    enters phi only through an affine shift of sig2_bar and zeta_bar),
    the time integral by composite Simpson with ``n_time`` panels, and
    the contour integral by Simpson over the full line.  No chain-rule
    collapse is used anywhere.
    """
    lam_r = np.linspace(-L, L, 2 * n + 1)
    lam = lam_r + 1j * lam_i
    hh = payoff_transform(option, lam)

    def phi_shift(h):
        shifted = ModelParams(
            sig2_bar=params.sig2_bar + dsig2 * h,
            zeta_bar=params.zeta_bar + dzeta * h,
            measure=params.measure,
            v3e=params.v3e,
            u3e=params.u3e,
            v2e=params.v2e,
            u2e=params.u2e,
        )
        return char_exponent(shifted, lam)

    phi0 = phi_shift(0.0)

    def dz_exp(s, h):
        return (np.exp(s * phi_shift(h)) - np.exp(s * phi_shift(-h))) / (2.0 * h)

    t = option.t
    s_nodes = np.linspace(0.0, t, n_time + 1)
    w_time = simpson_weights(n_time)
    inner = np.zeros_like(lam)
    for s, w in zip(s_nodes, w_time):
        d_rich = (4.0 * dz_exp(s, 0.5 * fd_step) - dz_exp(s, fd_step)) / 3.0
        vhat = (c0 + 1j * lam * c1) * d_rich * hh
        inner = inner + w * np.exp((t - s) * phi0) * vhat
    inner *= t / n_time / 3.0

    integrand = np.exp(1j * lam * option.x) * inner
    h_r = lam_r[1] - lam_r[0]
    return (h_r / 3.0) * np.dot(simpson_weights(2 * n), integrand) / math.sqrt(2.0 * math.pi)
