"""Slow-factor first-order price correction at a frozen slow-factor state.

The slow factor enters the averaged model only through the z-derivatives
of <sig^2> and <zeta>, packaged into four scalar inputs:

    v1 = g rho_xz <sigma> d_z<sig^2>     v0 = -g <Gamma> d_z<sig^2>
    u1 = g rho_xz <sigma> d_z<zeta>      u0 = -g <Gamma> d_z<zeta>

(each already carrying its slow-scale factor when user-supplied).
Differentiating the base-price transform e^{t phi} h_hat in z hits phi
only through d_z<sig^2> and d_z<zeta>, which also perturb the
martingale drift, so

    d_z phi(lam) = d_z<sig^2> D_sig(lam) + d_z<zeta> D_zeta(lam),
    D_sig(lam)  = -(lam^2 + i lam) / 2,
    D_zeta(lam) = chi(lam) - i lam kappa,

and the time integral of s e^{(t-s)phi} e^{s phi} collapses to t^2/2.
The correction is therefore a single contour integral with symbol

    M(lam) = (i lam v1 + v0) D_sig(lam) + (i lam u1 + u0) D_zeta(lam),

linear in (v1, v0, u1, u0) and vanishing at lam = -i (both D factors
do), which preserves the martingale property and makes the call and
put corrections identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pricing import Contour, ModelParams, OptionSpec, _contour_prices, price_components


@dataclass(frozen=True)
class SlowParams:
    """Slow-factor correction coefficients (scaled), plus optional bookkeeping.

    dsig2_dz / dzeta_dz record the underlying z-derivatives when the
    caller knows them; they never enter the price, which is linear in
    (v1, v0, u1, u0) alone.
    """

    v1: float
    v0: float
    u1: float
    u0: float
    dsig2_dz: float | None = None
    dzeta_dz: float | None = None

    def __post_init__(self):
        for name in ("v1", "v0", "u1", "u0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"slow parameter {name} must be finite")


def _slow_symbol_chi(params: ModelParams, slow: SlowParams, lam, chi):
    kappa = params.measure.exp_moment()
    d_sig = -0.5 * (lam * lam + 1j * lam)
    d_zeta = chi - 1j * lam * kappa
    return (1j * lam * slow.v1 + slow.v0) * d_sig + (1j * lam * slow.u1 + slow.u0) * d_zeta


def slow_symbol(params: ModelParams, slow: SlowParams, lam):
    """M(lam), the contour symbol of the slow-factor correction."""
    chi = params.measure.char_integral(lam)
    lam = np.asarray(lam, dtype=np.complex128)
    return _slow_symbol_chi(params, slow, lam, chi)


def price_slow_correction(
    params: ModelParams,
    slow: SlowParams,
    option: OptionSpec,
    contour: Contour | None = None,
) -> float:
    """Scaled slow-factor correction to the base price."""
    half_t2 = 0.5 * option.t**2
    sym = lambda lam, chi: half_t2 * _slow_symbol_chi(params, slow, lam, chi)
    [p] = _contour_prices(params, option, [sym], contour)
    return p


def price_approx_full(
    params: ModelParams,
    slow: SlowParams,
    option: OptionSpec,
    contour: Contour | None = None,
) -> float:
    """Two-factor approximation: base + fast correction + slow correction."""
    base, fast = price_components(params, option, contour)
    return base + fast + price_slow_correction(params, slow, option, contour)
