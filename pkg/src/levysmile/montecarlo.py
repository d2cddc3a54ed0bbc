"""Euler-Maruyama simulation of the full two-factor jump model.

The factor follows the pricing-measure OU dynamics

    dY = (-Y/eps^2 - Lam beta/eps) dt + (beta/eps) dB

and the log price is stepped with the jump-compensated drift

    dX = (-sigma(Y)^2/2 - zeta(Y) k1) dt + sigma(Y) dW + jumps,
    k1 = Int (e^z - 1) nu(dz),

with corr(dW, dB) = rho, per-step jump counts Poisson(zeta(Y_n) dt) and
i.i.d. sizes drawn from nu (probability measures only).  Freezing the
intensity at the step start keeps E[e^{dX} | Y_n] = 1 exactly, so the
discretized spot is a per-step martingale.

Randomness is organised in fixed-width path blocks, each driven by its
own counter-based Philox stream keyed by (seed, block index).  Results
are therefore bit-identical however the blocks are scheduled, and the
block loop is the natural unit for parallel workers.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, SimulationError
from .groups import OuSpec
from .measures import AnyMeasure
from .pricing import OptionSpec

_BLOCK_PATHS = 1 << 16  # lanes per Philox stream, fixed for determinism


@dataclass(frozen=True)
class McConfig:
    """Simulation controls.

    dt defaults to eps^2/20 (and may be set smaller, never larger);
    budget caps n_paths * steps; y0=None draws the factor start from
    its invariant law N(0, beta^2/2).
    """

    n_paths: int = 400_000
    dt: float | None = None
    seed: int = 0
    antithetic: bool = True
    budget: int = 1_000_000_000
    y0: float | None = None

    def __post_init__(self):
        if self.n_paths < 10_000:
            raise ValueError(f"n_paths must be >= 10000, got {self.n_paths}")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even n_paths")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.budget <= 0:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class McResult:
    price: float
    stderr: float
    n_paths: int
    elapsed: float

    def __post_init__(self):
        if not (math.isfinite(self.price) and math.isfinite(self.stderr)):
            raise ValueError("Monte Carlo estimate must be finite")
        if self.stderr < 0:
            raise ValueError("standard error cannot be negative")


def _resolve_dt(ou: OuSpec, cfg: McConfig) -> float:
    limit = ou.eps**2 / 20.0
    if cfg.dt is None:
        return limit
    if cfg.dt > limit * (1.0 + 1e-12):
        raise ValueError(
            f"dt={cfg.dt:g} does not resolve the fast scale; need dt <= eps^2/20 = {limit:g}"
        )
    return cfg.dt


def simulate_terminal(
    ou: OuSpec, measure: AnyMeasure, t: float, x0: float, cfg: McConfig
) -> np.ndarray:
    """Terminal log prices, shape (2, n_pairs) when antithetic else (n_paths,)."""
    if not measure.is_probability:
        raise ValueError(
            f"{measure.variant} is not a probability measure; Monte Carlo supports "
            "finite-activity measures only"
        )
    if not t > 0:
        raise ValueError(f"maturity must be > 0, got {t}")
    dt_target = _resolve_dt(ou, cfg)
    steps = max(int(math.ceil(t / dt_target)), 1)
    total = cfg.n_paths * steps
    if total > cfg.budget:
        raise BudgetError(
            f"{cfg.n_paths} paths x {steps} steps = {total} path-steps "
            f"exceeds the budget of {cfg.budget}"
        )
    dt = t / steps
    sqrt_dt = math.sqrt(dt)
    k1 = measure.exp_moment() + measure.mean_jump()  # Int (e^z - 1) nu(dz)
    rho_perp = math.sqrt(max(1.0 - ou.rho**2, 0.0))
    inv_eps2 = 1.0 / ou.eps**2
    vol_y = ou.beta / ou.eps
    drift_y = -ou.lam * ou.beta / ou.eps
    y_sd = ou.beta / math.sqrt(2.0)

    anti = cfg.antithetic
    lanes_total = cfg.n_paths
    width = _BLOCK_PATHS if not anti else _BLOCK_PATHS // 2
    n_units = cfg.n_paths // 2 if anti else cfg.n_paths  # pairs or single paths

    chunks = []
    for block in range((n_units + width - 1) // width):
        m = min(width, n_units - block * width)
        rng = np.random.Generator(
            np.random.Philox(key=np.array([cfg.seed & (2**64 - 1), block], dtype=np.uint64))
        )
        if anti:
            if cfg.y0 is None:
                z0 = rng.standard_normal(m)
                y = y_sd * np.stack([z0, -z0])
            else:
                y = np.full((2, m), float(cfg.y0))
            x = np.full((2, m), float(x0))
        else:
            if cfg.y0 is None:
                y = y_sd * rng.standard_normal(m)
            else:
                y = np.full(m, float(cfg.y0))
            x = np.full(m, float(x0))

        for _ in range(steps):
            zb = rng.standard_normal(m)
            zp = rng.standard_normal(m)
            if anti:
                zb = np.stack([zb, -zb])
                zp = np.stack([zp, -zp])
            zw = ou.rho * zb + rho_perp * zp
            ey = np.exp(y)
            sig = ou.a * ey
            zet = ou.b * ey
            x += (-0.5 * sig * sig - zet * k1) * dt + sig * sqrt_dt * zw
            if ou.b > 0:
                counts = rng.poisson(zet * dt)
                tot = int(counts.sum())
                if tot:
                    flat = counts.ravel()
                    idx = np.repeat(np.arange(flat.size), flat)
                    sizes = measure.sample(rng, tot)
                    x += np.bincount(idx, weights=sizes, minlength=flat.size).reshape(x.shape)
            y += (-y * inv_eps2 + drift_y) * dt + vol_y * sqrt_dt * zb
        chunks.append(x)

    xt = np.concatenate(chunks, axis=-1)
    if not np.isfinite(xt).all():
        raise SimulationError(
            f"non-finite terminal value (seed={cfg.seed}, steps={steps}, dt={dt:g})"
        )
    assert xt.shape[-1] * (2 if anti else 1) == lanes_total
    return xt


def _payoff(option: OptionSpec, xt: np.ndarray) -> np.ndarray:
    strike = math.exp(option.k)
    if option.kind == "call":
        return np.maximum(np.exp(xt) - strike, 0.0)
    return np.maximum(strike - np.exp(xt), 0.0)


def _estimate(values: np.ndarray, antithetic: bool, n_paths: int, elapsed: float) -> McResult:
    if antithetic:
        pair_means = values.mean(axis=0)
        price = float(pair_means.mean())
        stderr = float(pair_means.std(ddof=1) / math.sqrt(pair_means.size))
    else:
        price = float(values.mean())
        stderr = float(values.std(ddof=1) / math.sqrt(values.size))
    return McResult(price=price, stderr=stderr, n_paths=n_paths, elapsed=elapsed)


def simulate_price(
    ou: OuSpec, measure: AnyMeasure, option: OptionSpec, cfg: McConfig
) -> McResult:
    """Monte Carlo price of one option under the full two-factor model."""
    start = time.perf_counter()
    xt = simulate_terminal(ou, measure, option.t, option.x, cfg)
    values = _payoff(option, xt)
    return _estimate(values, cfg.antithetic, cfg.n_paths, time.perf_counter() - start)


def simulate_prices(
    ou: OuSpec, measure: AnyMeasure, options: list[OptionSpec], cfg: McConfig
) -> list[McResult]:
    """Price several options off one shared terminal sample.

    All options must share the same maturity and log-spot; estimates
    are correlated across strikes, which is what a smile comparison
    wants.
    """
    if not options:
        return []
    t, x = options[0].t, options[0].x
    for o in options[1:]:
        if o.t != t or o.x != x:
            raise ValueError("shared-sample pricing requires identical maturity and spot")
    start = time.perf_counter()
    xt = simulate_terminal(ou, measure, t, x, cfg)
    elapsed = time.perf_counter() - start
    return [_estimate(_payoff(o, xt), cfg.antithetic, cfg.n_paths, elapsed) for o in options]
