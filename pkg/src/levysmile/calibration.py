"""Least-squares calibration of the averaged model to an implied-vol surface.

The objective is the unweighted sum of squared implied-volatility
residuals over all quotes jointly (never maturity-by-maturity), with
call-quoted vols throughout.  Three nested parameter classes are
supported for every measure family:

    extended  - all of (sig2_bar, zeta_bar, measure params, group params)
    classic   - group parameters frozen at zero (pure Levy model)
    fmrsv     - jumps frozen off (zeta_bar = 0, u3e = u2e = 0); only
                sig2_bar, v3e, v2e move

Positives are optimized in log space; box constraints and the
Levenberg-Marquardt-type trust region come from scipy's ``trf`` least
squares with a finite-difference Jacobian (relative step 1e-6).
Extended fits run a deterministic Latin-hypercube multi-start.
Infeasible pricing during a step (arbitrage violations, strip or
quadrature failures) marks the affected residuals with a 10-vol-unit
penalty so the optimizer backs away instead of silently accepting.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from .errors import LevySmileError, SurfaceFormatError
from .measures import AnyMeasure, _VARIANTS, VARIANT_ALIASES
from .pricing import (
    Contour,
    ModelParams,
    OptionSpec,
    model_params_to_dict,
    price_approx,
)
from .volatility import Quote, implied_vol

PENALTY = 10.0  # vol units assigned to infeasible residuals

_SURFACE_HEADER = ["t_years", "log_strike", "spot", "iv"]

_MEASURE_PARAM_NAMES = {
    "merton": ("m", "s"),
    "gumbel": ("m", "sigma"),
    "dirac": ("a",),
    "variancegamma": ("a", "b", "B"),
    "uniform": ("a", "b"),
}

_GROUP_NAMES = ("v3e", "u3e", "v2e", "u2e")


# ----------------------------------------------------------------------
# surface
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class VolSurface:
    """Observed implied-volatility quotes around one spot level."""

    spot: float
    quotes: tuple[Quote, ...]
    label: str = ""

    def __post_init__(self):
        if not self.spot > 0:
            raise SurfaceFormatError(f"spot must be > 0, got {self.spot}")
        if len(self.quotes) < 8:
            raise SurfaceFormatError(f"a surface needs >= 8 quotes, got {len(self.quotes)}")
        seen = set()
        for q in self.quotes:
            key = (q.t, q.k)
            if key in seen:
                raise SurfaceFormatError(f"duplicate quote at (t={q.t}, k={q.k})")
            seen.add(key)

    @property
    def x(self) -> float:
        return math.log(self.spot)


def surface_from_csv(path: str | Path) -> VolSurface:
    """Read quotes from `t_years,log_strike,spot,iv` CSV (one quote per row)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SurfaceFormatError(f"{path}: empty surface file") from None
        if [h.strip() for h in header] != _SURFACE_HEADER:
            raise SurfaceFormatError(
                f"{path}: expected header {','.join(_SURFACE_HEADER)!r}, got {','.join(header)!r}"
            )
        quotes = []
        spot = None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise SurfaceFormatError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                t, k, s, iv = (float(c) for c in row)
            except ValueError:
                raise SurfaceFormatError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
            if spot is None:
                spot = s
            elif abs(s - spot) > 1e-9 * max(1.0, abs(spot)):
                raise SurfaceFormatError(
                    f"{path}:{lineno}: spot {s!r} differs from the surface spot {spot!r}"
                )
            try:
                quotes.append(Quote(t=t, k=k, x=math.log(s), iv=iv))
            except ValueError as exc:
                raise SurfaceFormatError(f"{path}:{lineno}: {exc}") from None
    if spot is None:
        raise SurfaceFormatError(f"{path}: no quotes found")
    return VolSurface(spot=spot, quotes=tuple(quotes), label=path.stem)


def surface_to_csv(surface: VolSurface, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SURFACE_HEADER)
        for q in surface.quotes:
            writer.writerow([repr(q.t), repr(q.k), repr(surface.spot), repr(q.iv)])


# ----------------------------------------------------------------------
# model classes and parameterization
# ----------------------------------------------------------------------

_FAMILIES = ("extended", "classic", "fmrsv")


@dataclass(frozen=True)
class ModelClass:
    """Constraint class x measure family, e.g. extended/merton."""

    family: str
    variant: str

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        tag = VARIANT_ALIASES.get(self.variant, self.variant)
        if tag not in _MEASURE_PARAM_NAMES:
            raise ValueError(f"unknown measure variant {self.variant!r}")
        object.__setattr__(self, "variant", tag)

    @property
    def theta_names(self) -> tuple[str, ...]:
        return ("sig2_bar", "zeta_bar") + _MEASURE_PARAM_NAMES[self.variant] + _GROUP_NAMES

    def frozen_values(self, init: dict) -> dict:
        """Frozen coordinates with the values they are pinned to."""
        if self.family == "extended":
            return {}
        if self.family == "classic":
            return {name: 0.0 for name in _GROUP_NAMES}
        # fmrsv: jumps off.  The measure parameters are pinned at their
        # init values (they are inert once zeta_bar = 0, and zeroing
        # them outright would be inadmissible for most families).
        frozen = {"zeta_bar": 0.0, "u3e": 0.0, "u2e": 0.0}
        for name in _MEASURE_PARAM_NAMES[self.variant]:
            frozen[name] = init[name]
        return frozen


def default_bounds(model_class: ModelClass) -> dict:
    """Box bounds per parameter: name -> (lo, hi)."""
    bounds = {
        "sig2_bar": (1e-4, 1.0),
        "zeta_bar": (1e-6, 20.0),
        "v3e": (-1.0, 1.0),
        "u3e": (-1.0, 1.0),
        "v2e": (-1.0, 1.0),
        "u2e": (-1.0, 1.0),
    }
    per_variant = {
        "merton": {"m": (-2.0, 1.0), "s": (1e-3, 2.0)},
        "gumbel": {"m": (-2.0, 1.0), "sigma": (1e-3, 2.0)},
        "dirac": {"a": (-1.0, 1.0)},
        "variancegamma": {"a": (1.6, 400.0), "b": (0.5, 50.0), "B": (1e-6, 100.0)},
        "uniform": {"a": (-1.0, -1e-4), "b": (1e-4, 1.0)},
    }
    bounds.update(per_variant[model_class.variant])
    return bounds


def default_init(model_class: ModelClass) -> dict:
    init = {"sig2_bar": 0.04, "zeta_bar": 0.5, "v3e": 0.0, "u3e": 0.0, "v2e": 0.0, "u2e": 0.0}
    per_variant = {
        "merton": {"m": -0.2, "s": 0.2},
        "gumbel": {"m": -0.2, "sigma": 0.15},
        "dirac": {"a": -0.2},
        "variancegamma": {"a": 30.0, "b": 10.0, "B": 10.0},
        "uniform": {"a": -0.2, "b": 0.05},
    }
    init.update(per_variant[model_class.variant])
    return init


# Parameters optimized on a log scale (strictly positive by bounds).
_LOG_SCALED = {
    ("sig2_bar",),
    ("zeta_bar",),
    ("merton", "s"),
    ("gumbel", "sigma"),
    ("variancegamma", "a"),
    ("variancegamma", "b"),
    ("variancegamma", "B"),
}


def _is_log_scaled(variant: str, name: str) -> bool:
    return (name,) in _LOG_SCALED or (variant, name) in _LOG_SCALED


def theta_values(params: ModelParams) -> dict:
    """Flatten ModelParams into the named theta dict used by calibrate."""
    values = {
        "sig2_bar": params.sig2_bar,
        "zeta_bar": params.zeta_bar,
        "v3e": params.v3e,
        "u3e": params.u3e,
        "v2e": params.v2e,
        "u2e": params.u2e,
    }
    for name in _MEASURE_PARAM_NAMES[params.measure.variant]:
        values[name] = getattr(params.measure, name)
    return values


class _Parameterization:
    """Packing/unpacking between named theta values and the free vector."""

    def __init__(self, model_class: ModelClass, init: dict, bounds: dict):
        self.model_class = model_class
        self.names = model_class.theta_names
        unknown = set(init) - set(self.names)
        if unknown:
            raise ValueError(f"init contains unknown parameters: {sorted(unknown)}")
        full_init = default_init(model_class)
        full_init.update(init)
        full_bounds = default_bounds(model_class)
        full_bounds.update(bounds)
        self.frozen = model_class.frozen_values(full_init)
        self.free_names = [n for n in self.names if n not in self.frozen]
        self.log_flags = [_is_log_scaled(model_class.variant, n) for n in self.free_names]
        lo, hi, x0 = [], [], []
        for name, is_log in zip(self.free_names, self.log_flags):
            b_lo, b_hi = full_bounds[name]
            v = min(max(full_init[name], b_lo), b_hi)
            if is_log:
                if b_lo <= 0:
                    raise ValueError(f"log-scaled parameter {name} needs a positive lower bound")
                lo.append(math.log(b_lo))
                hi.append(math.log(b_hi))
                x0.append(math.log(v))
            else:
                lo.append(b_lo)
                hi.append(b_hi)
                x0.append(v)
        self.lb = np.array(lo)
        self.ub = np.array(hi)
        self.x0 = np.array(x0)

    def values(self, u: np.ndarray) -> dict:
        out = dict(self.frozen)
        for name, is_log, v in zip(self.free_names, self.log_flags, u):
            out[name] = math.exp(v) if is_log else float(v)
        return out

    def build(self, u: np.ndarray) -> ModelParams:
        values = self.values(u)
        measure_cls = _VARIANTS[self.model_class.variant]
        measure = measure_cls(
            **{n: values[n] for n in _MEASURE_PARAM_NAMES[self.model_class.variant]}
        )
        return ModelParams(
            sig2_bar=values["sig2_bar"],
            zeta_bar=values["zeta_bar"],
            measure=measure,
            v3e=values["v3e"],
            u3e=values["u3e"],
            v2e=values["v2e"],
            u2e=values["u2e"],
        )


# ----------------------------------------------------------------------
# pricing helpers
# ----------------------------------------------------------------------

def model_iv(
    params: ModelParams, t: float, k: float, x: float, contour: Contour | None = None
) -> float:
    """Implied volatility of the approximate call price at (t, k)."""
    price = price_approx(params, OptionSpec("call", k, t, x), contour)
    return implied_vol("call", x, k, t, price)


def _quote_contour(t: float, sig2: float) -> Contour:
    # Fixed-line quadrature keeps the objective smooth in theta: the
    # contour never switches discretely, L varies continuously with the
    # current diffusion variance, and the panel count tracks L so the
    # resolution near the transform pole stays at h ~ 0.1.
    L = max(200.0, math.sqrt(56.0 / (max(sig2, 1e-4) * t)))
    n = max(2048, 2 * math.ceil(L / 0.2))
    return Contour(lambda_i=-1.5, L=L, n=n)


def synthetic_surface(
    params: ModelParams,
    spot: float,
    maturities: list[float],
    log_moneyness: list[float],
    label: str = "synthetic",
) -> VolSurface:
    """Exact model-generated surface, for round-trip experiments."""
    x = math.log(spot)
    quotes = []
    for t in maturities:
        contour = _quote_contour(t, params.sig2_bar)
        for lm in log_moneyness:
            k = x + lm
            quotes.append(Quote(t=t, k=k, x=x, iv=model_iv(params, t, k, x, contour)))
    return VolSurface(spot=spot, quotes=tuple(quotes), label=label)


# ----------------------------------------------------------------------
# calibration
# ----------------------------------------------------------------------

@dataclass
class CalibrationResult:
    theta_star: ModelParams
    rmse: float
    residuals: np.ndarray
    iv_model: np.ndarray
    converged: bool
    iterations: int
    objective_trace: list[float] = field(repr=False, default_factory=list)

    def to_dict(self, surface: VolSurface) -> dict:
        rows = [
            {"t": q.t, "k": q.k, "iv_obs": q.iv, "iv_model": float(iv)}
            for q, iv in zip(surface.quotes, self.iv_model)
        ]
        return {
            "theta": model_params_to_dict(self.theta_star),
            "rmse": self.rmse,
            "residuals": rows,
            "converged": self.converged,
        }


def _rmse(residuals: np.ndarray) -> float:
    return float(np.sqrt(np.mean(residuals**2)))


def calibrate(
    surface: VolSurface,
    model_class: ModelClass,
    init: dict | None = None,
    bounds: dict | None = None,
    seed: int = 0,
    n_starts: int = 5,
    max_nfev: int = 600,
) -> CalibrationResult:
    """Fit the class's free parameters to the surface by least squares.

    Deterministic for fixed inputs and seed.  The extended family adds
    ``n_starts`` Latin-hypercube starts to the supplied init; restricted
    families run from the init alone.  Stalled optimizations return the
    best point found with converged=False.
    """
    parm = _Parameterization(model_class, dict(init or {}), dict(bounds or {}))
    quotes = surface.quotes

    trace: list[float] = []

    def residual_vec(u: np.ndarray) -> np.ndarray:
        try:
            params = parm.build(u)
        except (ValueError, LevySmileError):
            out = np.full(len(quotes), PENALTY)
            trace.append(_rmse(out))
            return out
        contours = {t: _quote_contour(t, params.sig2_bar) for t in {q.t for q in quotes}}
        out = np.empty(len(quotes))
        for i, q in enumerate(quotes):
            try:
                out[i] = model_iv(params, q.t, q.k, q.x, contours[q.t]) - q.iv
            except (LevySmileError, ValueError):
                out[i] = PENALTY
        trace.append(_rmse(out))
        return out

    starts = [parm.x0]
    if model_class.family == "extended" and n_starts > 0:
        sampler = qmc.LatinHypercube(d=len(parm.x0), seed=seed)
        width = parm.ub - parm.lb
        for row in sampler.random(n_starts):
            starts.append(parm.lb + row * width)

    best = None
    best_trace: list[float] = []
    for x0 in starts:
        trace = []
        res = least_squares(
            residual_vec,
            np.clip(x0, parm.lb, parm.ub),
            bounds=(parm.lb, parm.ub),
            method="trf",
            jac="2-point",
            diff_step=1e-6,
            ftol=1e-14,
            xtol=1e-14,
            gtol=1e-12,
            max_nfev=max_nfev,
        )
        if best is None or res.cost < best.cost:
            best = res
            best_trace = trace
        if _rmse(best.fun) < 1e-6:
            break

    params_star = parm.build(best.x)
    residuals = np.asarray(best.fun, dtype=float)
    iv_model = np.array([q.iv for q in quotes]) + residuals
    return CalibrationResult(
        theta_star=params_star,
        rmse=_rmse(residuals),
        residuals=residuals,
        iv_model=iv_model,
        converged=bool(best.status > 0),
        iterations=int(best.nfev),
        objective_trace=best_trace,
    )
