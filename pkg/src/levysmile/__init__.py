"""Pricing and calibration for exponential Levy models whose volatility and
jump intensity are driven by a fast mean-reverting factor."""

from .calibration import (
    CalibrationResult,
    ModelClass,
    VolSurface,
    calibrate,
    model_iv,
    surface_from_csv,
    surface_to_csv,
    synthetic_surface,
    theta_values,
)
from .errors import (
    ArbitrageBoundsError,
    BudgetError,
    IVConvergenceError,
    InvalidMeasureError,
    LevySmileError,
    QuadratureError,
    SimulationError,
    StripError,
    SurfaceFormatError,
)
from .groups import GroupParams, OuSpec, ou_closed_forms, ou_quadrature_oracle
from .measures import (
    Dirac,
    Gumbel,
    Merton,
    Uniform,
    VarianceGamma,
    complex_gamma,
    measure_from_dict,
    measure_to_dict,
    validate,
)
from .montecarlo import McConfig, McResult, simulate_price, simulate_prices, simulate_terminal
from .multiscale import SlowParams, price_approx_full, price_slow_correction, slow_symbol
from .pricing import (
    Contour,
    ModelParams,
    OptionSpec,
    char_exponent,
    correction_symbol,
    model_params_from_dict,
    model_params_to_dict,
    payoff_transform,
    price_approx,
    price_base,
    price_components,
    price_correction,
)
from .volatility import Quote, bs_price, bs_vega, implied_vol

__version__ = "0.1.0"

__all__ = [
    "ArbitrageBoundsError",
    "BudgetError",
    "CalibrationResult",
    "Contour",
    "Dirac",
    "GroupParams",
    "Gumbel",
    "IVConvergenceError",
    "InvalidMeasureError",
    "LevySmileError",
    "McConfig",
    "McResult",
    "Merton",
    "ModelClass",
    "ModelParams",
    "OptionSpec",
    "OuSpec",
    "QuadratureError",
    "Quote",
    "SimulationError",
    "SlowParams",
    "StripError",
    "SurfaceFormatError",
    "Uniform",
    "VarianceGamma",
    "VolSurface",
    "bs_price",
    "bs_vega",
    "calibrate",
    "char_exponent",
    "complex_gamma",
    "correction_symbol",
    "implied_vol",
    "measure_from_dict",
    "measure_to_dict",
    "model_iv",
    "model_params_from_dict",
    "model_params_to_dict",
    "ou_closed_forms",
    "ou_quadrature_oracle",
    "payoff_transform",
    "price_approx",
    "price_approx_full",
    "price_base",
    "price_components",
    "price_correction",
    "price_slow_correction",
    "simulate_price",
    "simulate_prices",
    "simulate_terminal",
    "slow_symbol",
    "surface_from_csv",
    "surface_to_csv",
    "synthetic_surface",
    "theta_values",
    "validate",
]
