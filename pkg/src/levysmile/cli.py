"""Command-line front end.

Commands:
    price         one option: base, correction, approximate price, IV
    smile         model smile grid as plot-ready CSV
    mc-verify     approximate price vs Monte Carlo, per strike
    calibrate     least-squares fit of a class to a quote surface
    group-params  closed-form group parameters for an OU factor spec

All outputs are machine-readable (JSON or CSV) and deterministic for
fixed inputs and seed.  Exit codes: 0 ok, 2 input error, 3 numeric
error, 4 simulation budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .calibration import ModelClass, calibrate, model_iv, surface_from_csv
from .errors import (
    ArbitrageBoundsError,
    BudgetError,
    InvalidMeasureError,
    IVConvergenceError,
    LevySmileError,
    QuadratureError,
    SimulationError,
    StripError,
    SurfaceFormatError,
)
from .groups import ou_closed_forms, ou_spec_from_dict
from .measures import measure_from_dict
from .montecarlo import McConfig, simulate_prices
from .pricing import OptionSpec, model_params_from_dict, price_components
from .volatility import implied_vol

_INPUT_ERRORS = (InvalidMeasureError, SurfaceFormatError, StripError, ValueError, KeyError)
_NUMERIC_ERRORS = (QuadratureError, IVConvergenceError, ArbitrageBoundsError, SimulationError)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_BUDGET = 4


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(obj, out: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", out)


def _emit_table(header: list[str], rows: list[list], fmt: str, out: str | None) -> None:
    if fmt == "json":
        _emit_json([dict(zip(header, row)) for row in rows], out)
    else:
        lines = [",".join(header)]
        lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
        _emit("\n".join(lines) + "\n", out)


def _parse_strikes(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"--strikes expects lo:hi:n, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1 or hi < lo:
        raise ValueError(f"--strikes expects lo <= hi and n >= 1, got {text!r}")
    if n == 1:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _parse_maturities(text: str) -> list[float]:
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals or any(t <= 0 for t in vals):
        raise ValueError(f"--maturities expects positive comma-separated years, got {text!r}")
    return vals


def cmd_price(args) -> int:
    params = model_params_from_dict(_load_json(args.model))
    option = OptionSpec(
        kind=args.kind, k=math.log(args.strike), t=args.maturity, x=math.log(args.spot)
    )
    u0, eps_u1 = price_components(params, option)
    approx = u0 + eps_u1
    iv = implied_vol(option.kind, option.x, option.k, option.t, approx)
    _emit_json({"u0": u0, "eps_u1": eps_u1, "approx": approx, "iv": iv}, args.out)
    return EXIT_OK


def cmd_smile(args) -> int:
    params = model_params_from_dict(_load_json(args.model))
    x = math.log(args.spot)
    rows = []
    for t in sorted(_parse_maturities(args.maturities)):
        for strike in sorted(_parse_strikes(args.strikes)):
            k = math.log(strike)
            rows.append([t, k, k - x, model_iv(params, t, k, x)])
    header = ["t_years", "log_strike", "log_moneyness", "iv_model"]
    _emit_table(header, rows, args.format, args.out)
    return EXIT_OK


def cmd_mc_verify(args) -> int:
    spec = _load_json(args.model)
    if "ou" not in spec or "measure" not in spec:
        raise ValueError("mc-verify model JSON must contain 'ou' and 'measure' objects")
    ou = ou_spec_from_dict(spec["ou"])
    measure = measure_from_dict(spec["measure"])
    params = ou_closed_forms(ou).to_model_params(measure)
    maturities = _parse_maturities(args.maturities)
    strikes = _parse_strikes(args.strikes)
    x = math.log(args.spot)
    cfg = McConfig(n_paths=args.paths, dt=args.dt, seed=args.seed)
    rows = []
    for t in sorted(maturities):
        options = [OptionSpec("call", math.log(s), t, x) for s in sorted(strikes)]
        mc = simulate_prices(ou, measure, options, cfg)
        for option, res in zip(options, mc):
            u0, eps_u1 = price_components(params, option)
            approx = u0 + eps_u1
            iv_a = implied_vol("call", x, option.k, t, approx)
            iv_mc = implied_vol("call", x, option.k, t, res.price)
            rows.append(
                [
                    t,
                    math.exp(option.k),
                    approx,
                    iv_a,
                    res.price,
                    res.stderr,
                    iv_mc,
                    abs(iv_a - iv_mc),
                ]
            )
    header = [
        "t_years",
        "strike",
        "approx_price",
        "approx_iv",
        "mc_price",
        "mc_stderr",
        "mc_iv",
        "abs_iv_gap",
    ]
    _emit_table(header, rows, args.format, args.out)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    surface = surface_from_csv(args.surface)
    model_class = ModelClass(family=args.model_class, variant=args.measure)
    result = calibrate(surface, model_class, seed=args.seed)
    _emit_json(result.to_dict(surface), args.out)
    return EXIT_OK


def cmd_group_params(args) -> int:
    ou = ou_spec_from_dict(_load_json(args.model))
    g = ou_closed_forms(ou)
    _emit_json(
        {
            "sig2_bar": g.sig2_bar,
            "zeta_bar": g.zeta_bar,
            "v3": g.v3,
            "u3": g.u3,
            "v2": g.v2,
            "u2": g.u2,
            "eps": g.eps,
            "v3e": g.v3e,
            "u3e": g.u3e,
            "v2e": g.v2e,
            "u2e": g.u2e,
        },
        args.out,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levysmile",
        description="Option pricing, Monte Carlo verification and calibration "
        "for Levy models with fast mean-reverting volatility and jump intensity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("price", help="price one European option")
    p.add_argument("--model", required=True, help="model parameter JSON path")
    p.add_argument("--kind", choices=("call", "put"), default="call")
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--maturity", type=float, required=True, help="years")
    p.add_argument("--spot", type=float, required=True)
    add_common(p)
    p.set_defaults(run=cmd_price)

    p = sub.add_parser("smile", help="emit a model implied-vol grid")
    p.add_argument("--model", required=True)
    p.add_argument("--spot", type=float, required=True)
    p.add_argument("--strikes", required=True, metavar="lo:hi:n")
    p.add_argument("--maturities", required=True, metavar="t1,t2,...")
    add_common(p)
    p.set_defaults(run=cmd_smile)

    p = sub.add_parser("mc-verify", help="compare the approximation with Monte Carlo")
    p.add_argument("--model", required=True, help="JSON with 'ou' and 'measure' objects")
    p.add_argument("--spot", type=float, required=True)
    p.add_argument("--strikes", required=True, metavar="lo:hi:n")
    p.add_argument("--maturities", required=True, metavar="t1,t2,...")
    p.add_argument("--paths", type=int, default=400_000)
    p.add_argument("--dt", type=float, default=None, help="years; default eps^2/20")
    add_common(p)
    p.set_defaults(run=cmd_mc_verify)

    p = sub.add_parser("calibrate", help="fit a model class to a surface CSV")
    p.add_argument("--surface", required=True, help="CSV with t_years,log_strike,spot,iv")
    p.add_argument(
        "--class",
        dest="model_class",
        choices=("extended", "classic", "fmrsv"),
        default="extended",
    )
    p.add_argument(
        "--measure",
        choices=("merton", "gumbel", "dirac", "vg", "variancegamma", "uniform"),
        default="merton",
    )
    add_common(p)
    p.set_defaults(run=cmd_calibrate)

    p = sub.add_parser("group-params", help="closed-form group parameters for an OU spec")
    p.add_argument("--model", required=True, help="OU spec JSON path")
    add_common(p)
    p.set_defaults(run=cmd_group_params)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LevySmileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
