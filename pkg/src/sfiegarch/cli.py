"""Batch command-line interface.

Subcommands: sim, fit, forecast, acov, spectrum, diag, evaluate, ingest.
Outputs are CSV (data) and JSON (structured results); every subcommand is a
pure function of its inputs, flags and seed, so reruns are byte-identical.
Exit codes: 0 ok, 2 validation failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import set_num_threads
from .acov import gamma_ln_sigma2, gamma_ln_x2
from .coeffs import lambda_weights
from .data import ParseError, aggregate_returns, descriptive_stats, ingest_prices
from .errors import SfiegarchError
from .estimate import FitConfig, FitResult, fit_two_step
from .evaluate import (
    cumulative_periodogram,
    density_transform_test,
    diebold_mariano,
    error_measures,
    mincer_zarnowitz,
    portmanteau,
    predictive_loglik,
)
from .model import InnovationDist
from .model import spec_from_dict, spec_to_dict, validate
from .forecast import forecast_set
from .simulate import simulate_returns, simulate_sfiegarch
from .spectral import periodogram, spectral_ln_sigma2, spectral_ln_x2

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


def _format_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip decimal form
    return str(v)


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _load_model(path: str):
    with open(path) as fh:
        doc = json.load(fh)
    spec, arma = spec_from_dict(doc)
    report = validate(spec)
    if not report.ok:
        raise SfiegarchError("invalid model file: " + "; ".join(report.violations))
    return spec, arma


def _read_series_csv(path: str, column: str):
    import csv as _csv

    with open(path, newline="") as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise SfiegarchError(f"column {column!r} not found in {path}")
        return np.array([float(row[column]) for row in reader])


def _cmd_sim(args, out: Path) -> int:
    spec, arma = _load_model(args.model)
    path = simulate_sfiegarch(spec, args.n, args.burn_in, args.m_trunc, seed=args.seed)
    rows = zip(range(1, path.x.size + 1), path.x, path.sigma2, path.z)
    _write_csv(out / "sim.csv", ["t", "x", "sigma2", "z"], rows)
    if arma is not None:
        r = simulate_returns(arma, path)
        _write_csv(out / "returns.csv", ["t", "r"], zip(range(1, r.size + 1), r))
    return EXIT_OK


def _parse_lags(text: str) -> dict:
    if not text:
        return {}
    return {int(tok): 0.0 for tok in text.split(",")}


def _fit_result_doc(fit: FitResult) -> dict:
    doc = {
        "model": spec_to_dict(fit.spec_hat, fit.arma_hat),
        "loglik": fit.loglik,
        "aic": fit.aic,
        "bic": fit.bic,
        "hqc": fit.hqc,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "n_obs": fit.n_obs,
        "se": fit.se,
        "param_names": fit.param_names,
        "cov_robust": fit.cov_robust.tolist(),
        "cov_flags": fit.cov_flags,
        "ez_abs": fit.ez_abs,
    }
    return doc


def _cmd_fit(args, out: Path) -> int:
    r = _read_series_csv(args.returns, args.column)
    overrides = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        allowed = {"max_iter", "tol", "ez_abs", "fix_d", "root_margin", "penalty_weight"}
        overrides = {k: doc[k] for k in doc.keys() & allowed}
    if args.egarch:
        overrides["fix_d"] = 0.0
    cfg = FitConfig(**overrides)
    fit = fit_two_step(
        r,
        s=args.s,
        p=args.p,
        q=args.q,
        ar_lags=_parse_lags(args.ar_lags).keys(),
        ma_lags=_parse_lags(args.ma_lags).keys(),
        include_mean=not args.no_mean,
        config=cfg,
    )
    _write_json(out / "fit.json", _fit_result_doc(fit))
    rows = zip(
        range(1, fit.n_obs + 1),
        fit.residuals_x,
        fit.residuals_z,
        fit.sigma2_fitted,
        fit.returns if fit.returns is not None else fit.residuals_x,
    )
    _write_csv(out / "residuals.csv", ["t", "x_hat", "z_hat", "sigma2", "r"], rows)
    return EXIT_OK


def _load_fit(fit_json: str, residuals_csv: str) -> FitResult:
    with open(fit_json) as fh:
        doc = json.load(fh)
    spec, arma = spec_from_dict(doc["model"])
    x = _read_series_csv(residuals_csv, "x_hat")
    z = _read_series_csv(residuals_csv, "z_hat")
    s2 = _read_series_csv(residuals_csv, "sigma2")
    r = _read_series_csv(residuals_csv, "r")
    k = len(doc["param_names"])
    return FitResult(
        spec_hat=spec,
        arma_hat=arma,
        loglik=doc["loglik"],
        cov_robust=np.array(doc["cov_robust"]),
        se=doc["se"],
        aic=doc["aic"],
        bic=doc["bic"],
        hqc=doc["hqc"],
        residuals_x=x,
        residuals_z=z,
        sigma2_fitted=s2,
        converged=doc["converged"],
        iterations=doc["iterations"],
        param_names=doc["param_names"],
        ez_abs=doc["ez_abs"],
        n_obs=x.size,
        returns=r,
    )


def _cmd_forecast(args, out: Path) -> int:
    fit = _load_fit(args.fit, args.residuals)
    sets = forecast_set(fit, range(1, args.h + 1), e_mode=args.e_mode)
    rows = [
        (
            fs.horizon,
            fs.r_hat,
            fs.r2_hat,
            fs.sigma2_hat,
            fs.sigma2_check,
            fs.sigma2_tilde,
            fs.mse_sigma2,
            fs.mse_ln,
        )
        for fs in sets
    ]
    _write_csv(
        out / "forecast.csv",
        ["h", "r_hat", "r2_hat", "sigma2_hat", "sigma2_check", "sigma2_tilde", "mse_sigma2", "mse_ln"],
        rows,
    )
    return EXIT_OK


def _cmd_acov(args, out: Path) -> int:
    spec, _ = _load_model(args.model)
    lags = range(args.max_lag + 1)
    lam = lambda_weights(spec, max(args.max_lag, args.lambda_trunc or 0))
    if args.target == "ln_x2":
        vals = [gamma_ln_x2(spec, h, lam=lam, lambda_trunc=args.lambda_trunc) for h in lags]
    else:
        vals = [gamma_ln_sigma2(spec, h) for h in lags]
    _write_csv(out / "acov.csv", ["lag", "value"], zip(lags, vals))
    return EXIT_OK


def _cmd_spectrum(args, out: Path) -> int:
    spec, _ = _load_model(args.model)
    freqs = np.linspace(0.0, np.pi, args.n_freq + 1)[1:]  # skip the zero frequency
    if args.target == "ln_x2":
        vals = spectral_ln_x2(spec, freqs)
    else:
        vals = spectral_ln_sigma2(spec, freqs)
    _write_csv(out / "spectrum.csv", ["freq", "value"], zip(freqs, vals))
    return EXIT_OK


def _cmd_diag(args, out: Path) -> int:
    x = _read_series_csv(args.series, args.column)
    lags = [int(v) for v in args.lags.split(",")]
    bp, lb = portmanteau(x, lags, fitted_params=args.fitted_params)
    cp = cumulative_periodogram(x)
    doc = {
        "n": int(x.size),
        "box_pierce": {str(k): list(v) for k, v in bp.items()},
        "ljung_box": {str(k): list(v) for k, v in lb.items()},
        "cumulative_periodogram": asdict(cp),
        "stats": asdict(descriptive_stats(x)),
    }
    _write_json(out / "diag.json", doc)
    return EXIT_OK


def _cmd_evaluate(args, out: Path) -> int:
    y = _read_series_csv(args.actual, args.actual_column)
    yhat = _read_series_csv(args.predicted, args.predicted_column)
    measures = error_measures(y, yhat)
    doc = {"error_measures": asdict(measures)}
    if args.dm_against:
        other = _read_series_csv(args.dm_against, args.predicted_column)
        d = np.abs(y - yhat) - np.abs(y - other)
        doc["diebold_mariano"] = asdict(diebold_mariano(d, h=args.h))
    if args.mz:
        doc["mincer_zarnowitz"] = asdict(
            mincer_zarnowitz(y, yhat, n_fit=args.n_fit, hac_lags=args.hac_lags)
        )
    if args.pit_sigma2:
        s2 = _read_series_csv(args.pit_sigma2, "sigma2")
        nus = [float(v) for v in args.nu_grid.split(",")]
        rows = density_transform_test(y, s2, nus)
        doc["density_transform"] = [asdict(r) for r in rows]
        _write_csv(
            out / "density_transform.csv",
            ["nu", "ks_stat", "pvalue"],
            [(r.nu, r.stat, r.pvalue) for r in rows],
        )
        doc["predictive_loglik"] = {
            repr(nu): predictive_loglik(
                y,
                yhat,
                s2,
                InnovationDist("gaussian") if nu == 2.0 else InnovationDist("ged", nu),
            )
            for nu in nus
        }
    _write_json(out / "evaluate.json", doc)
    return EXIT_OK


def _cmd_ingest(args, out: Path) -> int:
    ds = ingest_prices(args.prices)
    if args.block > 1:
        ds = aggregate_returns(ds, args.block, keep_partial=args.keep_partial)
    rows = zip(
        (ts.isoformat() for ts in ds.timestamps),
        ds.values,
    )
    _write_csv(out / "returns.csv", ["timestamp", "r"], rows)
    _write_json(
        out / "ingest.json",
        {
            "n_returns": int(ds.values.size),
            "day_counts": ds.day_counts,
            "rejected_rows": ds.rejected_rows,
            "stats": asdict(descriptive_stats(ds.values)) if ds.values.size >= 4 else None,
        },
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfiegarch", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="RNG seed for stochastic commands")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="numba thread cap")
    parser.add_argument(
        "--config",
        default=None,
        help="JSON file with estimation options (max_iter, tol, ez_abs, fix_d, ...)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", help="simulate a path")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--m-trunc", type=int, default=None)
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("fit", help="two-step QML fit")
    p.add_argument("--returns", required=True)
    p.add_argument("--column", default="r")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--ar-lags", default="")
    p.add_argument("--ma-lags", default="")
    p.add_argument("--no-mean", action="store_true")
    p.add_argument("--egarch", action="store_true", help="fix d = 0")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("forecast", help="h-step forecasts from a saved fit")
    p.add_argument("--fit", required=True)
    p.add_argument("--residuals", required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--e-mode", choices=["sample", "analytic"], default="sample")
    p.set_defaults(func=_cmd_forecast)

    p = sub.add_parser("acov", help="theoretical autocovariances")
    p.add_argument("--model", required=True)
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--target", choices=["ln_x2", "ln_sigma2"], default="ln_x2")
    p.add_argument("--lambda-trunc", type=int, default=None)
    p.set_defaults(func=_cmd_acov)

    p = sub.add_parser("spectrum", help="theoretical spectral density")
    p.add_argument("--model", required=True)
    p.add_argument("--n-freq", type=int, default=512)
    p.add_argument("--target", choices=["ln_x2", "ln_sigma2"], default="ln_x2")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("diag", help="whiteness diagnostics for a series")
    p.add_argument("--series", required=True)
    p.add_argument("--column", default="r")
    p.add_argument("--lags", default="10,20")
    p.add_argument("--fitted-params", type=int, default=0)
    p.set_defaults(func=_cmd_diag)

    p = sub.add_parser("evaluate", help="forecast evaluation statistics")
    p.add_argument("--actual", required=True)
    p.add_argument("--actual-column", default="r")
    p.add_argument("--predicted", required=True)
    p.add_argument("--predicted-column", default="r_hat")
    p.add_argument("--dm-against", default=None, help="competing forecast CSV for DM test")
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--mz", action="store_true")
    p.add_argument("--n-fit", type=int, default=1)
    p.add_argument("--hac-lags", type=int, default=5)
    p.add_argument("--pit-sigma2", default=None, help="CSV with a sigma2 column for PIT")
    p.add_argument("--nu-grid", default="1.45,1.5,1.55,1.7,2.0")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("ingest", help="prices -> returns -> aggregation")
    p.add_argument("--prices", required=True)
    p.add_argument("--block", type=int, default=1)
    p.add_argument("--keep-partial", action="store_true")
    p.set_defaults(func=_cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    set_num_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args, out)
    except (FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SfiegarchError, ParseError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
