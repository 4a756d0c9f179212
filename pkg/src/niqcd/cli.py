"""Command-line interface: fit / simulate / metrics / gof / stock.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
All defaults shown by --help mirror the benchmark configuration (m_init 10,
epsilon 0.05, kappa 0.001, tau 1). A key=value config file can pre-set any
fitting flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import Family, MixtureModel
from .empirical import SortedSample
from .errors import DataError, NumericalError
from .estimation import FitConfig, fit_iqcd, fit_niqcd
from .finance import (ReturnSeries, classify, ingest_prices, weekly_refit,
                      write_category_csv, write_trajectory_csv)
from .gof import ad_test
from .overlap import overlap_report
from .simulate import SETTING_IDS, emit_report, make_setting, run_experiment

__all__ = ["main", "dispatch"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; remap onto this CLI's exit-code contract.
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


_CONFIG_KEYS = {
    "m_init": int,
    "tau": float,
    "epsilon": float,
    "kappa": float,
    "max_iter": int,
    "weight_mode": str,
    "refine": bool,
    "cp_penalty": str,
    "seed": int,
    "threads": int,
    "family": str,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise DataError(f"expected a boolean, got {text!r}")


def load_config_file(path) -> dict:
    """Parse a key=value file (comments with '#', blank lines skipped)."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            value = value.strip("\"'")
            if key not in _CONFIG_KEYS:
                raise DataError(f"{path}:{lineno}: unknown key {key!r}")
            caster = _CONFIG_KEYS[key]
            try:
                out[key] = _parse_bool(value) if caster is bool else caster(value)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad value for {key}") from None
    return out


def _add_fit_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, default=None,
                   help="key=value config file; flags override it")
    p.add_argument("--m-init", type=int, default=None,
                   help="initial grid size (default: 10)")
    p.add_argument("--tau", type=float, default=None,
                   help="scale divisor (default: 1.0)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="cumulative-weight cutoff (default: 0.05)")
    p.add_argument("--kappa", type=float, default=None,
                   help="relative NLL stopping tolerance (default: 0.001)")
    p.add_argument("--max-iter", type=int, default=None,
                   help="refinement iteration cap (default: 200)")
    p.add_argument("--weight-mode", choices=["simplex_ls", "ols_rescale"],
                   default=None, help="weight solver (default: simplex_ls)")
    p.add_argument("--refine", dest="refine", action="store_true", default=None,
                   help="run coordinate-descent refinement (default: on)")
    p.add_argument("--no-refine", dest="refine", action="store_false",
                   help="skip refinement")
    p.add_argument("--cp-penalty", default=None,
                   help="change-point penalty, a number or 'bic' (default: bic)")
    p.add_argument("--family", choices=[f.value for f in Family], default=None,
                   help="component family (default: cauchy)")


_CLI_FIT_DEFAULTS = {
    "m_init": 10,
    "tau": 1.0,
    "epsilon": 0.05,
    "kappa": 0.001,
    "max_iter": 200,
    "weight_mode": "simplex_ls",
    "refine": True,
    "cp_penalty": "bic",
    "family": "cauchy",
}


def _merged(args, config: dict, key: str):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return _CLI_FIT_DEFAULTS.get(key)


def _build_fit_config(args, config: dict) -> tuple[FitConfig, Family]:
    penalty = _merged(args, config, "cp_penalty")
    if isinstance(penalty, str) and penalty != "bic":
        try:
            penalty = float(penalty)
        except ValueError:
            raise DataError(f"bad --cp-penalty {penalty!r}") from None
    cfg = FitConfig(
        m_init=_merged(args, config, "m_init"),
        tau=_merged(args, config, "tau"),
        epsilon=_merged(args, config, "epsilon"),
        kappa=_merged(args, config, "kappa"),
        max_iter=_merged(args, config, "max_iter"),
        weight_mode=_merged(args, config, "weight_mode"),
        refine=_merged(args, config, "refine"),
        cp_penalty=penalty,
    )
    return cfg, Family.parse(_merged(args, config, "family"))


def read_value_csv(path) -> np.ndarray:
    """One observation per line; a single non-numeric header line is allowed."""
    values = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip().rstrip(",")
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise DataError(f"{path}:{lineno}: bad value {line!r}") from None
    if not values:
        raise DataError(f"{path}: no observations found")
    return np.asarray(values)


def _load_model(path) -> MixtureModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read model file: {exc}") from None
    return MixtureModel.from_json(text)


def _emit(obj: dict, out: Path | None):
    text = json.dumps(obj, indent=2)
    if out is None:
        print(text)
    else:
        out.write_text(text + "\n")


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_fit(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    cfg, family = _build_fit_config(args, config)
    if args.as_prices:
        series = ingest_prices(args.input, scale100=args.scale100)
        values = series.returns_x100
    else:
        values = read_value_csv(args.input)
    sample = SortedSample.from_values(values)
    fit = fit_iqcd if args.method == "iqcd" else fit_niqcd
    report = fit(sample, cfg, family)
    _emit(report.to_dict(), args.out)
    return 0


def _cmd_simulate(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    cfg, _family = _build_fit_config(args, config)
    setting_ids = list(SETTING_IDS) if args.setting == "all" else [args.setting]
    methods = ["niqcd", "iqcd"] if args.method == "both" else [args.method]
    threads = args.threads if args.threads is not None else config.get("threads", 1)
    results = []
    for sid in setting_ids:
        setting = make_setting(sid)
        for method in methods:
            results.append(run_experiment(setting, method, args.n, args.reps,
                                          args.seed, cfg, threads=threads))
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    path = emit_report(results, out_dir / "report.csv")
    print(path)
    return 0


def _cmd_metrics(args) -> int:
    if (args.model is None) == (args.setting is None):
        raise _UsageError("metrics: provide exactly one of --model/--setting")
    model = (_load_model(args.model) if args.model
             else make_setting(args.setting).model)
    report = overlap_report(model, abs_tol=args.abs_tol, mc_n=args.mc_n,
                            seed=args.seed)
    _emit(report.to_dict(), args.out)
    return 0


def _cmd_gof(args) -> int:
    model = _load_model(args.model)
    sample = SortedSample.from_values(read_value_csv(args.data))
    method = ("parametric_bootstrap" if args.method == "bootstrap"
              else "asymptotic_case0")
    result = ad_test(sample, model, method=method, bootstrap_b=args.b,
                     seed=args.seed, threads=args.threads)
    _emit(result.to_dict(), args.out)
    return 0


def _cmd_stock(args) -> int:
    config = load_config_file(args.config) if args.config else {}
    cfg, family = _build_fit_config(args, config)
    threads = args.threads if args.threads is not None else config.get("threads", 1)
    series = ingest_prices(args.prices, scale100=args.scale100)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.predict_from is not None:
        n_train = sum(1 for d in series.dates if d < args.predict_from)
        if n_train < 10:
            raise DataError("fewer than 10 returns before --predict-from")
        fit_values = series.returns_x100[:n_train]
        predict = slice(n_train, None)
    else:
        fit_values = series.returns_x100
        predict = slice(0, None)

    report = fit_niqcd(SortedSample.from_values(fit_values), cfg, family)
    (out_dir / "model.json").write_text(report.model.to_json() + "\n")

    tail = ReturnSeries(dates=series.dates[predict],
                        returns_x100=series.returns_x100[predict])
    cats = classify(report.model, tail, weighted=not args.unweighted)
    write_category_csv(out_dir / "categories.csv", cats)

    if args.weekly_from is not None:
        refits = weekly_refit(series, args.weekly_from, cfg, family,
                              threads=threads)
        write_trajectory_csv(out_dir / "trajectory.csv", refits)
    print(out_dir)
    return 0


# ---------------------------------------------------------------------------


def _isodate(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ISO date {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="niqcd",
                     description="Mixture estimation for heavy-tailed data "
                                 "via quantile change detection.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one data set")
    p.add_argument("--input", type=Path, required=True,
                   help="one-column CSV of observations (or prices with --as-prices)")
    p.add_argument("--as-prices", action="store_true",
                   help="treat input as a date,close price CSV and fit log returns")
    p.add_argument("--scale100", action=argparse.BooleanOptionalAction,
                   default=True,
                   help="with --as-prices, fit x100-scaled returns")
    p.add_argument("--method", choices=["niqcd", "iqcd"], default="niqcd",
                   help="fitting pipeline (default: niqcd)")
    p.add_argument("--out", type=Path, default=None,
                   help="write the fit report JSON here instead of stdout")
    _add_fit_flags(p)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("simulate", help="run the seeded benchmark grid")
    p.add_argument("--setting", choices=list(SETTING_IDS) + ["all"], required=True)
    p.add_argument("--method", choices=["niqcd", "iqcd", "both"], required=True)
    p.add_argument("--n", type=int, required=True, help="sample size per replicate")
    p.add_argument("--reps", type=int, required=True, help="replicates per cell")
    p.add_argument("--seed", type=int, required=True,
                   help="base seed (replicate r uses seed+r)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for replicates (default: 1)")
    _add_fit_flags(p)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("metrics", help="overlap/dispersion measures of a model")
    p.add_argument("--model", type=Path, default=None, help="model JSON file")
    p.add_argument("--setting", choices=list(SETTING_IDS), default=None,
                   help="use a benchmark generator instead of --model")
    p.add_argument("--abs-tol", type=float, default=1e-8)
    p.add_argument("--mc-n", type=int, default=100_000,
                   help="Monte Carlo draws for the dispersion denominator")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("gof", help="Anderson-Darling test of data against a model")
    p.add_argument("--model", type=Path, required=True, help="model JSON file")
    p.add_argument("--data", type=Path, required=True, help="one-column CSV")
    p.add_argument("--method", choices=["asymptotic", "bootstrap"],
                   default="asymptotic")
    p.add_argument("--b", type=int, default=499, help="bootstrap replicates")
    p.add_argument("--seed", type=int, default=None,
                   help="bootstrap seed (required for --method bootstrap)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(handler=_cmd_gof)

    p = sub.add_parser("stock", help="price CSV -> regime fit and classification")
    p.add_argument("--prices", type=Path, required=True, help="date,close CSV")
    p.add_argument("--scale100", action=argparse.BooleanOptionalAction,
                   default=True,
                   help="fit x100-scaled log returns")
    p.add_argument("--weekly-from", type=_isodate, default=None,
                   help="start date of weekly refits (ISO)")
    p.add_argument("--predict-from", type=_isodate, default=None,
                   help="fit on data before this date, classify from it on")
    p.add_argument("--unweighted", action="store_true",
                   help="classify by unweighted component densities")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for weekly refits (default: 1)")
    _add_fit_flags(p)
    p.set_defaults(handler=_cmd_stock)

    return parser


def dispatch(argv: list[str] | None = None) -> int:
    """Parse argv and run the matching subcommand; returns the exit code."""
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help / --version print and stop
            return int(exc.code or 0)
        return args.handler(args)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(dispatch())
