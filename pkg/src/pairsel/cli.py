"""Command-line front end.

    pairsel quantile --n 100 --p 1000
    pairsel screen --data train.csv --response y
    pairsel fit --train train.csv --validation val.csv --response y
    pairsel simulate --example 1 --p 1000 --reps 20 --seed 7
    pairsel sweep --example 1 --n-values 100,500 --p-values 500,1000
    pairsel validate-laws --n 10 --p 200 --reps 1000

Structured output is JSON (stdout or --out). Exit status is 0 on success,
2 on usage errors and 1 on runtime errors, each with a one-line message.
"""

import argparse
import os
import sys
import warnings

import numpy as np

from .exceptions import DomainError, PairselError
from .io import (SCHEMA_VERSION, CsvFormatError, csv_text, dumps, ingest_csv,
                 read_json)
from .laws import law_thresholds, normalizing_constants
from .simulate import (PipelineConfig, SimScenario, example_scenario,
                       run_scenario, screen_for, sensitivity_sweep, sweep_csv)
from .solver import (DEFAULT_LAMBDA2_GRID, PenaltySpec, classify, fit,
                     predict)
from .stats import standardize
from .tuning import TuningPlan, tune
from .validation import validate_laws

THREADS_ENV = "PAIRSEL_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------ flag types

def _number(kind, low=None, high=None, low_open=False, high_open=False):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"expected {kind.__name__}, got {text!r}") from None
        if kind is float and not np.isfinite(v):
            raise argparse.ArgumentTypeError(f"{text!r} is not finite")
        if low is not None and (v < low or (low_open and v == low)):
            raise argparse.ArgumentTypeError(
                f"{text} must be {'>' if low_open else '>='} {low}")
        if high is not None and (v > high or (high_open and v == high)):
            raise argparse.ArgumentTypeError(
                f"{text} must be {'<' if high_open else '<='} {high}")
        return v
    return parse


probability = _number(float, 0.0, 1.0, low_open=True, high_open=True)
positive = _number(float, 0.0, low_open=True)
nonnegative = _number(float, 0.0)


def count(low):
    return _number(int, low)


def number_list(item):
    def parse(text):
        parts = [t for t in text.split(",") if t.strip()]
        if not parts:
            raise argparse.ArgumentTypeError("empty list")
        return tuple(item(t.strip()) for t in parts)
    return parse


def _response(text):
    return int(text) if text.lstrip("-").isdigit() else text


# ------------------------------------------------------------ output

def _emit(obj, out):
    text = dumps(obj) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env is None or not env.strip():
        return 1
    try:
        value = int(env)
    except ValueError:
        raise UsageError(f"{THREADS_ENV}={env!r} is not an integer") from None
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value


def _pipeline(args):
    return PipelineConfig(
        method=args.method, alpha=args.alpha, delta=args.delta, k=args.k,
        pairs=args.pairs, threshold_p=args.threshold_p,
        lambda2_grid=args.lambda2_grid, n_lambda=args.n_lambda,
        min_ratio=args.min_ratio, metric=args.metric, tol=args.tol)


# ------------------------------------------------------------ subcommands

def cmd_quantile(args):
    th = law_thresholds(args.alpha, args.delta, args.n, args.p)
    k = normalizing_constants(args.n, args.p)
    out = {"schema_version": SCHEMA_VERSION, "kind": "thresholds",
           "a": k.a, "b": k.b, "c": k.c}
    out.update(th.to_dict())
    _emit(out, args.out)
    return 0


def _load(path, args):
    return ingest_csv(path, args.response, header=not args.no_header)


def cmd_screen(args):
    d = _load(args.data, args)
    config = PipelineConfig(method=args.method, alpha=args.alpha,
                            delta=args.delta, k=args.k,
                            threshold_p=args.threshold_p)
    sets = screen_for(d, config, args.family)
    out = {"schema_version": SCHEMA_VERSION, "kind": "screen_sets",
           "names": list(d.names),
           "m_names": [d.names[j] for j in sets.m],
           "c_names": [d.names[j] for j in sets.c]}
    out.update(sets.to_dict())
    _emit(out, args.out)
    return 0


def _fit_options(args):
    opts = {"max_sweeps": args.max_sweeps}
    if args.tol is not None:
        opts["tol"] = args.tol
    return opts


def cmd_fit(args):
    train = _load(args.train, args)
    validation = _load(args.validation, args) if args.validation else None
    if validation is not None and validation.names != train.names:
        raise CsvFormatError("validation columns differ from training columns")
    sets = screen_for(train, _pipeline(args), args.family)
    opts = _fit_options(args)
    scores = None
    if args.lambda1 is not None:
        lam2 = args.lambda2 if args.lambda2 is not None else 1.0
        spec = PenaltySpec.from_sets(train.p, sets.m, sets.c, args.lambda1,
                                     lam2)
        model = fit(standardize(train), spec, args.family, **opts)
        lam1 = args.lambda1
    else:
        grid2 = (args.lambda2,) if args.lambda2 is not None \
            else args.lambda2_grid
        plan = TuningPlan(
            strategy="validation_set" if validation is not None else "kfold",
            k=args.folds, lambda2_grid=grid2, metric=args.metric,
            seed=args.seed, n_lambda=args.n_lambda, min_ratio=args.min_ratio)
        result = tune(train, sets, plan, validation, args.family, opts)
        model, lam1, lam2 = result.model, result.lambda1, result.lambda2
        scores = result.scores

    model_dict = model.to_dict()
    out = {
        "schema_version": SCHEMA_VERSION, "kind": "fit",
        "names": list(train.names), "family": args.family,
        "method": args.method, "lambda1": float(lam1), "lambda2": float(lam2),
        "screen": sets.to_dict(), "model": model_dict,
        "coefficients": {train.names[j]: float(model.beta_original[j])
                         for j in model.active_set},
    }
    if scores is not None:
        out["tuning_scores"] = scores
    _emit(out, args.out)

    if args.predictions:
        target = _load(args.predict, args) if args.predict else \
            (validation if validation is not None else train)
        mu = predict(model, target.x)
        if args.family == "binomial":
            rows = [(i + 1, float(m), int(c)) for i, (m, c) in
                    enumerate(zip(mu, classify(model, target.x)))]
            header = ["row", "probability", "class"]
        else:
            rows = [(i + 1, float(m)) for i, m in enumerate(mu)]
            header = ["row", "prediction"]
        _write_text(args.predictions, csv_text(header, rows))
    return 0


def _scenario(args):
    if args.config:
        base = SimScenario.from_dict(read_json(args.config))
    else:
        base = example_scenario(args.example, p=args.p or 1000)
    changes = {"seed": args.seed}
    for flag, field in (("p", "p"), ("sigma", "sigma"), ("reps", "replications"),
                        ("n_train", "n_train"), ("n_val", "n_val"),
                        ("n_test", "n_test")):
        value = getattr(args, flag)
        if value is not None:
            changes[field] = value
    return base.replace(**changes)


def cmd_simulate(args):
    scenario = _scenario(args)
    report = run_scenario(scenario, _pipeline(args), _threads(args))
    _emit(report.to_dict(), args.out)
    if args.csv:
        _write_text(args.csv, report.to_csv())
    return 0


def cmd_sweep(args):
    base = _scenario(args)
    cells = sensitivity_sweep(base, args.n_values, args.p_values,
                              args.sigma_values, _pipeline(args),
                              _threads(args))
    out = {"schema_version": SCHEMA_VERSION, "kind": "sweep",
           "cells": [{"n": c["n"], "p": c["p"], "sigma": c["sigma"],
                      "report": c["report"].to_dict()} for c in cells]}
    _emit(out, args.out)
    if args.csv:
        _write_text(args.csv, sweep_csv(cells))
    return 0


def cmd_validate_laws(args):
    report = validate_laws(args.n, args.p, args.reps, args.seed, args.alpha,
                           args.delta, args.compare_p)
    _emit(report, args.out)
    return 0


# ------------------------------------------------------------ parser

def _add_thresholds(sp, delta=0.1):
    sp.add_argument("--alpha", type=probability, default=0.05)
    sp.add_argument("--delta", type=positive, default=delta)


def _add_data(sp):
    sp.add_argument("--response", type=_response, default=-1,
                    help="response column name or 0-based index "
                         "(default: last column)")
    sp.add_argument("--no-header", action="store_true")


def _add_pipeline(sp, methods=("pearson", "spearman", "lasso")):
    sp.add_argument("--method", choices=methods, default="pearson")
    _add_thresholds(sp)
    sp.add_argument("--k", type=count(1), default=None,
                    help="SIS subset size (default [n / log n])")
    sp.add_argument("--pairs", choices=("screen", "none", "all"),
                    default="screen")
    sp.add_argument("--threshold-p", choices=("ambient", "subset"),
                    default="ambient")
    sp.add_argument("--lambda2-grid", type=number_list(positive),
                    default=DEFAULT_LAMBDA2_GRID)
    sp.add_argument("--n-lambda", type=count(1), default=50)
    sp.add_argument("--min-ratio", type=probability, default=1e-3)
    sp.add_argument("--metric", choices=("mse", "deviance",
                                         "classification_error"))
    sp.add_argument("--tol", type=positive, default=None)


def _add_scenario(sp):
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--example", type=int, choices=(1, 2, 3, 4, 5), default=1)
    src.add_argument("--config", help="scenario JSON file")
    sp.add_argument("--p", type=count(2), default=None)
    sp.add_argument("--sigma", type=nonnegative, default=None)
    sp.add_argument("--reps", type=count(1), default=None)
    sp.add_argument("--n-train", type=count(5), default=None)
    sp.add_argument("--n-val", type=count(2), default=None)
    sp.add_argument("--n-test", type=count(1), default=None)
    sp.add_argument("--threads", type=count(1), default=None,
                    help=f"worker processes (fallback: ${THREADS_ENV}, then 1)")
    sp.add_argument("--csv", help="also write long-format CSV here")


def build_parser():
    parser = _Parser(prog="pairsel",
                     description="Pairwise correlation screening with "
                                 "mixed l1/l2 penalties.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.add_argument("--seed", type=count(0), default=0)
        return sp

    sp = add("quantile", cmd_quantile, "print screening thresholds")
    sp.add_argument("--n", type=count(4), required=True)
    sp.add_argument("--p", type=count(3), required=True)
    _add_thresholds(sp)

    sp = add("screen", cmd_screen, "screen a CSV dataset")
    sp.add_argument("--data", required=True)
    _add_data(sp)
    sp.add_argument("--method", choices=("pearson", "spearman"),
                    default="pearson")
    sp.add_argument("--family", choices=("gaussian", "binomial"),
                    default="gaussian")
    _add_thresholds(sp)
    sp.add_argument("--k", type=count(1), default=None)
    sp.add_argument("--threshold-p", choices=("ambient", "subset"),
                    default="ambient")

    sp = add("fit", cmd_fit, "screen, tune and fit on CSV data")
    sp.add_argument("--train", required=True)
    sp.add_argument("--validation")
    _add_data(sp)
    sp.add_argument("--family", choices=("gaussian", "binomial"),
                    default="gaussian")
    _add_pipeline(sp)
    sp.add_argument("--lambda1", type=nonnegative, default=None,
                    help="fixed l1 weight (skips tuning)")
    sp.add_argument("--lambda2", type=positive, default=None,
                    help="fixed l2 weight")
    sp.add_argument("--folds", type=count(2), default=5,
                    help="k-fold tuning when no validation file is given")
    sp.add_argument("--max-sweeps", type=count(1), default=10_000)
    sp.add_argument("--predict", help="CSV to predict on (default: "
                                      "validation, else training data)")
    sp.add_argument("--predictions", help="write predictions CSV here")

    sp = add("simulate", cmd_simulate, "replicate a simulated example")
    _add_scenario(sp)
    _add_pipeline(sp)

    sp = add("sweep", cmd_sweep, "sensitivity grid over n, p and sigma")
    _add_scenario(sp)
    _add_pipeline(sp)
    sp.add_argument("--n-values", type=number_list(count(5)), default=(100,))
    sp.add_argument("--p-values", type=number_list(count(2)), default=(1000,))
    sp.add_argument("--sigma-values", type=number_list(nonnegative),
                    default=(2.0,))

    sp = add("validate-laws", cmd_validate_laws,
             "Monte Carlo check of the null laws")
    sp.add_argument("--n", type=count(4), required=True)
    sp.add_argument("--p", type=count(3), required=True)
    sp.add_argument("--reps", type=count(100), default=1000)
    _add_thresholds(sp, delta=1.0)
    sp.add_argument("--compare-p", type=count(0), default=None,
                    help="second dimension for the KS comparison "
                         "(default p // 4, 0 to skip)")
    return parser


def _one_line_warning(message, category, filename, lineno, file=None,
                      line=None):
    print(f"pairsel: warning: {message}", file=sys.stderr)


def main(argv=None):
    """Run the CLI and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"pairsel: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return exc.code or 0
    with warnings.catch_warnings():
        warnings.showwarning = _one_line_warning
        try:
            return args.func(args)
        except (UsageError, DomainError) as exc:
            print(f"pairsel: error: {exc}", file=sys.stderr)
            return 2
        except (PairselError, CsvFormatError, OSError, ValueError,
                KeyError) as exc:
            print(f"pairsel: error: {exc}", file=sys.stderr)
            return 1


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
