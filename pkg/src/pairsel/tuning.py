"""Selection of (lambda1, lambda2) by a held-out set or k-fold CV.

Screening sets are fixed before tuning; the folds only refit the penalized
model. ``TuningPlan(strict=True)`` re-runs the screen inside every fold
for leakage studies.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import TuningError
from .io import csv_text
from .screening import screen
from .solver import (DEFAULT_LAMBDA2_GRID, PenaltySpec, fit_path, lambda1_grid,
                     lambda1_max, predict)
from .stats import standardize

METRICS = ("mse", "deviance", "classification_error")


@dataclass(frozen=True)
class TuningPlan:
    """How to score the (lambda1, lambda2) grid.

    ``lambda1_grid=None`` builds 50 log-spaced values from lambda1_max down
    to 1e-3 * lambda1_max on the training data. ``metric=None`` means mse for
    gaussian fits and deviance for binomial fits.
    """

    strategy: str = "validation_set"
    k: int = 5
    lambda1_grid: tuple = None
    lambda2_grid: tuple = DEFAULT_LAMBDA2_GRID
    metric: str = None
    seed: int = 0
    n_lambda: int = 50
    min_ratio: float = 1e-3
    strict: bool = False

    def __post_init__(self):
        if self.strategy not in ("validation_set", "kfold"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "kfold" and self.k < 2:
            raise ValueError("kfold needs k >= 2")
        if self.metric is not None and self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.lambda1_grid is not None and len(self.lambda1_grid) == 0:
            raise ValueError("lambda1 grid is empty")
        if len(self.lambda2_grid) == 0:
            raise ValueError("lambda2 grid is empty")


@dataclass(frozen=True)
class TuningResult:
    lambda1: float
    lambda2: float
    model: object
    scores: list = field(repr=False)

    def scores_csv(self):
        rows = [(r["lambda1"], r["lambda2"], r["fold"], r["metric_value"])
                for r in self.scores]
        return csv_text(["lambda1", "lambda2", "fold", "metric_value"], rows)


def score(metric, model, d):
    """Held-out loss of ``model`` on DataMatrix ``d``."""
    mu = predict(model, d.x)
    if metric == "mse":
        return float(np.mean((d.y - mu) ** 2))
    if metric == "classification_error":
        return float(np.mean((mu >= 0.5).astype(float) != d.y))
    if metric == "deviance":
        eta = model.intercept + d.x @ model.beta_original
        return float(2.0 * np.mean(np.logaddexp(0.0, eta) - d.y * eta))
    raise ValueError(f"unknown metric {metric!r}")


def fold_ids(n, k, seed):
    """Balanced fold labels 0..k-1 that depend only on (n, k, seed)."""
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    ids = np.empty(n, dtype=int)
    ids[perm] = np.arange(n) % k
    return ids


def _grids(plan, z, spec, family):
    if plan.lambda1_grid is not None:
        l1 = np.sort(np.asarray(plan.lambda1_grid, float))[::-1]
    else:
        l1 = lambda1_grid(lambda1_max(z, spec, family), plan.n_lambda,
                          plan.min_ratio)
    l2 = np.sort(np.asarray(plan.lambda2_grid, float))
    # a weight with nothing to act on only duplicates fits
    if not spec.l1_set:
        l1 = np.array([0.0])
    if not spec.l2_set:
        l2 = l2[-1:]
    return l1, l2


def _path_scores(train, held_out, spec, l1, l2, family, metric, fit_options,
                 fold):
    z = standardize(train)
    rows, models = [], {}
    for lam2 in l2:
        path = fit_path(z, spec.with_lambdas(lambda2=lam2), l1, family,
                        **fit_options)
        for lam1, model in zip(l1, path):
            # non-converged fits are kept in the table but never win
            value = score(metric, model, held_out) if model.converged \
                else None
            rows.append({"lambda1": float(lam1), "lambda2": float(lam2),
                         "fold": fold, "metric_value": value})
            models[(float(lam1), float(lam2))] = model
    return rows, models


def _winner(table):
    """Lowest score; ties go to larger lambda1, then larger lambda2."""
    finite = [t for t in table if t[2] is not None]
    if not finite:
        return None
    return min(finite, key=lambda t: (t[2], -t[0], -t[1]))


def tune(train, sets, plan=None, validation=None, family="gaussian",
         fit_options=None, screen_options=None):
    """Grid-search the penalty weights and refit at the winner.

    Parameters
    ----------
    train : DataMatrix
    sets : ScreenSets
        Fixed screening result defining the penalty partition.
    plan : TuningPlan
    validation : DataMatrix, optional
        Required for ``strategy="validation_set"``.
    family : {"gaussian", "binomial"}
    fit_options : dict, optional
        Passed to the solver (tolerances, sweep caps).
    screen_options : dict, optional
        Arguments of ``screening.screen`` for strict (per-fold) screening.

    Returns
    -------
    TuningResult
        Winner, model refit on all of ``train`` and the full score table.
        Fold is ``"validation"`` for held-out rows and ``"mean"`` for the
        cross-validated averages the winner is chosen from.
    """
    plan = plan or TuningPlan()
    fit_options = dict(fit_options or {})
    metric = plan.metric or ("mse" if family == "gaussian" else "deviance")
    spec = PenaltySpec.from_sets(train.p, sets.m, sets.c)
    z = standardize(train)
    l1, l2 = _grids(plan, z, spec, family)

    if plan.strategy == "validation_set":
        if validation is None:
            raise ValueError("validation_set tuning needs validation data")
        rows, models = _path_scores(train, validation, spec, l1, l2, family,
                                    metric, fit_options, "validation")
        table = [(r["lambda1"], r["lambda2"], r["metric_value"]) for r in rows]
        best = _winner(table)
        if best is None:
            raise TuningError("no grid point converged", rows)
        return TuningResult(best[0], best[1], models[best[:2]], rows)

    ids = fold_ids(train.n, plan.k, plan.seed)
    rows = []
    totals = {}
    for f in range(plan.k):
        fit_rows = np.flatnonzero(ids != f)
        fold_train = train.subset(fit_rows)
        fold_spec = spec
        if plan.strict:
            opts = dict(screen_options or {})
            opts.setdefault("mode", sets.mode)
            opts.setdefault("method", sets.method)
            s = screen(fold_train, **opts)
            fold_spec = PenaltySpec.from_sets(train.p, s.m, s.c)
        fr, _ = _path_scores(fold_train, train.subset(np.flatnonzero(ids == f)),
                             fold_spec, l1, l2, family, metric, fit_options, f)
        rows.extend(fr)
        for r in fr:
            totals.setdefault((r["lambda1"], r["lambda2"]), []).append(
                r["metric_value"])
    table = [(a, b, None if None in v else float(np.mean(v)))
             for (a, b), v in totals.items()]
    rows.extend({"lambda1": a, "lambda2": b, "fold": "mean", "metric_value": v}
                for a, b, v in table)
    best = _winner(table)
    if best is None:
        raise TuningError("no grid point converged", rows)
    keep = l1[l1 >= best[0]]
    model = fit_path(z, spec.with_lambdas(lambda2=best[1]), keep, family,
                     **fit_options)[-1]
    return TuningResult(best[0], best[1], model, rows)
