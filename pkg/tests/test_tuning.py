import numpy as np
import pytest

from pairsel.exceptions import TuningError
from pairsel.laws import law_thresholds
from pairsel.screening import ScreenSets
from pairsel.stats import DataMatrix
from pairsel.tuning import TuningPlan, fold_ids, score, tune


def _sets(p, g=()):
    base = ScreenSets(tuple(range(p)), (), (), law_thresholds(0.05, 0.1, 50, p))
    return base.replace_pairs(g)


def _data(seed, n=50, p=10, signal=True):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    y = (2 * x[:, 0] - x[:, 1] if signal else 0) + rng.standard_normal(n)
    return DataMatrix(x, y)


def test_fold_ids_balanced_and_deterministic():
    ids = fold_ids(23, 5, seed=4)
    counts = np.bincount(ids)
    assert counts.max() - counts.min() <= 1 and counts.sum() == 23
    assert np.array_equal(ids, fold_ids(23, 5, seed=4))
    assert not np.array_equal(ids, fold_ids(23, 5, seed=5))
    with pytest.raises(ValueError):
        fold_ids(4, 5, 0)


def test_plan_validation():
    with pytest.raises(ValueError):
        TuningPlan(strategy="bootstrap")
    with pytest.raises(ValueError):
        TuningPlan(strategy="kfold", k=1)
    with pytest.raises(ValueError):
        TuningPlan(metric="auc")
    with pytest.raises(ValueError):
        TuningPlan(lambda1_grid=())


def test_single_point_grid_returns_it():
    tr, va = _data(0), _data(1)
    plan = TuningPlan(lambda1_grid=(0.1,), lambda2_grid=(1.0,))
    res = tune(tr, _sets(10, g=[(0, 1)]), plan, va)
    assert (res.lambda1, res.lambda2) == (0.1, 1.0)
    assert res.model.penalty.lambda1 == 0.1
    assert len(res.scores) == 1


def test_winner_is_minimum_of_table():
    tr, va = _data(2), _data(3)
    res = tune(tr, _sets(10, g=[(0, 1)]), TuningPlan(), va)
    best = min(r["metric_value"] for r in res.scores)
    assert score("mse", res.model, va) == pytest.approx(best, rel=1e-12)


def test_ties_prefer_sparser_model():
    tr, va = _data(4), _data(5)
    # every l1 coordinate is zero above lambda1_max: identical scores
    plan = TuningPlan(lambda1_grid=(50.0, 20.0, 10.0), lambda2_grid=(1.0,))
    res = tune(tr, _sets(10), plan, va)
    assert res.lambda1 == 50.0


def test_pure_noise_selects_heavy_shrinkage():
    # winning lambda1 in the top decile of the grid for >= 80% of 50 seeds
    hits = 0
    for seed in range(50):
        tr, va = _data(100 + seed, signal=False), _data(200 + seed, signal=False)
        res = tune(tr, _sets(10), TuningPlan(), va)
        grid = sorted({r["lambda1"] for r in res.scores}, reverse=True)
        hits += grid.index(res.lambda1) < len(grid) / 10
    assert hits >= 40


def test_kfold_runs_and_reports_means():
    tr = _data(6, n=60)
    plan = TuningPlan(strategy="kfold", k=4, seed=1, n_lambda=10)
    res = tune(tr, _sets(10, g=[(0, 1)]), plan)
    folds = {r["fold"] for r in res.scores}
    assert folds == {0, 1, 2, 3, "mean"}
    mean_rows = [r for r in res.scores if r["fold"] == "mean"]
    assert len(mean_rows) == 10 * 4
    again = tune(tr, _sets(10, g=[(0, 1)]), plan)
    assert again.scores == res.scores


def test_kfold_strict_rescreens():
    tr = _data(7, n=60)
    plan = TuningPlan(strategy="kfold", k=3, strict=True, n_lambda=5)
    res = tune(tr, _sets(10, g=[(0, 1)]), plan, screen_options={"k": 5})
    assert res.model is not None


def test_validation_strategy_needs_data():
    with pytest.raises(ValueError):
        tune(_data(0), _sets(10), TuningPlan())


def test_all_nonconverged_raises_with_table():
    tr, va = _data(8), _data(9)
    with pytest.warns(Warning):
        with pytest.raises(TuningError) as err:
            tune(tr, _sets(10), TuningPlan(lambda1_grid=(0.01, 0.005, 0.001)),
                 va,
                 fit_options={"max_sweeps": 1, "tol": 1e-15})
    assert len(err.value.scores) == 3


def test_scores_csv_has_header():
    tr, va = _data(10), _data(11)
    res = tune(tr, _sets(10), TuningPlan(n_lambda=3), va)
    lines = res.scores_csv().splitlines()
    assert lines[0] == "lambda1,lambda2,fold,metric_value"
    assert len(lines) == 4


def test_binomial_default_metric_is_deviance():
    rng = np.random.default_rng(12)
    x = rng.standard_normal((80, 6))
    y = (x[:, 0] + 0.5 * rng.standard_normal(80) > 0).astype(float)
    x2 = rng.standard_normal((80, 6))
    y2 = (x2[:, 0] + 0.5 * rng.standard_normal(80) > 0).astype(float)
    res = tune(DataMatrix(x, y), _sets(6), TuningPlan(n_lambda=8),
               DataMatrix(x2, y2), family="binomial")
    eta = res.model.intercept + x2 @ res.model.beta_original
    dev = 2 * np.mean(np.logaddexp(0, eta) - y2 * eta)
    assert min(r["metric_value"] for r in res.scores
               if r["metric_value"] is not None) == pytest.approx(dev, rel=1e-12)
