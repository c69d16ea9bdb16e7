"""Acceptance checks, one per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line and then
asserts. Run ``pytest -s tests/test_acceptance.py`` to see the lines, or
``python3 tests/test_acceptance.py`` to print all ten without pytest.
All seeds are fixed at 0.
"""

import functools
import os
import sys
import time

import numpy as np
from scipy import stats

sys.path.insert(0, os.path.dirname(__file__))

import _oracles as oracle  # noqa: E402
from pairsel.simulate import (PipelineConfig, example_scenario,  # noqa: E402
                              generate, run_pipeline, run_scenario)
from pairsel.solver import (PenaltySpec, fit_linear, kkt_residual,  # noqa: E402
                            linear_objective)
from pairsel.stats import (DataMatrix, pairwise_r_squared,  # noqa: E402
                           pearson_corr, standardize)
from pairsel.validation import validate_laws  # noqa: E402

SEED = 0
THREADS = int(os.environ.get("PAIRSEL_THREADS", "2"))


def _report(number, ok, detail):
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}", flush=True)
    assert ok, f"criterion {number}: {detail}"


# ---------------------------------------------------------------- laws

def test_criterion_1_extreme_law_calibration():
    start = time.perf_counter()
    rep = validate_laws(10, 200, 1000, seed=SEED, compare_p=50)
    secs = time.perf_counter() - start
    ks, ks50 = rep["w2"]["ks"], rep["w2"]["ks_compare"]
    ok = ks <= 0.10 and ks <= ks50 + 0.02 and secs <= 120
    _report(1, ok, f"KS(p=200)={ks:.4f} <= 0.10, KS(p=50)={ks50:.4f}, "
                   f"{secs:.1f}s <= 120s")


def test_criterion_2_null_beta_laws():
    n, reps = 10, 5000
    rng = np.random.default_rng(SEED)
    rho2 = np.empty(reps)
    r2 = np.empty(reps)
    for i in range(reps):
        x = rng.standard_normal((n, 2))
        y = rng.standard_normal(n)
        rho2[i] = pearson_corr(x[:, 0], x[:, 1]) ** 2
        r2[i] = pairwise_r_squared(DataMatrix(x, y), 0, 1)
    ks_rho = stats.kstest(rho2, stats.beta(0.5, (n - 2) / 2).cdf).statistic
    ks_r2 = stats.kstest(r2, stats.beta(1.0, (n - 3) / 2).cdf).statistic
    ok = ks_rho <= 0.03 and ks_r2 <= 0.03
    _report(2, ok, f"KS rho^2 vs Beta(1/2,4)={ks_rho:.4f}, "
                   f"KS R^2 vs Beta(1,3.5)={ks_r2:.4f} (<= 0.03)")


def test_criterion_3_threshold_calibration():
    start = time.perf_counter()
    rep = validate_laws(100, 200, 1000, seed=SEED, alpha=0.05, compare_p=0)
    secs = time.perf_counter() - start
    w = rep["w2"]["exceedance"]
    s = rep["spearman"]["exceedance"]
    ok = 0.02 <= w <= 0.09 and 0.02 <= s <= 0.10 and secs <= 300
    _report(3, ok, f"W2 exceedance={w:.3f} in [0.02,0.09], Spearman "
                   f"exceedance={s:.3f} in [0.02,0.10], {secs:.1f}s")


def test_criterion_4_r_squared_tail():
    rep = validate_laws(10, 100, 1000, seed=SEED, delta=1.0, compare_p=0)
    f = rep["r_squared"]["tail_frequency"]
    _report(4, f <= 0.05, f"P(max R^2 >= r0)={f:.3f} <= 0.05 "
                          f"(r0={rep['r_squared']['r0']:.4f})")


# ---------------------------------------------------------------- solver

def _instance(seed, n=50, p=20):
    rng = np.random.default_rng(seed)
    cov = 0.5 ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    x = rng.standard_normal((n, p)) @ np.linalg.cholesky(cov).T
    beta = np.zeros(p)
    beta[:5] = (3.0, -2.0, 1.5, 1.0, -1.0)
    return DataMatrix(x, x @ beta + rng.standard_normal(n))


def test_criterion_5_solver_oracles():
    lasso_err = ridge_err = kkt = 0.0
    monotone = True
    for seed in range(20):
        d = _instance(seed)
        z, _, _, yc = oracle.standardize(d.x, d.y)
        zs = standardize(d)
        lam1 = 0.02 + 0.01 * seed
        lam2 = 0.05 * (seed + 1)
        spec1 = PenaltySpec(lam1, 0.0, tuple(range(d.p)), (), ())
        m1 = fit_linear(d, spec1, trace=True)
        lasso_err = max(lasso_err, np.max(np.abs(
            m1.beta - oracle.lasso_prox_grad(z, yc, lam1))))
        spec2 = PenaltySpec(0.0, lam2, (), tuple(range(d.p)), ())
        m2 = fit_linear(d, spec2, trace=True)
        ridge_err = max(ridge_err, np.max(np.abs(
            m2.beta - oracle.ridge_closed_form(z, yc, lam2))))
        l2 = tuple(range(0, d.p, 3))
        spec3 = PenaltySpec.from_sets(d.p, range(d.p), l2, lam1, lam2)
        m3 = fit_linear(d, spec3, trace=True)
        for m, spec in ((m1, spec1), (m2, spec2), (m3, spec3)):
            assert m.converged
            kkt = max(kkt, kkt_residual(zs, spec, m.beta))
            tr = np.asarray(m.trace)
            monotone &= bool(np.all(np.diff(tr) <= 1e-12 * np.abs(tr[:-1])))
            monotone &= abs(tr[-1] - linear_objective(zs, spec, m.beta)) \
                <= 1e-12 * abs(tr[-1])
    ok = lasso_err <= 1e-5 and ridge_err <= 1e-6 and kkt <= 1e-6 and monotone
    _report(5, ok, f"lasso max|d|={lasso_err:.2e}, ridge max|d|="
                   f"{ridge_err:.2e}, KKT={kkt:.2e}, traces monotone={monotone}")


# ---------------------------------------------------------------- simulations

@functools.lru_cache(maxsize=None)
def _table(example, method="pearson", threads=THREADS):
    sc = example_scenario(example, p=1000, sigma=2.0).replace(
        replications=20, seed=SEED)
    start = time.perf_counter()
    rep = run_scenario(sc, PipelineConfig(method=method), threads=threads)
    return rep, time.perf_counter() - start


def test_criterion_6_example1_desk_scale():
    rep, secs = _table(1)
    fn, fp, mse = rep.mean("fn"), rep.mean("fp"), rep.mean("mse")
    ok = (not rep.failures and fn <= 0.1 and fp <= 1.0 and 4.2 <= mse <= 5.4
          and secs <= 600)
    _report(6, ok, f"FN={fn:.2f} <= 0.1, FP={fp:.2f} <= 1.0, "
                   f"MSE={mse:.3f} in [4.2,5.4], {secs:.0f}s")


def test_criterion_7_example2_beats_lasso():
    pcs, _ = _table(2)
    lasso, _ = _table(2, "lasso")
    a, b = pcs.mean("mse"), lasso.mean("mse")
    _report(7, not pcs.failures and not lasso.failures and a < b,
            f"PCS MSE={a:.3f} < LASSO MSE={b:.3f}")


def test_criterion_8_degenerate_pipelines():
    sc = example_scenario(1, p=1000, sigma=2.0).replace(seed=SEED)
    train, val, _ = generate(sc, 0)
    z, _, _, yc = oracle.standardize(train.x, train.y)

    sets, res = run_pipeline(train, val, PipelineConfig(pairs="none", tol=1e-12))
    m = list(sets.m)
    ref = np.zeros(train.p)
    ref[m] = oracle.lasso_prox_grad(z[:, m], yc, res.lambda1)
    lasso_err = np.max(np.abs(res.model.beta - ref))

    sets, res = run_pipeline(train, val, PipelineConfig(pairs="all", tol=1e-12))
    m = list(sets.m)
    ref = np.zeros(train.p)
    ref[m] = oracle.ridge_closed_form(z[:, m], yc, res.lambda2)
    ridge_err = np.max(np.abs(res.model.beta - ref))
    ok = lasso_err <= 1e-8 and ridge_err <= 1e-8 and set(sets.c) == set(m)
    _report(8, ok, f"g=empty vs SIS-LASSO max|d|={lasso_err:.2e}, "
                   f"g=all vs SIS-Ridge max|d|={ridge_err:.2e} (<= 1e-8)")


def test_criterion_9_example4_logistic():
    sc = example_scenario(4, p=1000).replace(replications=20, seed=SEED)
    start = time.perf_counter()
    rep = run_scenario(sc, PipelineConfig(), threads=THREADS)
    secs = time.perf_counter() - start
    err = rep.mean("classification_error")
    _report(9, not rep.failures and err <= 0.15,
            f"classification error={err:.4f} <= 0.15, {secs:.0f}s")


def test_criterion_10_determinism():
    same = True
    for example, method in ((1, "pearson"), (2, "pearson"), (2, "lasso")):
        first, _ = _table(example, method)
        again, _ = _table(example, method, threads=1 if THREADS > 1 else 2)
        same &= first.to_json() == again.to_json()
    _report(10, same, "repeated Example 1/2 reports byte-identical "
                      "(different worker counts)")


if __name__ == "__main__":
    failed = 0
    tests = [(int(name.split("_")[2]), func) for name, func in globals().items()
             if name.startswith("test_criterion_")]
    for _, func in sorted(tests):
        try:
            func()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
