import json

import numpy as np
import pytest
from scipy.special import expit

import pairsel.simulate as sim
from pairsel.simulate import (PipelineConfig, SimReport, SimScenario,
                              correlated_normals, covariance_matrix, evaluate,
                              example_scenario, generate, replication_rng,
                              run_scenario, sensitivity_sweep, sweep_table)
from pairsel.solver import FitModel, PenaltySpec


def _model(beta, intercept=0.0, family="gaussian"):
    beta = np.asarray(beta, float)
    p = beta.size
    return FitModel(beta, beta, intercept, tuple(np.flatnonzero(beta)),
                    PenaltySpec(0.0, 0.0, tuple(range(p)), (), ()), 0.0, 1,
                    True, family, np.zeros(p), np.ones(p))


def test_identity_covariance_sample():
    x = correlated_normals(replication_rng(0, 0), 100_000, 3, {"kind": "identity"})
    assert np.max(np.abs(np.cov(x.T) - np.eye(3))) <= 0.02


def test_example1_block_correlations():
    sc = example_scenario(1, p=12)
    x = correlated_normals(replication_rng(1, 0), 100_000, 12, sc.covariance)
    r = np.corrcoef(x.T)
    assert r[0, 1] == pytest.approx(0.8, abs=0.02)
    assert r[6, 9] == pytest.approx(0.8, abs=0.02)
    assert r[0, 5] == pytest.approx(0.0, abs=0.02)
    assert r[0, 11] == pytest.approx(0.0, abs=0.02)


def test_ar1_sample_matches_covariance():
    cov = {"kind": "ar1", "rho": 0.5}
    x = correlated_normals(replication_rng(2, 0), 100_000, 6, cov)
    assert np.max(np.abs(np.cov(x.T) - covariance_matrix(cov, 6))) <= 0.02


def test_non_pd_covariance_names_construction():
    bad = {"kind": "block", "rho": -0.5, "groups": [[0, 1, 2, 3, 4]]}
    with pytest.raises(ValueError, match="block"):
        correlated_normals(replication_rng(0, 0), 5, 6, bad)
    with pytest.raises(ValueError, match="ar1"):
        correlated_normals(replication_rng(0, 0), 5, 6, {"kind": "ar1", "rho": 1.0})


def test_student_t_rows_share_mixing_variable():
    sc = example_scenario(5, p=20).replace(n_train=50_000, n_val=2, n_test=2)
    x = generate(sc, 0)[0].x
    # independent columns 10 and 15 become dependent only through the shared W
    assert np.corrcoef(x[:, 10] ** 2, x[:, 15] ** 2)[0, 1] > 0.1
    assert np.var(x[:, 12]) == pytest.approx(5 / 3, rel=0.1)


def test_example4_response_uses_sigma_shift():
    sc = example_scenario(4, p=12, sigma=1.0).replace(n_train=200_000)
    d = generate(sc, 0)[0]
    eta = d.x @ np.asarray(sc.beta0) + 1.0
    assert d.y.mean() == pytest.approx(expit(eta).mean(), abs=0.005)
    assert set(np.unique(d.y)) == {0.0, 1.0}


def test_generate_is_deterministic_and_stream_separated():
    sc = example_scenario(2, p=30)
    a, b = generate(sc, 3), generate(sc, 3)
    for u, v in zip(a, b):
        assert np.array_equal(u.x, v.x) and np.array_equal(u.y, v.y)
    c = generate(sc, 4)
    assert not np.array_equal(a[0].x, c[0].x)
    assert [d.n for d in a] == [100, 100, 400]


def test_example_definitions():
    e1, e2 = example_scenario(1, p=50), example_scenario(2, p=50)
    assert np.count_nonzero(e1.beta0) == 10 and e1.sigma == 2.0
    assert e2.beta0[:4] == (3.0, -1.5, 2.0, 0.0)
    assert example_scenario(3, p=50).sigma == 6.0
    assert example_scenario(4, p=50).family == "binomial"
    with pytest.raises(ValueError):
        example_scenario(6)


def test_scenario_roundtrip_and_resize():
    sc = example_scenario(1, p=40)
    assert SimScenario.from_dict(json.loads(json.dumps(sc.to_dict()))) == sc
    big = sc.replace(p=60)
    assert len(big.beta0) == 60 and big.beta0[:10] == sc.beta0[:10]


def test_evaluate_indicator_arithmetic():
    test = sim.DataMatrix(np.eye(3), np.zeros(3))
    m = evaluate(_model([1.0, 0.0, 0.5]), [2.0, 2.0, 0.0], test)
    assert (m["fn"], m["fp"], m["model_size"]) == (1, 1, 2)


def test_evaluate_exact_fit_zero_error():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((20, 3))
    beta = np.array([2.0, 0.0, -1.0])
    m = evaluate(_model(beta), beta, sim.DataMatrix(x, x @ beta))
    assert m["mse"] == 0.0 and m["l2_error"] == 0.0 and m["fn"] == m["fp"] == 0


def test_evaluate_against_brute_force_script():
    sc = example_scenario(1, p=40)
    _, _, test = generate(sc, 0)
    rng = np.random.default_rng(5)
    bhat = np.where(rng.random(40) < 0.3, rng.standard_normal(40), 0.0)
    got = evaluate(_model(bhat, intercept=0.3), sc.beta0, test)
    fn = fp = 0
    for j in range(40):
        fn += bhat[j] == 0 and sc.beta0[j] != 0
        fp += bhat[j] != 0 and sc.beta0[j] == 0
    sq = 0.0
    for i in range(test.n):
        sq += (test.y[i] - 0.3 - sum(test.x[i, j] * bhat[j] for j in range(40))) ** 2
    assert (got["fn"], got["fp"]) == (fn, fp)
    assert got["mse"] == pytest.approx(sq / test.n, rel=1e-12)
    tp = got["model_size"] - got["fp"]
    assert got["fn"] + tp == 10


def test_classification_error():
    x = np.array([[1.0], [-1.0], [2.0], [-3.0]])
    y = np.array([1.0, 0.0, 0.0, 0.0])
    m = evaluate(_model([1.0], family="binomial"), [1.0], sim.DataMatrix(x, y))
    assert m["classification_error"] == 0.25


def test_perfect_recovery_limit():
    sc = SimScenario(example_id=0, p=30, sigma=0.0,
                     beta0=tuple([5.0, -4.0, 3.0] + [0.0] * 27),
                     covariance={"kind": "identity"}, replications=3)
    rep = run_scenario(sc, PipelineConfig(method="lasso"))
    assert not rep.failures
    for r in rep.records:
        assert r["fn"] == 0 and r["fp"] == 0


def test_run_scenario_threads_do_not_change_report():
    sc = example_scenario(1, p=60).replace(replications=3, seed=11)
    one = run_scenario(sc, PipelineConfig(), threads=1)
    two = run_scenario(sc, PipelineConfig(), threads=2)
    assert one.to_json() == two.to_json()


def test_report_aggregates_recomputable_and_csv():
    sc = example_scenario(2, p=40).replace(replications=4)
    rep = run_scenario(sc)
    vals = np.array([r["mse"] for r in rep.records])
    agg = rep.aggregates["mse"]
    assert agg["mean"] == pytest.approx(vals.mean(), rel=1e-14)
    assert agg["se"] == pytest.approx(vals.std(ddof=1) / 2, rel=1e-12)
    d = json.loads(rep.to_json())
    assert d["schema_version"] == 1 and d["failure_count"] == 0
    assert d["generator"].startswith("numpy.random.PCG64")
    lines = rep.to_csv().splitlines()
    assert lines[0] == "replication,metric,value"
    assert len(lines) == 1 + 4 * 5
    for r in rep.records:
        assert r["fp"] <= sc.p - 3


def test_failed_replication_is_recorded(monkeypatch):
    real = sim.run_replication

    def flaky(scenario, config, index):
        if index == 1:
            raise RuntimeError("boom")
        return real(scenario, config, index)

    monkeypatch.setattr(sim, "run_replication", flaky)
    rep = run_scenario(example_scenario(1, p=30).replace(replications=3))
    assert len(rep.records) == 2 and len(rep.failures) == 1
    assert "boom" in rep.failures[0]["error"]
    assert rep.to_dict()["failure_count"] == 1


def test_sweep_shape_and_single_cell():
    base = example_scenario(1, p=40).replace(replications=2)
    cells = sensitivity_sweep(base, [60, 80], [30, 40], [2.0])
    assert len(cells) == 4
    assert {(c["n"], c["p"]) for c in cells} == {(60, 30), (60, 40), (80, 30), (80, 40)}
    single = sensitivity_sweep(base, [100], [40], [2.0])[0]["report"]
    assert single.to_json() == run_scenario(base).to_json()
    rows = sweep_table(cells)
    assert rows and all(len(r) == 6 for r in rows)


def test_pipeline_config_validation_and_roundtrip():
    with pytest.raises(ValueError):
        PipelineConfig(method="enet")
    with pytest.raises(ValueError):
        PipelineConfig(pairs="some")
    cfg = PipelineConfig(method="spearman", lambda2_grid=(0.5,))
    assert PipelineConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.slow
def test_larger_sample_lowers_mse():
    base = example_scenario(1, p=500).replace(replications=5)
    cells = sensitivity_sweep(base, [100, 500], [500], [2.0])
    mse = {c["n"]: c["report"].mean("mse") for c in cells}
    assert mse[500] <= mse[100]


def test_report_roundtrip_fields():
    rep = SimReport({"p": 1}, {"method": "pearson"},
                    [{"replication": 0, "mse": 1.0}, {"replication": 1, "mse": 3.0}])
    assert rep.aggregates["mse"]["mean"] == 2.0
    assert rep.long_rows() == [(0, "mse", 1.0), (1, "mse", 3.0)]
