"""Seeded data generators for the five simulated examples, evaluation
metrics, the replication engine and the sensitivity sweep.

Every replication draws from its own PCG64 stream seeded by
``SeedSequence([seed, replication_index])``, so a report is a pure function
of (scenario, pipeline, seed) no matter how replications are scheduled.
"""

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit

from .io import SCHEMA_VERSION, csv_text, dumps
from .laws import law_thresholds
from .screening import ScreenSets, default_subset_size, screen
from .solver import DEFAULT_LAMBDA2_GRID
from .stats import DataMatrix
from .tuning import TuningPlan, tune

GENERATOR = f"numpy.random.PCG64 via SeedSequence([seed, replication]); numpy {np.__version__}"


# ---------------------------------------------------------------- covariance

def covariance_matrix(cov, p):
    """Dense p x p covariance for a covariance description dict."""
    kind = cov["kind"]
    if kind == "identity":
        return np.eye(p)
    if kind == "ar1":
        idx = np.arange(p)
        return cov["rho"] ** np.abs(idx[:, None] - idx[None, :])
    if kind == "block":
        s = np.eye(p)
        for group in cov["groups"]:
            g = [j for j in group if j < p]
            s[np.ix_(g, g)] = cov["rho"]
            s[g, g] = 1.0
        return s
    raise ValueError(f"unknown covariance kind {kind!r}")


def _cholesky(sigma, what):
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise ValueError(f"covariance {what} is not positive definite") from None


def correlated_normals(rng, n, p, cov):
    """n rows of N(0, Sigma) as L @ e with Sigma = L L' (Cholesky).

    The factor is applied blockwise: for block covariances only the
    groups carry a nontrivial factor, and for AR(1) the factor is the
    bidiagonal recursion x_j = rho x_{j-1} + sqrt(1 - rho^2) e_j.
    """
    e = rng.standard_normal((n, p))
    kind = cov["kind"]
    if kind == "identity":
        return e
    if kind == "block":
        for group in cov["groups"]:
            g = [j for j in group if j < p]
            sub = covariance_matrix({"kind": "block", "rho": cov["rho"],
                                     "groups": [list(range(len(g)))]}, len(g))
            L = _cholesky(sub, f"block(rho={cov['rho']}, size={len(g)})")
            e[:, g] = e[:, g] @ L.T
        return e
    if kind == "ar1":
        rho = cov["rho"]
        if not -1.0 < rho < 1.0:
            raise ValueError(f"covariance ar1(rho={rho}) is not positive definite")
        s = np.sqrt(1.0 - rho**2)
        e[:, 0] /= s
        return lfilter([s], [1.0, -rho], e, axis=1)
    raise ValueError(f"unknown covariance kind {kind!r}")


# ---------------------------------------------------------------- scenarios

@dataclass(frozen=True)
class SimScenario:
    """One simulated design: sizes, truth, covariance and noise."""

    example_id: int
    p: int
    sigma: float
    beta0: tuple
    covariance: dict
    covariate_law: str = "gaussian"
    df: float = 5.0
    response_law: str = "linear"
    n_train: int = 100
    n_val: int = 100
    n_test: int = 400
    replications: int = 20
    seed: int = 0

    @property
    def family(self):
        return "binomial" if self.response_law == "logistic" else "gaussian"

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["beta0"] = [float(v) for v in self.beta0]
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "beta0" not in data:
            base = example_scenario(data["example_id"], p=data["p"])
            data["beta0"] = base.beta0
            data.setdefault("covariance", base.covariance)
            data.setdefault("covariate_law", base.covariate_law)
            data.setdefault("response_law", base.response_law)
            data.setdefault("sigma", base.sigma)
        data["beta0"] = tuple(float(v) for v in data["beta0"])
        return cls(**data)

    def replace(self, **changes):
        """Copy with changes; a new ``p`` resizes beta0 (zeros appended)."""
        p = changes.get("p", self.p)
        if "beta0" not in changes and p != self.p:
            b = np.zeros(p)
            k = min(p, self.p)
            b[:k] = self.beta0[:k]
            changes["beta0"] = tuple(float(v) for v in b)
        return dataclasses.replace(self, **changes)


_BLOCK_TWO = {"kind": "block", "rho": 0.8,
              "groups": [list(range(0, 5)), list(range(5, 10))]}
_BLOCK_ONE = {"kind": "block", "rho": 0.8, "groups": [list(range(0, 5))]}


def example_scenario(example_id, p=1000, sigma=None, **overrides):
    """Scenario for one of the five simulated examples.

    1: two blocks of five with correlation 0.8, beta = 2 on the first ten.
    2: AR(1) correlation 0.5^|i-j|, beta = (3, -1.5, 2, 0, ...).
    3: one block of five, beta as in 1.
    4: covariates as in 1, logistic response with success probability
       expit(x'beta + sigma).
    5: as in 1 with multivariate t(5) covariates.

    ``sigma`` defaults to 2 for examples 1-2 and 6 for 3-5.
    """
    if example_id not in (1, 2, 3, 4, 5):
        raise ValueError(f"example_id must be 1..5, got {example_id}")
    beta = np.zeros(p)
    if example_id == 2:
        beta[:3] = (3.0, -1.5, 2.0)
        cov = {"kind": "ar1", "rho": 0.5}
    else:
        beta[:10] = 2.0
        cov = _BLOCK_ONE if example_id == 3 else _BLOCK_TWO
    if sigma is None:
        sigma = 2.0 if example_id in (1, 2) else 6.0
    return SimScenario(
        example_id=example_id, p=p, sigma=float(sigma),
        beta0=tuple(float(v) for v in beta), covariance=dict(cov),
        covariate_law="student_t" if example_id == 5 else "gaussian",
        response_law="logistic" if example_id == 4 else "linear",
        **overrides)


def _draw(rng, scenario, n):
    x = correlated_normals(rng, n, scenario.p, scenario.covariance)
    if scenario.covariate_law == "student_t":
        w = rng.chisquare(scenario.df, size=n)
        x = x / np.sqrt(w / scenario.df)[:, None]
    elif scenario.covariate_law != "gaussian":
        raise ValueError(f"unknown covariate law {scenario.covariate_law!r}")
    eta = x @ np.asarray(scenario.beta0)
    if scenario.response_law == "linear":
        y = eta + scenario.sigma * rng.standard_normal(n)
    elif scenario.response_law == "logistic":
        y = (rng.random(n) < expit(eta + scenario.sigma)).astype(float)
    else:
        raise ValueError(f"unknown response law {scenario.response_law!r}")
    return DataMatrix(x, y)


def replication_rng(seed, replication_index):
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(seed), int(replication_index)])))


def generate(scenario, replication_index):
    """(train, validation, test) DataMatrix triple for one replication."""
    rng = replication_rng(scenario.seed, replication_index)
    return (_draw(rng, scenario, scenario.n_train),
            _draw(rng, scenario, scenario.n_val),
            _draw(rng, scenario, scenario.n_test))


# ---------------------------------------------------------------- metrics

def evaluate(model, beta0, test):
    """FN, FP, l2 error, model size and test MSE or classification error."""
    beta0 = np.asarray(beta0, float)
    bhat = np.asarray(model.beta_original, float)
    if bhat.shape != beta0.shape:
        raise ValueError("fitted and true coefficient vectors differ in length")
    truth = beta0 != 0
    chosen = bhat != 0
    out = {
        "fn": int(np.sum(~chosen & truth)),
        "fp": int(np.sum(chosen & ~truth)),
        "l2_error": float(np.linalg.norm(bhat - beta0)),
        "model_size": int(chosen.sum()),
    }
    eta = model.intercept + test.x @ bhat
    if model.family == "binomial":
        out["classification_error"] = float(
            np.mean((expit(eta) >= 0.5).astype(float) != test.y))
    else:
        out["mse"] = float(np.mean((test.y - eta) ** 2))
    return out


# ---------------------------------------------------------------- pipelines

@dataclass(frozen=True)
class PipelineConfig:
    """End-to-end fitting recipe.

    method : "pearson" or "spearman" screening, or "lasso" for the
        reference lasso on all p covariates (no SIS, no pairs).
    pairs : "screen" uses the pair screen; "none" and "all" force
        g = {} (SIS-lasso) or g = all pairs of M (SIS-ridge).
    threshold_p : "ambient" uses p in the thresholds, "subset" uses |M|.
    """

    method: str = "pearson"
    alpha: float = 0.05
    delta: float = 0.1
    k: int = None
    pairs: str = "screen"
    threshold_p: str = "ambient"
    lambda2_grid: tuple = DEFAULT_LAMBDA2_GRID
    n_lambda: int = 50
    min_ratio: float = 1e-3
    metric: str = None
    tol: float = None

    def __post_init__(self):
        if self.method not in ("pearson", "spearman", "lasso"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.pairs not in ("screen", "none", "all"):
            raise ValueError(f"unknown pairs option {self.pairs!r}")
        if self.threshold_p not in ("ambient", "subset"):
            raise ValueError(f"unknown threshold_p {self.threshold_p!r}")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if "lambda2_grid" in data:
            data["lambda2_grid"] = tuple(data["lambda2_grid"])
        return cls(**data)


def screen_for(train, config, family):
    """Screening sets for one training set under a pipeline config."""
    mode = "glm" if family == "binomial" else "linear"
    if config.method == "lasso":
        return ScreenSets(
            m=tuple(range(train.p)), g=(), c=(),
            thresholds=law_thresholds(config.alpha, config.delta, train.n,
                                      train.p),
            method="pearson", mode=mode)
    method = config.method
    threshold_p = None
    if config.threshold_p == "subset":
        threshold_p = min(config.k or default_subset_size(train.n), train.p)
    sets = screen(train, config.alpha, config.delta, method, mode, k=config.k,
                  threshold_p=threshold_p)
    if config.pairs == "none":
        sets = sets.replace_pairs(())
    elif config.pairs == "all":
        m = sorted(sets.m)
        sets = sets.replace_pairs(
            [(a, b) for i, a in enumerate(m) for b in m[i + 1:]])
    return sets


def run_pipeline(train, validation, config, family="gaussian"):
    """Screen, then tune on the validation set; returns (sets, TuningResult)."""
    sets = screen_for(train, config, family)
    plan = TuningPlan(lambda2_grid=tuple(config.lambda2_grid),
                      n_lambda=config.n_lambda, min_ratio=config.min_ratio,
                      metric=config.metric)
    options = {} if config.tol is None else {"tol": config.tol}
    result = tune(train, sets, plan, validation, family, fit_options=options)
    return sets, result


def run_replication(scenario, config, index):
    """One replication record (metrics plus tuning and screening summary)."""
    train, val, test = generate(scenario, index)
    sets, result = run_pipeline(train, val, config, scenario.family)
    record = {"replication": int(index), "seed": int(scenario.seed)}
    record.update(evaluate(result.model, scenario.beta0, test))
    record.update({
        "lambda1": result.lambda1, "lambda2": result.lambda2,
        "m_size": len(sets.m), "g_size": len(sets.g), "c_size": len(sets.c),
    })
    return record


def _safe_replication(args):
    scenario, config, index = args
    try:
        return run_replication(scenario, config, index)
    except Exception as exc:  # recorded, not fatal
        return {"replication": int(index), "seed": int(scenario.seed),
                "error": f"{type(exc).__name__}: {exc}"}


METRIC_KEYS = ("mse", "classification_error", "l2_error", "fn", "fp",
               "model_size")


@dataclass(frozen=True)
class SimReport:
    scenario: dict
    pipeline: dict
    records: list
    failures: list = field(default_factory=list)

    @property
    def aggregates(self):
        """Mean and standard error (sd / sqrt(reps)) of every metric."""
        out = {}
        for key in METRIC_KEYS:
            vals = np.array([r[key] for r in self.records if key in r], float)
            if vals.size == 0:
                continue
            se = float(vals.std(ddof=1) / np.sqrt(vals.size)) \
                if vals.size > 1 else 0.0
            out[key] = {"mean": float(vals.mean()), "se": se}
        return out

    def mean(self, key):
        return self.aggregates[key]["mean"]

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "sim_report",
            "generator": GENERATOR,
            "scenario": self.scenario,
            "pipeline": self.pipeline,
            "records": self.records,
            "failures": self.failures,
            "failure_count": len(self.failures),
            "aggregates": self.aggregates,
        }

    def to_json(self):
        return dumps(self.to_dict())

    def long_rows(self):
        """One row per replication per metric."""
        rows = []
        for r in self.records:
            for key in METRIC_KEYS:
                if key in r:
                    rows.append((r["replication"], key, float(r[key])))
        return rows

    def to_csv(self):
        return csv_text(["replication", "metric", "value"], self.long_rows())


def run_scenario(scenario, config=None, threads=1):
    """Replicate a scenario and aggregate the metrics.

    ``threads > 1`` spreads replications over worker processes; the report
    is identical to a serial run.
    """
    config = config or PipelineConfig()
    jobs = [(scenario, config, i) for i in range(scenario.replications)]
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_safe_replication, jobs))
    else:
        results = [_safe_replication(job) for job in jobs]
    results.sort(key=lambda r: r["replication"])
    records = [r for r in results if "error" not in r]
    failures = [r for r in results if "error" in r]
    return SimReport(scenario.to_dict(), config.to_dict(), records, failures)


def sensitivity_sweep(base, n_values, p_values, sigma_values, config=None,
                      threads=1):
    """Cartesian sweep over (n, p, sigma); n sets both train and validation
    sizes. Returns a list of dicts with keys n, p, sigma and report."""
    out = []
    for n in n_values:
        for p in p_values:
            for sigma in sigma_values:
                sc = base.replace(n_train=int(n), n_val=int(n), p=int(p),
                                  sigma=float(sigma))
                out.append({"n": int(n), "p": int(p), "sigma": float(sigma),
                            "report": run_scenario(sc, config, threads)})
    return out


def sweep_table(cells):
    """Long-format rows (n, p, sigma, metric, mean, se) for plotting."""
    rows = []
    for cell in cells:
        for key, agg in cell["report"].aggregates.items():
            rows.append((cell["n"], cell["p"], cell["sigma"], key,
                         agg["mean"], agg["se"]))
    return rows


def sweep_csv(cells):
    return csv_text(["n", "p", "sigma", "metric", "mean", "se"],
                    sweep_table(cells))

