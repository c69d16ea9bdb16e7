"""
Mixed l1/l2 penalized fits
==========================

Covariates in C get a ridge penalty, the rest of M a lasso penalty, and
everything outside M is fixed at zero. The two tuning parameters are picked
on a validation set.
"""

import numpy as np
import pairsel as ps

rng = np.random.default_rng(2)


def draw(n):
    x = rng.standard_normal((n, 200))
    x[:, 1] = x[:, 0] + 0.3 * rng.standard_normal(n)
    y = 2 * x[:, 0] + 2 * x[:, 1] - 1.5 * x[:, 5] + rng.standard_normal(n)
    return ps.DataMatrix(x, y)


train, val = draw(100), draw(100)
sets = ps.screen(train)

# a single fit at fixed penalties
spec = ps.PenaltySpec.from_sets(train.p, sets.m, sets.c, lambda1=0.1, lambda2=1.0)
model = ps.fit(train, spec)
print("active set:", model.active_set, "converged:", model.converged)
print("KKT residual:", ps.kkt_residual(ps.standardize(train), spec, model.beta))

# tuning over the default grids
res = ps.tune(train, sets, ps.TuningPlan(), val)
print("lambda1 = %.4g, lambda2 = %.4g" % (res.lambda1, res.lambda2))
print("nonzero:", {j: round(float(res.model.beta_original[j]), 3)
                   for j in res.model.active_set})
print("validation MSE:", np.mean((val.y - ps.predict(res.model, val.x)) ** 2))

# a logistic fit on a binary response
yb = (train.y > 0).astype(float)
logit = ps.fit(ps.DataMatrix(train.x, yb), spec.with_lambdas(0.02), family="binomial")
print("training accuracy:", np.mean(ps.classify(logit, train.x) == yb))
