"""
Marginal and pairwise screening
===============================

SIS keeps the floor(n / log n) covariates most correlated with y. Among
those, a pair is kept when the two covariates are strongly correlated with
each other *and* jointly explain enough of y.
"""

import numpy as np
import pairsel as ps

rng = np.random.default_rng(1)
n, p = 100, 300
x = rng.standard_normal((n, p))
x[:, 1] = x[:, 0] + 0.3 * rng.standard_normal(n)   # a correlated, relevant pair
x[:, 9] = x[:, 8] + 0.3 * rng.standard_normal(n)   # a correlated, irrelevant pair
y = 2 * x[:, 0] + 2 * x[:, 1] - 1.5 * x[:, 5] + rng.standard_normal(n)
d = ps.DataMatrix(x, y)

sets = ps.screen(d)
print("|M| =", len(sets.m))
print("pairs G:", sets.g)
print("paired covariates C:", sets.c)

# Spearman screening uses rank correlations and its own threshold
print("spearman pairs:", ps.screen(d, method="spearman").g)

# without the R^2 condition (the GLM variant) correlated noise pairs can pass
th = sets.thresholds
print("glm pairs among columns 0..9:", ps.glm_pair_screen(d, range(10), th))
