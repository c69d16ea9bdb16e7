"""
Extreme-value thresholds for correlation screening
==================================================

The squared coherence W2 (largest squared off-diagonal sample correlation)
of an independent Gaussian design, shifted by a and scaled by b, has a
known limit. Its quantiles give the pair-screening threshold t*.
"""

import numpy as np
import pairsel as ps

# normalizing constants and thresholds for a typical desk-scale problem
k = ps.normalizing_constants(100, 1000)
print("a = %.6f  b = %.6f  c = %.6f" % (k.a, k.b, k.c))

th = ps.law_thresholds(alpha=0.05, delta=0.1, n=100, p=1000)
print("t* = %.6f  s* = %.6f  r0 = %.6f" % (th.t_star, th.s_star, th.r0))

# the limit law is a proper CDF with an upper endpoint at (n-2)/2
xs = np.linspace(-5, 4, 7)
print(np.round(ps.limiting_cdf_w2(xs, 10), 4))

# simulate null maxima and compare with the limit
rep = ps.validate_laws(n=10, p=200, replicates=200, seed=0)
print("KS distance at p=200:", round(rep["w2"]["ks"], 4))
print("KS distance at p=%d:" % rep["w2"]["compare_p"],
      round(rep["w2"]["ks_compare"], 4))
print("null exceedance of t*:", rep["w2"]["exceedance"])
