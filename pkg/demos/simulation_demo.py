"""
Simulation studies
==================

Replicate one of the five built-in scenarios and aggregate FN, FP, the l2
error and test MSE (or classification error). Reports are deterministic
for a given seed, whatever the number of worker processes.
"""

import pairsel as ps

sc = ps.example_scenario(1, p=200).replace(replications=5, seed=0)
pcs = ps.run_scenario(sc)
lasso = ps.run_scenario(sc, ps.PipelineConfig(method="lasso"))

for name, rep in (("PCS", pcs), ("LASSO", lasso)):
    print("%-6s MSE %.3f  FN %.2f  FP %.2f" % (
        name, rep.mean("mse"), rep.mean("fn"), rep.mean("fp")))

# the long-format CSV is ready for plotting
print(pcs.to_csv().splitlines()[:4])

# a small sensitivity sweep over the training size
for cell in ps.sensitivity_sweep(sc.replace(replications=2), [60, 120], [200], [2.0]):
    print(cell["n"], round(cell["report"].mean("mse"), 3))
