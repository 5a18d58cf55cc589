"""SAF and plain amplitude flow from the same starting points.

Both solvers share the measurement matrix and the initial estimate of each
trial. With few measurements the initial estimate is rough; the smooth loss
still finds its way to the signal while the non-smooth one tends to stall.
"""
from safpr import experiments as ex

for ratio in (2.0, 3.0, 6.0):
    spec = ex.ExperimentSpec(kind=ex.SUCCESS_SWEEP, n=100, ratios=(ratio,), trials=10,
                             algorithms=("saf", "af"), seed=4)
    rows = ex.run_success_sweep(spec)
    rates = ex.summarize_success(rows)
    its = {a: sorted(r.iterations for r in rows if r.algorithm == a) for a in ("saf", "af")}
    print(f"m/n = {ratio}:  SAF {rates[('saf', ratio)]:.0%} (median {its['saf'][5]} it)   "
          f"AF {rates[('af', ratio)]:.0%} (median {its['af'][5]} it)")
