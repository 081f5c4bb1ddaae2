"""How the segment model actually prices freight.

The schedule is a three-step table (1000 / 1500 / 2200 by weight band),
encoded with segment flags q and convex weights z.  Because the model
constrains sum(z) <= 1 rather than == 1, an optimal plan may scale a
segment down, so the effective charge is the cheapest scaled segment:
for this schedule that is the top rate 2200/70000 per weight unit, a
straight line through the origin.  A plan charged off the step table
would pay the full step; the gap below is what the relaxation saves.
The convex schedule at the end shows genuine interpolation (12.5, not a
scaled endpoint) once per-unit costs increase with weight.
"""
import numpy as np

from riskshed.mssop import BREAKPOINT_WEIGHT, FREIGHT_COST
from riskshed.oracle import freight_interpolation


def step_table(w):
    # charge of the smallest band covering w outright
    if w <= 0:
        return 0.0
    for hi, cost in ((17500.0, 1000.0), (35000.0, 1500.0), (70000.0, 2200.0)):
        if w <= hi:
            return cost
    return float("inf")


print(f"{'weight':>8} {'step table':>11} {'model charge':>13} {'saved':>9}")
for w in (1000.0, 8750.0, 17500.0, 20000.0, 35000.0, 52500.0, 70000.0):
    env = freight_interpolation(w, BREAKPOINT_WEIGHT, FREIGHT_COST)
    assert abs(env - 2200.0 * w / 70000.0) < 1e-9
    print(f"{w:>8.0f} {step_table(w):>11.0f} {env:>13.2f} "
          f"{step_table(w) - env:>9.2f}")

m = (0.0, 10.0, 20.0)
f = (0.0, 5.0, 20.0)
print("\nconvex schedule m=(0,10,20), f=(0,5,20):")
for w in np.arange(2.5, 21.0, 2.5):
    print(f"  weight {w:>5.1f} -> {freight_interpolation(w, m, f):7.3f}")
print("at weight 15 the charge 12.5 interpolates the (10,5)-(20,20) pair;")
print("scaling the top segment alone would cost 15.0")
