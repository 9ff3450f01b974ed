"""
Effort, forgiveness and the worker's dynamic problem
====================================================

In the permanent labor market a worker is kept on only while their record of
good outcomes stays within a forgiveness margin Delta of the high-effort
success rate. The margin shrinks with tenure, slightly slower than the law
of the iterated logarithm, so honest workers are rarely dismissed by bad luck.
"""

import numpy as np

from duallabor.contracts import (
    ReputationState,
    delta_reaches,
    delta_schedule,
    effort_cutoffs,
    one_shot_effort,
    solve_dp,
)
from duallabor.market import ModelParams, default_forms, lil_bound

p = ModelParams()
forms = default_forms(p)

# Ability cutoffs above which the one-period effort premium pays for itself.
for w in (0.4, 0.7, 1.0):
    th_Q, th_U = effort_cutoffs(w, p, forms)
    print(f"w={w:.1f}: high effort if theta >= {th_Q:.3f} (qualified), {th_U:.3f} (unqualified)")

# %%
# The forgiveness schedule against the iterated-logarithm envelope.
t = np.array([10, 50, 100, 1000, 10_000])
for ti, d in zip(t, delta_schedule(t, p.c_delta)):
    print(f"t'={ti:>6}  Delta={d:.4f}  LIL bound={lil_bound(ti):.4f}")
print("Delta falls below 1% after", delta_reaches(0.01, p.c_delta), "periods")

# %%
# Backward induction for one worker. The table holds values and optimal
# effort for every (length, successes) record.
table = solve_dp(0.6, "Q", 1.0, p, forms)
print("value at a fresh record:", table.at(ReputationState()))
print("one-shot rule says:", one_shot_effort(0.6, "Q", 1.0, p, forms),
      "| DP at the fresh record says:", "H" if table.policy(ReputationState()) else "L")

# Near the end of the horizon the future is worth little and effort stops.
last = [int(table.effort[n, n]) for n in range(p.horizon_N - 5, p.horizon_N)]
print("effort on an all-success record, last five periods:", last)
