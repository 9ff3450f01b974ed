"""
Group reputations over time
===========================

Each period, group outcomes feed a time-lagged reputation, reputations set
the cost of investing, and investment sets next period's qualified share.
Under parity hiring the gap between the groups shrinks every period until
both settle at the same steady state.
"""

from duallabor.dynamics import initial_state, simulate
from duallabor.hiring import PARITY, HiringRegime
from duallabor.market import ModelParams, default_forms

p = ModelParams()
forms = default_forms(p)
regime = HiringRegime(PARITY)

ms = initial_state(p, forms, pi_B=0.05, pi_W=0.9)
_, traj = simulate(ms, p, regime, forms, steps=80)

for r in traj.records[::10]:
    print(f"t={r.t:>3}  pi_B={r.pi_B:.4f} pi_W={r.pi_W:.4f}  g_B={r.g_B:.4f} g_W={r.g_W:.4f}"
          f"  w={r.w:.4f}  eps={r.eps_B:.3f}")

# %%
# The contraction factor eps bounds how much a gap in qualified shares
# survives into a gap in outcomes.
gaps = [abs(r.g_B - r.g_W) for r in traj.records]
print("outcome gap at t=0, 20, 40, 79:", [f"{gaps[i]:.2e}" for i in (0, 20, 40, 79)])

# Trajectories export to CSV for plotting elsewhere.
traj.to_csv("reputation_dynamics.csv")
