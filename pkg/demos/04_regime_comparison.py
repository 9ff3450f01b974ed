"""
Steady states and who gains from parity
=======================================

Starting from unequal reputations, parity hiring converges to a symmetric
steady state. A group-blind firm, given concentrated abilities and strong
reputational feedback, locks the initial gap in. Comparing steady states
tells us whether parity makes group B better off without hurting group W.
"""

from dataclasses import replace
from pathlib import Path

from duallabor import scenario
from duallabor.dynamics import initial_state
from duallabor.equilibrium import compare_regimes, contraction_diagnostics, obsolescence_check
from duallabor.hiring import BLIND, STATDISC

scn = scenario.load(Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "asym.cfg")
ms = initial_state(scn.params, scn.forms, *scn.pi0)
others = [replace(scn.regime, tag=BLIND), replace(scn.regime, tag=STATDISC)]
parity, results = compare_regimes(ms, scn.params, scn.forms, others)

print(f"parity: T={parity.T_convergence} pi={parity.pi_tilde} symmetric={parity.symmetric}")
for tag, (rep, verdict) in results.items():
    print(f"{tag}: pi={rep.pi_tilde}  dominated by parity={verdict.dominates}"
          f"  B better off mass={verdict.groupB_better_off_mass:.3f}"
          f"  W worse off mass={verdict.groupW_worse_off_mass:.3f}")

# %%
# Why the blind rule keeps the gap: a small reputation gap is amplified
# (gap gain > 1) instead of damped.
for tag in ("parity", BLIND):
    d = contraction_diagnostics(scn.params, replace(scn.regime, tag=tag), scn.forms, parity.w_tilde)
    print(f"{tag}: eps={d.eps_closed_form:.3f}  gap gain={d.gap_gain:.3f}  contractive={d.contractive}")

# %%
# Once parity has equalised reputations, dropping the constraint changes
# nothing: the blind thresholds coincide with the parity ones.
par_ts, blind_ts = obsolescence_check(parity, scn.params, scn.forms)
print("parity thresholds:", par_ts.as_tuple())
print("blind thresholds: ", blind_ts.as_tuple())
