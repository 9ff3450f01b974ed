"""
Investment thresholds under three hiring rules
==============================================

Workers in the temporary labor market decide whether to invest in skills by
comparing their cost with the wage premium. Who gets hired depends on the
hiring rule: parity hires the same share of each group, a group-blind firm
uses one common cutoff, and a statistically discriminating firm reads a noisy
signal through a group-specific prior.
"""

import numpy as np

from duallabor.hiring import BLIND, PARITY, STATDISC, HiringRegime, thresholds
from duallabor.market import ModelParams, default_forms, quantile

p = ModelParams()
forms = default_forms(p)

# Group B starts with a much worse reputation than group W.
pi_B, pi_W, w = 0.1, 0.6, 1.0

# The ability cutoff under parity is the same quantile for both groups.
print("parity ability cutoff:", quantile(forms.ability, 1 - p.ell))

for regime in (HiringRegime(PARITY), HiringRegime(BLIND), HiringRegime(STATDISC, xi_B=pi_B, xi_W=pi_W)):
    ts = thresholds(pi_B, pi_W, w, p, regime, forms)
    print(f"{regime.tag:>9}:  eta_B={ts.eta('B'):.4f} eta_W={ts.eta('W'):.4f}"
          f"  theta_B={ts.theta('B'):.4f} theta_W={ts.theta('W'):.4f}"
          f"  hired_B={ts.hired('B'):.3f} hired_W={ts.hired('W'):.3f}")

# %%
# A worse reputation raises the cost of investing, so without a parity
# constraint fewer group-B workers clear the cutoff. Sweeping group B's
# reputation shows how the blind rule's hiring share responds.

for pi in np.linspace(0.0, 0.6, 7):
    ts = thresholds(pi, pi_W, w, p, HiringRegime(BLIND), forms)
    print(f"pi_B={pi:.1f}  hired_B={ts.hired('B'):.3f}")
