"""Deterministic group-level recursion: reputation, qualification feedback, outcomes and wages."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .contracts import effort_cutoffs
from .hiring import STATDISC, HiringRegime, ThresholdSet, thresholds
from .market import FunctionalForms, ModelParams, wage

GROUPS = ("B", "W")
TRAJECTORY_COLUMNS = ["t", "g_B", "g_W", "pi_B", "pi_W", "gamma_B", "gamma_W", "w", "eta_hat_B", "eta_hat_W", "k_B"]
PRIOR_FLOOR = 1e-6


@dataclass(frozen=True)
class GroupState:
    g_history: tuple  # last tau+1 good-outcome shares among the group's skilled workers
    rep_history: tuple  # matching reputational contributions (see ``contribution``)
    pi: float
    gamma: float


@dataclass(frozen=True)
class MarketState:
    B: GroupState
    W: GroupState
    w_current: float
    g_aggregate: float
    t: int = 0
    last_wage_update: int = 0

    def group(self, mu: str) -> GroupState:
        return self.B if mu == "B" else self.W


@dataclass(frozen=True)
class StepRecord:
    t: int
    g_B: float
    g_W: float
    pi_B: float
    pi_W: float
    gamma_B: float
    gamma_W: float
    w: float
    thresholds: ThresholdSet
    theta_hat_Q: float
    theta_hat_U: float
    eps_B: float
    eps_W: float
    g_aggregate: float
    wage_updated: bool

    def row(self):
        ts = self.thresholds
        return [self.t, self.g_B, self.g_W, self.pi_B, self.pi_W, self.gamma_B, self.gamma_W,
                self.w, ts.eta_hat_B, ts.eta_hat_W, ts.k_B]


@dataclass
class Trajectory:
    records: list = field(default_factory=list)
    converged: bool = False
    T: int | None = None

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRAJECTORY_COLUMNS)
            for r in self.records:
                writer.writerow([r.t] + [repr(float(v)) for v in r.row()[1:]])


# ---------------------------------------------------------------------------
# building blocks


def step_group_outcome(gamma_mu, F_hat_Q, F_hat_U, p: ModelParams) -> float:
    """Share of a group's skilled workers producing G.

    ``F_hat_Q`` and ``F_hat_U`` are the shares of the group's skilled pool
    whose ability lies below the qualified and unqualified effort cutoffs.
    """
    return (
        p.p_H * (1.0 - F_hat_Q * gamma_mu - F_hat_U * (1.0 - gamma_mu))
        + p.p_Q * F_hat_Q * gamma_mu
        + p.p_U * F_hat_U * (1.0 - gamma_mu)
    )


def contraction_factor(F_hat_Q, F_hat_U, p: ModelParams) -> float:
    """d g / d gamma of the outcome map; the per-step contraction constant under parity."""
    return F_hat_U * (p.p_H - p.p_U) + F_hat_Q * (p.p_Q - p.p_H)


def pool_cdf(theta, theta_star, p: ModelParams, forms: FunctionalForms) -> float:
    """Ability CDF of a skilled pool admitted from ``theta_star`` upwards."""
    F = forms.ability
    if p.outcome_pool == "population":
        return float(F.cdf(theta))
    base = float(F.cdf(theta_star))
    if base >= 1.0:
        return float(F.cdf(theta))
    return max(0.0, float(F.cdf(theta)) - base) / (1.0 - base)


def contribution(g_mu, hired_mu, mu, p: ModelParams) -> float:
    """One period's addition to group ``mu``'s reputation window.

    Under parity ``sigma_mu * hired_mu = sigma_mu * ell``, so the window mean
    reproduces the printed reputation; ``per_capita`` divides by ``sigma_mu``.
    """
    share = hired_mu if p.reputation_norm == "per_capita" else p.sigma(mu) * hired_mu
    return share * g_mu


def update_reputation(gs: GroupState) -> float:
    """Clamped mean of the contribution window."""
    window = gs.rep_history
    return min(1.0, max(0.0, sum(window) / len(window)))


def regime_for(regime: HiringRegime, pi_B, pi_W) -> HiringRegime:
    if regime.tag == STATDISC and regime.prior_dynamics == "reputation":
        clip = lambda x: min(1 - PRIOR_FLOOR, max(PRIOR_FLOOR, x))  # noqa: E731
        return replace(regime, xi_B=clip(pi_B), xi_W=clip(pi_W))
    return regime


def update_gamma(pi_B, pi_W, w, p, regime: HiringRegime, forms: FunctionalForms):
    """Qualified shares (gamma_B, gamma_W) and the thresholds behind them."""
    ts = thresholds(pi_B, pi_W, w, p, regime_for(regime, pi_B, pi_W), forms)
    gam = tuple(float(forms.qual_prob(ts.eta(mu))) if math.isfinite(ts.eta(mu)) else 0.0 for mu in GROUPS)
    return gam[0], gam[1], ts


def wage_period(p: ModelParams) -> int:
    return math.ceil(1.0 / p.wage_update_prob - 1e-12)


# ---------------------------------------------------------------------------
# state transitions


def initial_state(p: ModelParams, forms: FunctionalForms, pi_B, pi_W, g_B=None, g_W=None) -> MarketState:
    """State whose reputation windows reproduce (pi_B, pi_W) and whose wage matches g.

    Outcome shares default to the steady value implied by each group's
    reputation under the default parity hiring shares.
    """
    n = p.tau + 1
    groups = {}
    for mu, pi, g in (("B", pi_B, g_B), ("W", pi_W, g_W)):
        if g is None:
            scale = contribution(1.0, p.ell, mu, p)
            g = min(1.0, pi / scale)
        groups[mu] = GroupState((float(g),) * n, (float(pi),) * n, float(pi), 0.0)
    g_agg = sum(p.sigma(mu) * p.ell * groups[mu].g_history[-1] for mu in GROUPS)
    return MarketState(groups["B"], groups["W"], wage(g_agg, forms), g_agg)


def step_market(ms: MarketState, p: ModelParams, regime: HiringRegime, forms: FunctionalForms, rng=None):
    """Advance one period; returns ``(new_state, record)`` and leaves ``ms`` untouched.

    Order within the period: reputation, hiring thresholds and qualified
    shares, effort cutoffs, outcomes, aggregate supply, wage update. The wage
    updates every ``ceil(1/wage_update_prob)`` periods, or with that
    probability per period when ``rng`` is given.
    """
    pi = {mu: update_reputation(ms.group(mu)) for mu in GROUPS}
    w = ms.w_current
    gam_B, gam_W, ts = update_gamma(pi["B"], pi["W"], w, p, regime, forms)
    gam = {"B": gam_B, "W": gam_W}
    th_Q, th_U = effort_cutoffs(w, p, forms)

    new_groups, g, eps = {}, {}, {}
    g_agg = 0.0
    for mu in GROUPS:
        hired = ts.hired(mu)
        theta_star = ts.theta(mu)
        if hired <= 0.0:
            theta_star = forms.ability.support[0]
        FQ = pool_cdf(th_Q, theta_star, p, forms)
        FU = pool_cdf(th_U, theta_star, p, forms)
        g[mu] = step_group_outcome(gam[mu], FQ, FU, p)
        eps[mu] = contraction_factor(FQ, FU, p)
        g_agg += p.sigma(mu) * hired * g[mu]
        gs = ms.group(mu)
        new_groups[mu] = GroupState(
            gs.g_history[1:] + (g[mu],),
            gs.rep_history[1:] + (contribution(g[mu], hired, mu, p),),
            pi[mu],
            gam[mu],
        )

    t_next = ms.t + 1
    if rng is None:
        fire = t_next % wage_period(p) == 0
    else:
        fire = bool(rng.random() < p.wage_update_prob)
    w_next = wage(g_agg, forms) if fire else w
    new_state = MarketState(
        new_groups["B"],
        new_groups["W"],
        w_next,
        g_agg,
        t_next,
        t_next if fire else ms.last_wage_update,
    )
    record = StepRecord(ms.t, g["B"], g["W"], pi["B"], pi["W"], gam_B, gam_W, w, ts, th_Q, th_U,
                        eps["B"], eps["W"], g_agg, fire)
    return new_state, record


def simulate(initial: MarketState, p, regime, forms, steps: int, rng=None):
    """Run ``steps`` periods; returns the final state and the trajectory."""
    traj = Trajectory()
    ms = initial
    for _ in range(steps):
        ms, rec = step_market(ms, p, regime, forms, rng)
        traj.records.append(rec)
    return ms, traj
