"""Steady states, contraction diagnostics and the parity-versus-unconstrained regime comparison."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .contracts import effort_cutoffs, p_rho
from .dynamics import (
    GROUPS,
    MarketState,
    Trajectory,
    contraction_factor,
    contribution,
    pool_cdf,
    regime_for,
    step_group_outcome,
    step_market,
    update_gamma,
    wage_period,
)
from .hiring import BLIND, PARITY, HiringRegime, ThresholdSet, parity_thresholds, thresholds
from .market import FunctionalForms, ModelError, ModelParams, quantile, wage

DEFAULT_TOL = 1e-8
DEFAULT_MAX_T = 100_000


class NonConvergence(ModelError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass
class SteadyStateReport:
    g_tilde: dict
    pi_tilde: dict
    w_tilde: float
    converged: bool
    T_convergence: int | None
    empirical_lipschitz: float
    symmetric: bool
    thresholds: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


@dataclass
class ParetoVerdict:
    regime_pair: tuple
    theta_ordering: tuple  # (theta_W, theta_bar, theta_B)
    ordering_holds: bool
    theta_hat_Q: float
    groupB_better_off_mass: float
    groupW_worse_off_mass: float
    dominates: bool
    applicable: bool = True
    reason: str = ""
    welfare: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# trajectories to steady state


def _step_change(a, b):
    return max(abs(a.g_B - b.g_B), abs(a.g_W - b.g_W), abs(a.pi_B - b.pi_B), abs(a.pi_W - b.pi_W), abs(a.w - b.w))


def _gap_lipschitz(traj: Trajectory, p: ModelParams, floor: float = 1e-9) -> float:
    """Largest observed ratio of the new reputation-contribution gap to the current reputation gap.

    The reputation is the mean of the contribution window, so this is the
    empirical Lipschitz constant of the period map in reputation
    coordinates. Steps whose reputation gap is below ``floor`` are skipped.
    """
    best = 0.0
    for r in traj.records:
        gap = abs(r.pi_B - r.pi_W)
        if gap <= floor:
            continue
        ts = r.thresholds
        new = contribution(r.g_B, ts.hired_B, "B", p) - contribution(r.g_W, ts.hired_W, "W", p)
        best = max(best, abs(new) / gap)
    return best


def run_to_steady_state(
    initial: MarketState,
    p: ModelParams,
    regime: HiringRegime,
    forms: FunctionalForms,
    tol: float = DEFAULT_TOL,
    max_t: int = DEFAULT_MAX_T,
    rng=None,
    sym_tol: float | None = None,
):
    """Iterate the market until it stops moving.

    Converged means every period-to-period change (outcome shares,
    reputations, wage) is below ``tol`` and the current wage already equals
    the wage that the next update would post. Running out of ``max_t`` is not
    an error: the partial trajectory comes back with ``converged=False``.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    sym_tol = tol * 100 if sym_tol is None else sym_tol
    traj = Trajectory()
    ms = initial
    prev = None
    settle = max(p.tau + 1, wage_period(p))
    calm = 0
    for _ in range(max_t):
        ms, rec = step_market(ms, p, regime, forms, rng)
        traj.records.append(rec)
        if prev is not None and _step_change(rec, prev) < tol and abs(wage(rec.g_aggregate, forms) - rec.w) < tol:
            calm += 1
            if calm >= settle:
                traj.converged = True
                traj.T = rec.t - settle + 1
                break
        else:
            calm = 0
        prev = rec
    last = traj.records[-1]
    ts = last.thresholds
    report = SteadyStateReport(
        g_tilde={"B": last.g_B, "W": last.g_W},
        pi_tilde={"B": last.pi_B, "W": last.pi_W},
        w_tilde=last.w,
        converged=traj.converged,
        T_convergence=traj.T,
        empirical_lipschitz=_gap_lipschitz(traj, p),
        symmetric=abs(last.pi_B - last.pi_W) < sym_tol,
        thresholds={
            "eta_hat_B": ts.eta_hat_B,
            "eta_hat_W": ts.eta_hat_W,
            "theta_star_B": ts.theta_star_B,
            "theta_star_W": ts.theta_star_W,
            "k_B": ts.k_B,
            "theta_hat_Q": last.theta_hat_Q,
            "theta_hat_U": last.theta_hat_U,
        },
    )
    return traj, report


# ---------------------------------------------------------------------------
# the steady-window map


def _outcomes(gam_B, gam_W, ts, w, p, forms):
    th_Q, th_U = effort_cutoffs(w, p, forms)
    gam = {"B": gam_B, "W": gam_W}
    out = {}
    for mu in GROUPS:
        theta_star = ts.theta(mu) if ts.hired(mu) > 0 else forms.ability.support[0]
        out[mu] = step_group_outcome(gam[mu], pool_cdf(th_Q, theta_star, p, forms), pool_cdf(th_U, theta_star, p, forms), p)
    return out["B"], out["W"], {"w": w, "thresholds": ts, "theta_hat_Q": th_Q, "theta_hat_U": th_U}


def steady_map(x, p, regime, forms, w=None):
    """One period of the stationary system in reputation-contribution coordinates.

    ``x = (r_B, r_W)`` are constant window contributions (hence reputations).
    Returns the contributions the period generates and its details.
    """
    pi = {mu: min(1.0, max(0.0, x[i])) for i, mu in enumerate(GROUPS)}
    if w is None:
        w = x[2] if len(x) > 2 else None
    gam_B, gam_W, ts = update_gamma(pi["B"], pi["W"], w, p, regime, forms)
    g_B, g_W, det = _outcomes(gam_B, gam_W, ts, w, p, forms)
    g = {"B": g_B, "W": g_W}
    r = [contribution(g[mu], ts.hired(mu), mu, p) for mu in GROUPS]
    g_agg = sum(p.sigma(mu) * ts.hired(mu) * g[mu] for mu in GROUPS)
    det.update(g_B=g_B, g_W=g_W, g_aggregate=g_agg, gamma_B=gam_B, gamma_W=gam_W)
    return np.array(r), det


def solve_fixed_point_direct(
    p: ModelParams,
    regime: HiringRegime,
    forms: FunctionalForms,
    damping: float = 1.0,
    start=None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
):
    """Damped fixed-point iteration of the stationary map, wage included.

    State is ``(pi_B, pi_W, w)``; the iteration stops when the residual of
    the undamped map falls below ``tol``. Returns a dict with the fixed
    point's outcome shares, reputations and wage.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    if start is None:
        start = (0.1, 0.1)
    x = np.array([start[0], start[1], forms.wage_curve.w_max], dtype=float)
    for it in range(max_iter):
        r, det = steady_map(x, p, regime, forms)
        nxt = np.array([r[0], r[1], wage(det["g_aggregate"], forms)])
        resid = float(np.max(np.abs(nxt - x)))
        if resid < tol:
            return {
                "g_tilde": {"B": det["g_B"], "W": det["g_W"]},
                "pi_tilde": {"B": float(x[0]), "W": float(x[1])},
                "w_tilde": float(x[2]),
                "residual": resid,
                "iterations": it,
                "thresholds": det["thresholds"],
            }
        x = (1 - damping) * x + damping * nxt
    raise NonConvergence(f"fixed-point iteration did not reach {tol} in {max_iter} iterations")


def symmetric_xi(g: float, p, regime, forms):
    """The one-dimensional symmetric map g -> g' (both groups at g, wage posted for g)."""
    hired = p.ell
    x = [contribution(g, hired, mu, p) for mu in GROUPS]
    g_agg = p.ell * g
    r, det = steady_map(np.array(x + [wage(g_agg, forms)]), p, regime, forms)
    return det["g_B"]


# ---------------------------------------------------------------------------
# contraction diagnostics


@dataclass
class ContractionReport:
    w: float
    eps_closed_form: float
    lip_phi: float
    lip_psi: float
    lip_xi: float
    lip_rep: float
    gap_gain: float
    reputation_expansion: float
    contractive: bool

    def to_dict(self):
        return asdict(self)


def _max_slope(x, y):
    return float(np.max(np.abs(np.diff(y) / np.diff(x))))


def contraction_diagnostics(
    p: ModelParams,
    regime: HiringRegime,
    forms: FunctionalForms,
    w_fixed: float,
    n_grid: int = 2001,
    at=None,
) -> ContractionReport:
    """Lipschitz constants of the outcome map, the reputation feedback and their composite.

    ``phi`` maps the qualified share to the outcome share (parity pool at
    ``w_fixed``); ``psi`` maps a steady outcome share to the qualified share
    through the reputation window and the hiring thresholds; ``xi`` is their
    composite. ``lip_rep`` is the symmetric period map in reputation
    coordinates, pi -> contribution, over the whole range pi in [0, 1].
    ``gap_gain`` is the one-period amplification of a small
    reputation gap around the symmetric point ``at`` (default: the symmetric
    fixed point at ``w_fixed``), which is what decides whether the regime
    pulls the groups together (< 1) or apart (> 1).
    """
    theta_bar = quantile(forms.ability, 1.0 - p.ell)
    th_Q, th_U = effort_cutoffs(w_fixed, p, forms)
    FQ = pool_cdf(th_Q, theta_bar, p, forms)
    FU = pool_cdf(th_U, theta_bar, p, forms)
    eps = contraction_factor(FQ, FU, p)

    gam = np.linspace(0.0, 1.0, n_grid)
    phi = np.array([step_group_outcome(x, FQ, FU, p) for x in gam])
    lip_phi = _max_slope(gam, phi)

    g = np.linspace(0.0, 1.0, n_grid)

    def psi(gv):
        r = contribution(gv, p.ell, "B", p)
        return update_gamma(r, r, w_fixed, p, regime, forms)[0]

    psi_vals = np.array([psi(x) for x in g])
    lip_psi = _max_slope(g, psi_vals)
    xi_vals = np.array([step_group_outcome(x, FQ, FU, p) for x in psi_vals])
    lip_xi = _max_slope(g, xi_vals)

    pis = np.linspace(0.0, 1.0, n_grid)
    gam_pi = np.array([update_gamma(x, x, w_fixed, p, regime, forms)[0] for x in pis])
    rep_vals = np.array([contribution(step_group_outcome(x, FQ, FU, p), p.ell, "B", p) for x in gam_pi])
    lip_rep = _max_slope(pis, rep_vals)

    if at is None:
        x = np.array([0.1, 0.1])
        for _ in range(10_000):
            nxt, _ = steady_map(x, p, regime, forms, w=w_fixed)
            if np.max(np.abs(nxt - x)) < 1e-13:
                break
            x = nxt
        at = float(x[0])
    h = 1e-6
    up, det_up = steady_map(np.array([at - h, at + h]), p, regime, forms, w=w_fixed)
    dn, det_dn = steady_map(np.array([at + h, at - h]), p, regime, forms, w=w_fixed)
    gap_gain = float(((up[1] - up[0]) - (dn[1] - dn[0])) / (4 * h))
    dg = (det_up["g_W"] - det_up["g_B"]) - (det_dn["g_W"] - det_dn["g_B"])
    dpi = (up[1] - up[0]) - (dn[1] - dn[0])
    expansion = float(abs(dpi / dg)) if abs(dg) > 1e-14 else math.inf
    return ContractionReport(w_fixed, eps, lip_phi, lip_psi, lip_xi, lip_rep, gap_gain, expansion,
                             bool(lip_xi < 1.0 and abs(gap_gain) < 1.0))


# ---------------------------------------------------------------------------
# regime comparison


def _welfare(ts: ThresholdSet, pi, w, p, forms, n_grid=4001):
    """Per-period surplus of a group's workers at steady state, averaged over abilities.

    A TLM entrant of ability theta nets, for each qualification type, the
    wage minus effort cost when high effort is affordable (zero otherwise),
    weighted by the group's qualified share, less the investment cost.
    Diagnostic only.
    """
    lo, hi = forms.ability.support
    theta = np.linspace(lo, hi, n_grid)
    dens = np.gradient(np.asarray(forms.ability.cdf(theta), dtype=float), theta)
    out = {}
    for mu in GROUPS:
        eta = ts.eta(mu)
        if not math.isfinite(eta):
            out[mu] = 0.0
            continue
        gam = float(forms.qual_prob(eta))
        surplus = np.zeros_like(theta)
        for rho, share in (("Q", gam), ("U", 1 - gam)):
            e = np.asarray(forms.effort_cost(rho, theta), dtype=float)
            afford = e <= w * (p.p_H - p_rho(rho, p))
            surplus += share * np.where(afford, w - e, 0.0)
        surplus -= np.asarray(forms.invest_cost(pi[mu], theta, eta), dtype=float)
        surplus = np.where(theta >= ts.theta(mu), surplus, 0.0)
        out[mu] = float(np.trapezoid(surplus * dens, theta))
    return out


def pareto_verdict(parity_report, other_report, other_tag, p, forms, w) -> ParetoVerdict:
    F = forms.ability
    theta_bar = parity_report.thresholds["theta_star_B"]
    th_B = other_report.thresholds["theta_star_B"]
    th_W = other_report.thresholds["theta_star_W"]
    th_Q, _ = effort_cutoffs(w, p, forms)
    cdf = lambda x: float(F.cdf(x))  # noqa: E731
    better_B = max(0.0, cdf(th_B) - cdf(max(th_Q, theta_bar)))
    # group-W workers admitted only without the constraint who would clear the effort cutoff
    worse_W = max(0.0, cdf(theta_bar) - cdf(max(th_W, th_Q)))
    ordering = (th_W, theta_bar, th_B)
    applicable, reason = True, ""
    if not forms.wage_curve.pinned:
        applicable, reason = False, "wage not pinned at w_max (demand saturated)"
    elif other_report.symmetric:
        applicable, reason = False, f"{other_tag} regime reached a symmetric steady state"
    dominates = applicable and better_B > 0 and worse_W == 0
    return ParetoVerdict(
        regime_pair=(PARITY, other_tag),
        theta_ordering=ordering,
        ordering_holds=bool(th_W < theta_bar < th_B),
        theta_hat_Q=th_Q,
        groupB_better_off_mass=better_B,
        groupW_worse_off_mass=worse_W,
        dominates=bool(dominates),
        applicable=applicable,
        reason=reason,
    )


def compare_regimes(
    initial: MarketState,
    p: ModelParams,
    forms: FunctionalForms,
    regimes,
    tol: float = DEFAULT_TOL,
    max_t: int = DEFAULT_MAX_T,
    trajectories: dict | None = None,
):
    """Run parity and each unconstrained regime from ``initial`` and judge Pareto dominance.

    Returns ``(parity_report, {tag: (report, verdict)})``. Verdicts are
    marked inapplicable, not raised, when the wage is not pinned at its
    maximum or the unconstrained regime ends symmetric. Pass a dict as
    ``trajectories`` to collect each run's trajectory by regime tag.
    """
    keep = trajectories if trajectories is not None else {}
    keep[PARITY], par = run_to_steady_state(initial, p, HiringRegime(PARITY), forms, tol, max_t)
    out = {}
    for regime in regimes:
        keep[regime.tag], rep = run_to_steady_state(initial, p, regime, forms, tol, max_t)
        v = pareto_verdict(par, rep, regime.tag, p, forms, rep.w_tilde)
        last_pi = rep.pi_tilde
        ts_other = thresholds(last_pi["B"], last_pi["W"], rep.w_tilde, p, regime_for(regime, last_pi["B"], last_pi["W"]), forms)
        ts_par = parity_thresholds(par.pi_tilde["B"], par.pi_tilde["W"], par.w_tilde, p, forms)
        v.welfare = {
            PARITY: _welfare(ts_par, par.pi_tilde, par.w_tilde, p, forms),
            regime.tag: _welfare(ts_other, last_pi, rep.w_tilde, p, forms),
        }
        out[regime.tag] = (rep, v)
    return par, out


def obsolescence_check(report: SteadyStateReport, p, forms):
    """Parity and group-blind threshold sets at a steady state's reputations and wage."""
    pi = report.pi_tilde
    par = parity_thresholds(pi["B"], pi["W"], report.w_tilde, p, forms)
    blind = thresholds(pi["B"], pi["W"], report.w_tilde, p, HiringRegime(BLIND), forms)
    return par, blind
