"""Agent-level simulation of the dual labor market and Monte Carlo checks of the PLM contract."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .contracts import delta_schedule, hire_threshold, solve_dp
from .dynamics import GROUPS, TRAJECTORY_COLUMNS, initial_state, regime_for, wage_period
from .hiring import HiringRegime, thresholds
from .market import FunctionalForms, ModelParams, RangeViolation, lil_bound, validate_params, wage

# agent locations
TLM, PLM, EXCLUDED = 1, 2, 3
LOCATIONS = {TLM: "TLM", PLM: "PLM", EXCLUDED: "excluded"}


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    forms: FunctionalForms
    regime: HiringRegime = field(default_factory=HiringRegime)
    n: int = 10_000
    seed: int = 0
    steps: int = 200
    pi0: tuple = (0.1, 0.1)
    effort_policy: str = "stationary"  # or "dp": per-agent backward induction
    event_log: bool = False
    replica: int = 0
    wage_schedule: str = "random"  # or "periodic": every ceil(1/wage_update_prob) periods, as in the recursion

    def __post_init__(self):
        if self.n < 100:
            raise RangeViolation(f"population n={self.n} must be >= 100")
        if self.effort_policy not in ("stationary", "dp"):
            raise RangeViolation(f"effort_policy={self.effort_policy!r}")
        if self.wage_schedule not in ("random", "periodic"):
            raise RangeViolation(f"wage_schedule={self.wage_schedule!r}")
        for name in ("kappa", "lambda_exit"):
            if not 0 <= getattr(self.params, name) < 1:
                raise RangeViolation(f"{name} must lie in [0, 1) for per-period Bernoulli flows")
        # zero flow rates are allowed here (a frozen population); everything else as usual
        validate_params(replace(self.params, kappa=self.params.kappa or 0.5,
                                lambda_exit=self.params.lambda_exit or 0.5))

    def rng(self):
        """Generator for this replica, derived from (seed, replica)."""
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.replica,)))


@dataclass
class AgentTrajectory:
    rows: list = field(default_factory=list)  # one dict per period
    events: list = field(default_factory=list)

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
            for r in self.rows:
                fh.write(",".join([str(r["t"])] + [repr(float(r[c])) for c in TRAJECTORY_COLUMNS[1:]]) + "\n")

    def write_events(self, path):
        with open(path, "w") as fh:
            for t, agent, event, payload in self.events:
                fh.write(json.dumps({"t": t, "agent": agent, "event": event, "payload": payload}, sort_keys=True) + "\n")


class _Population:
    """Struct-of-arrays agent store; agents are replaced in place at exit."""

    def __init__(self, n, sigma_B):
        n_B = int(round(sigma_B * n))
        self.group = np.array([0] * n_B + [1] * (n - n_B), dtype=np.int8)
        self.theta = np.zeros(n)
        self.qualified = np.zeros(n, dtype=bool)
        self.loc = np.zeros(n, dtype=np.int8)
        self.eta = np.zeros(n)
        self.succ = np.zeros(n, dtype=np.int64)
        self.length = np.zeros(n, dtype=np.int64)
        self.born = np.zeros(n, dtype=np.int64)


def _effort(pop, idx, w, cfg, dp_cache):
    """High-effort indicator for agents ``idx``."""
    p, forms = cfg.params, cfg.forms
    q = pop.qualified[idx]
    theta = pop.theta[idx]
    e = np.where(q, forms.effort_cost("Q", theta), forms.effort_cost("U", theta))
    lift = np.where(q, p.p_H - p.p_Q, p.p_H - p.p_U)
    rule = e <= w * lift
    if cfg.effort_policy == "stationary":
        return rule
    out = rule.copy()
    N = p.horizon_N
    if dp_cache.get("w") != w:
        # policies are solved at a frozen wage, so a new wage invalidates all of them
        dp_cache.clear()
        dp_cache["w"] = w
    for j, i in enumerate(idx):
        n_len = int(pop.length[i])
        if n_len >= N:
            continue  # beyond the look-ahead window the stationary rule applies
        key = (int(i), int(pop.born[i]))
        policy = dp_cache.get(key)
        if policy is None:
            policy = solve_dp(pop.theta[i], "Q" if pop.qualified[i] else "U", w, p, forms).effort == 1.0
            dp_cache[key] = policy
        out[j] = bool(policy[n_len, int(pop.succ[i])])
    return out


def simulate(cfg: SimConfig):
    """Run the agent model; returns ``(AgentTrajectory, summary)``.

    Each period: group reputations from the lagged window of good-outcome
    contributions, TLM thresholds for entrants, effort and Bernoulli
    outcomes for every skilled (TLM or PLM) worker, PLM hiring from
    individual reputations, then flows (TLM to PLM at rate kappa, PLM exit at
    rate lambda, excluded workers exit at the matching total-lifetime rate,
    every exit replaced by a newborn of the same group) and a wage update
    with probability ``wage_update_prob`` (or on the recursion's fixed
    schedule), which also restarts individual reputations.
    """
    p, forms, regime = cfg.params, cfg.forms, cfg.regime
    rng = cfg.rng()
    F = forms.ability
    n = cfg.n
    pop = _Population(n, p.sigma_B)
    n_mu = np.array([np.sum(pop.group == 0), np.sum(pop.group == 1)])
    window = [list((cfg.pi0[0],) * (p.tau + 1)), list((cfg.pi0[1],) * (p.tau + 1))]
    w = initial_state(p, forms, *cfg.pi0).w_current
    period = wage_period(p)
    traj = AgentTrajectory()
    dp_cache: dict = {}
    # excluded workers live as long as skilled ones on average (1/kappa + 1/lambda)
    flows = p.kappa + p.lambda_exit
    exit_excluded = p.kappa * p.lambda_exit / flows if flows > 0 else 0.0

    def rep_pi():
        return [min(1.0, max(0.0, sum(window[i]) / len(window[i]))) for i in range(2)]

    def place(idx, ts, pi, t):
        """Newborn agents: draw ability, invest against the current thresholds, enter or drop out."""
        if len(idx) == 0:
            return
        pop.theta[idx] = F.ppf(rng.random(len(idx))) if hasattr(F, "ppf") else rng.random(len(idx))
        pop.succ[idx] = 0
        pop.length[idx] = 0
        pop.born[idx] = t
        u_q = rng.random(len(idx))
        for gi, mu in enumerate(GROUPS):
            sel = idx[pop.group[idx] == gi]
            if len(sel) == 0:
                continue
            eta = ts.eta(mu)
            if not math.isfinite(eta):
                invest = np.zeros(len(sel), dtype=bool)
            else:
                invest = forms.invest_cost(pi[gi], pop.theta[sel], eta) <= w * (1 + 1e-12)
            pop.eta[sel] = np.where(invest, eta if math.isfinite(eta) else 0.0, 0.0)
            pop.loc[sel] = np.where(invest, TLM, EXCLUDED)
            gam = float(forms.qual_prob(eta)) if math.isfinite(eta) else 0.0
            pop.qualified[sel] = invest & (u_q[np.searchsorted(idx, sel)] < gam)
        if cfg.event_log:
            for i in idx:
                traj.events.append((t, int(i), "birth", {"group": GROUPS[pop.group[i]], "loc": LOCATIONS[int(pop.loc[i])]}))

    # initial population: everyone born at t=0 against the initial thresholds
    pi = rep_pi()
    ts = thresholds(pi[0], pi[1], w, p, regime_for(regime, *pi), forms)
    place(np.arange(n), ts, pi, 0)
    skilled0 = np.flatnonzero(pop.loc == TLM)
    tlm_share = min(1.0, p.m / p.ell)
    to_plm = skilled0[rng.random(len(skilled0)) >= tlm_share]
    pop.loc[to_plm] = PLM

    plm_hired_total = plm_total = 0
    for t in range(cfg.steps):
        pi = rep_pi()
        ts = thresholds(pi[0], pi[1], w, p, regime_for(regime, *pi), forms)

        skilled = np.flatnonzero((pop.loc == TLM) | (pop.loc == PLM))
        high = _effort(pop, skilled, w, cfg, dp_cache)
        q = pop.qualified[skilled]
        p_good = np.where(high, p.p_H, np.where(q, p.p_Q, p.p_U))
        good = rng.random(len(skilled)) < p_good

        # PLM hiring judged on the history before this period's outcome
        in_plm = pop.loc[skilled] == PLM
        lengths = pop.length[skilled]
        thr = hire_threshold(lengths, p)
        with np.errstate(invalid="ignore", divide="ignore"):
            rep_val = np.where(lengths > 0, pop.succ[skilled] / np.maximum(lengths, 1), 0.0)
        hired = rep_val >= thr
        plm_hired_total += int(np.sum(hired & in_plm))
        plm_total += int(np.sum(in_plm))

        pop.succ[skilled] += good
        pop.length[skilled] += 1

        row = {"t": t, "w": w, "pi_B": pi[0], "pi_W": pi[1], "eta_hat_B": ts.eta_hat_B, "eta_hat_W": ts.eta_hat_W}
        good_mass = 0.0
        n_sk = []
        for gi, mu in enumerate(GROUPS):
            sel = pop.group[skilled] == gi
            cnt = int(np.sum(sel))
            n_sk.append(cnt)
            g_mu = float(np.mean(good[sel])) if cnt else 0.0
            row[f"g_{mu}"] = g_mu
            row[f"gamma_{mu}"] = float(np.mean(q[sel])) if cnt else 0.0
            row[f"n_skilled_{mu}"] = cnt
            row[f"plm_hire_rate_{mu}"] = float(np.mean(hired[sel & in_plm])) if np.any(sel & in_plm) else 0.0
            good_cnt = float(np.sum(good[sel]))
            good_mass += good_cnt / n
            contrib = good_cnt / n if p.reputation_norm == "paper" else good_cnt / n_mu[gi]
            window[gi] = window[gi][1:] + [contrib]
        row["k_B"] = n_sk[0] / max(1, sum(n_sk))
        row["g_aggregate"] = good_mass
        row["share_B"] = float(np.mean(pop.group == 0))
        traj.rows.append(row)

        # flows, drawn for everyone in a fixed order
        u = rng.random(n)
        leave = ((pop.loc == PLM) & (u < p.lambda_exit)) | ((pop.loc == EXCLUDED) & (u < exit_excluded))
        promote = (pop.loc == TLM) & (u < p.kappa)
        pop.loc[promote] = PLM
        born = np.flatnonzero(leave)
        if cfg.event_log:
            for i in np.flatnonzero(promote):
                traj.events.append((t, int(i), "promote", {}))
            for i in born:
                traj.events.append((t, int(i), "exit", {}))
        place(born, ts, pi, t + 1)

        if cfg.wage_schedule == "periodic":
            fire = (t + 1) % period == 0
        else:
            fire = rng.random() < p.wage_update_prob
        if fire:
            w = wage(good_mass, forms)
            pop.succ[:] = 0
            pop.length[:] = 0
            if cfg.event_log:
                traj.events.append((t, -1, "wage", {"w": w}))

    summary = {
        "n": n,
        "seed": cfg.seed,
        "steps": cfg.steps,
        "final": traj.rows[-1] if traj.rows else {},
        "plm_hire_rate": plm_hired_total / plm_total if plm_total else 0.0,
        "mean_share_B": float(np.mean([r["share_B"] for r in traj.rows])) if traj.rows else p.sigma_B,
    }
    return traj, summary


def replicate(cfg: SimConfig, replicas: int):
    """Independent runs of ``cfg`` over replica indices 0..replicas-1."""
    return [simulate(replace(cfg, replica=k)) for k in range(replicas)]


def mean_field_agreement(abm_traj: AgentTrajectory, det_traj, burn_in: int = 0, z: float = 3.0):
    """Fraction of periods where both groups' empirical outcome shares sit within ``z`` binomial errors.

    The error bar for group mu at period t is ``sqrt(g(1-g)/n_mu)`` with g the
    deterministic value and n_mu the number of skilled group-mu agents.
    """
    hits = []
    for r_abm, r_det in zip(abm_traj.rows[burn_in:], det_traj.records[burn_in:]):
        ok = True
        for mu in GROUPS:
            g = getattr(r_det, f"g_{mu}")
            n_mu = r_abm[f"n_skilled_{mu}"]
            se = math.sqrt(max(g * (1 - g), 1e-12) / max(n_mu, 1))
            ok &= abs(r_abm[f"g_{mu}"] - g) <= z * se
        hits.append(ok)
    return float(np.mean(hits))


# ---------------------------------------------------------------------------
# contract Monte Carlo


def lil_experiment(p_H: float, steps: int, replicas: int, seed: int, c_delta: float = 2.0,
                   p_low: float | None = None, check_at: int = 50, chunk: int = 2000):
    """Reputation paths of always-high-effort workers (and optionally always-low ones).

    Reports, on a log grid of history lengths, the fraction of replicas whose
    reputation strays from ``p_H`` by more than the iterated-logarithm bound,
    the overall share of periods 1..steps in which an always-H worker is
    rejected by the threshold ``p_H - Delta``, and, when ``p_low`` is given,
    the share of always-L workers (success rate ``p_low``) rejected at
    history length ``check_at`` and at least once by then.
    """
    if replicas < 1000:
        raise RangeViolation("lil_experiment needs at least 1000 replicas")
    children = np.random.SeedSequence(seed).spawn(2)
    n = np.arange(1, steps + 1)
    thr = p_H - delta_schedule(n, c_delta)
    grid = np.unique(np.round(np.logspace(np.log10(3), np.log10(steps), 12)).astype(int))
    bound = np.array([lil_bound(t) for t in grid])
    exceed = np.zeros(len(grid))
    rejected = 0
    rng = np.random.default_rng(children[0])
    done = 0
    while done < replicas:
        m = min(chunk, replicas - done)
        s = np.cumsum(rng.random((m, steps)) < p_H, axis=1)
        rep = s / n
        rejected += int(np.sum(rep < thr))
        exceed += np.sum(np.abs(rep[:, grid - 1] - p_H) > bound, axis=0)
        done += m
    report = {
        "p_H": p_H,
        "steps": steps,
        "replicas": replicas,
        "c_delta": c_delta,
        "grid": grid.tolist(),
        "lil_bound": bound.tolist(),
        "exceedance": (exceed / replicas).tolist(),
        "rejection_rate_high": rejected / (replicas * steps),
    }
    if p_low is not None:
        rng = np.random.default_rng(children[1])
        k = min(check_at, steps)
        s = np.cumsum(rng.random((replicas, k)) < p_low, axis=1)
        rep = s / n[:k]
        rej = rep < thr[:k]
        report.update(
            p_low=p_low,
            check_at=k,
            delta_at_check=float(delta_schedule(k, c_delta)),
            rejected_at_check=float(np.mean(rej[:, -1])),
            rejected_by_check=float(np.mean(rej.any(axis=1))),
        )
    return report
