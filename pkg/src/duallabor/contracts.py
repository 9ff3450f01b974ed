"""PLM effort economics: effort cutoffs, the forgiving reputation threshold, and the worker's DP."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .market import FunctionalForms, ModelError, ModelParams, bisect

DEFAULT_STATE_BUDGET = 5_000_000


class HorizonTooLarge(ModelError):
    pass


@dataclass(frozen=True)
class ReputationState:
    successes: int = 0
    length: int = 0

    def __post_init__(self):
        if not 0 <= self.successes <= self.length:
            raise ValueError(f"need 0 <= successes <= length, got {self.successes}/{self.length}")

    @property
    def value(self) -> float:
        return self.successes / self.length if self.length else 0.0

    def after(self, good: bool) -> "ReputationState":
        return ReputationState(self.successes + int(good), self.length + 1)


def p_rho(rho: str, p: ModelParams) -> float:
    return p.p_Q if rho == "Q" else p.p_U


def effort_cutoffs(w: float, p: ModelParams, forms: FunctionalForms) -> tuple[float, float]:
    """Abilities (theta_hat_Q, theta_hat_U) below which each type exerts low effort.

    Cutoffs are clipped to the ability support: the lower end when every type
    can afford high effort, the upper end when none can (including ``w <= 0``).
    """
    lo, hi = forms.ability.support
    e = forms.effort_cost
    out = []
    for rho in ("Q", "U"):
        target = w * (p.p_H - p_rho(rho, p))
        if target <= 0:
            out.append(hi)
            continue
        if hasattr(e, "inverse"):
            theta = float(e.inverse(rho, target))
        else:
            f = lambda th: target - float(e(rho, th))  # noqa: E731
            if f(lo) >= 0:
                theta = lo
            elif f(hi) < 0:
                theta = hi
            else:
                theta = bisect(f, lo, hi)
        out.append(min(max(theta, lo), hi))
    return out[0], out[1]


def one_shot_effort(theta, rho, w, p: ModelParams, forms: FunctionalForms) -> str:
    """'H' iff the effort cost is covered by the expected wage gain (ties exert H)."""
    return "H" if float(forms.effort_cost(rho, theta)) <= w * (p.p_H - p_rho(rho, p)) else "L"


def delta_schedule(t_prime, c_delta: float):
    """Forgiveness buffer below p_H granted to a history of length ``t_prime``.

    An iterated-logarithm term, which an always-high-effort worker's reputation
    stays inside, plus ``c_delta/(t'+1)`` slack. Vectorised over ``t_prime``.
    """
    t = np.asarray(t_prime, dtype=float)
    out = np.sqrt(0.5 * np.log(np.log(t + math.e)) / (t + 1.0)) + c_delta / (t + 1.0)
    return float(out) if out.ndim == 0 else out


def delta_reaches(level: float, c_delta: float) -> int:
    """First history length at which the buffer drops below ``level``."""
    hi = 1
    while delta_schedule(hi, c_delta) >= level:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if delta_schedule(mid, c_delta) < level:
            hi = mid
        else:
            lo = mid
    return hi


def hire_threshold(t_prime, p: ModelParams):
    """Reputation threshold p_H - Delta_t'; fresh histories (t'=0) always pass."""
    thr = p.p_H - delta_schedule(t_prime, p.c_delta)
    return np.where(np.asarray(t_prime) == 0, -np.inf, thr)


def plm_hire(rep: ReputationState, p: ModelParams) -> bool:
    if rep.length == 0:
        return True
    return rep.value >= p.p_H - delta_schedule(rep.length, p.c_delta)


@dataclass
class ValueTable:
    """Values and optimal effort over exact (successes, length) states.

    ``value[n, s]`` and ``effort[n, s]`` are defined for ``s <= n <= N``; the
    entries above the diagonal are NaN. A state of length n has ``N - n``
    decisions left.
    """

    value: np.ndarray
    effort: np.ndarray
    gain: np.ndarray  # advantage of H over L; zero means indifference
    horizon: int
    theta: float
    rho: str
    w: float

    def at(self, rep: ReputationState) -> float:
        return float(self.value[rep.length, rep.successes])

    def policy(self, rep: ReputationState) -> float:
        return float(self.effort[rep.length, rep.successes])

    def rows(self):
        N = self.horizon
        for n in range(N + 1):
            for s in range(n + 1):
                eff = self.effort[n, s]
                yield n, s, N - n, float(self.value[n, s]), (float(eff) if n < N else 0.0)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["length", "successes", "steps_remaining", "value", "effort_prob"])
            for n, s, r, v, e in self.rows():
                writer.writerow([n, s, r, repr(v), repr(e)])


def solve_dp(
    theta: float,
    rho: str,
    w: float,
    p: ModelParams,
    forms: FunctionalForms,
    horizon: int | None = None,
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> ValueTable:
    """Backward induction for a PLM worker facing the threshold contract at a frozen wage.

    Each period the worker is paid ``w`` if their reputation clears the
    threshold, pays the effort cost when exerting H, and survives to the next
    period with probability ``1 - lambda_exit``. Effort is bang-bang; ties go
    to H.
    """
    N = p.horizon_N if horizon is None else horizon
    if N < 1:
        raise ValueError("horizon must be >= 1")
    if N * (N + 1) // 2 > state_budget:
        raise HorizonTooLarge(f"horizon {N} needs {N * (N + 1) // 2} states > budget {state_budget}")
    cost = float(forms.effort_cost(rho, theta))
    pr = p_rho(rho, p)
    lift = p.p_H - pr
    survive = 1.0 - p.lambda_exit

    value = np.full((N + 1, N + 1), np.nan)
    effort = np.full((N + 1, N + 1), np.nan)
    gain = np.full((N + 1, N + 1), np.nan)
    value[N, : N + 1] = 0.0
    thr = hire_threshold(np.arange(N + 1), p)
    for n in range(N - 1, -1, -1):
        s = np.arange(n + 1)
        pay = w * ((s / max(n, 1)) >= thr[n])
        v_good = value[n + 1, s + 1]
        v_bad = value[n + 1, s]
        adv = survive * lift * (v_good - v_bad) - cost
        base = survive * (pr * v_good + (1.0 - pr) * v_bad) + pay
        high = adv >= 0
        value[n, s] = base + np.where(high, adv, 0.0)
        effort[n, s] = high
        gain[n, s] = adv
    return ValueTable(value, effort, gain, N, float(theta), rho, float(w))


def bellman_residual(table: ValueTable, p: ModelParams, forms: FunctionalForms) -> float:
    """Largest violation of the Bellman equation over all states, by direct re-evaluation."""
    N = table.horizon
    cost = float(forms.effort_cost(table.rho, table.theta))
    pr = p_rho(table.rho, p)
    survive = 1.0 - p.lambda_exit
    worst = float(np.max(np.abs(table.value[N, : N + 1])))
    for n in range(N):
        for s in range(n + 1):
            rep = ReputationState(s, n)
            pay = table.w if plm_hire(rep, p) else 0.0
            best = -math.inf
            for eps in (0.0, 1.0):
                pg = eps * p.p_H + (1 - eps) * pr
                cont = survive * (pg * table.value[n + 1, s + 1] + (1 - pg) * table.value[n + 1, s])
                best = max(best, cont + pay - eps * cost)
            worst = max(worst, abs(best - table.value[n, s]))
    return worst
