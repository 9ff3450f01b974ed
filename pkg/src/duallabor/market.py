"""Parameters, functional forms and shared numerics for the dual labor market model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np
from scipy import optimize, special

ROOT_XTOL = 1e-10
ROOT_MAXITER = 200


class ModelError(Exception):
    """Base class for every error raised by the package."""


class ParamError(ModelError, ValueError):
    pass


class OrderingViolation(ParamError):
    pass


class RangeViolation(ParamError):
    pass


class NegativeSupply(ModelError, ValueError):
    pass


class NonInvertible(ModelError):
    pass


class RootNotBracketed(ModelError):
    pass


@dataclass(frozen=True)
class ModelParams:
    sigma_B: float = 0.5
    ell: float = 0.5
    m: float = 0.3
    kappa: float = 0.5
    lambda_exit: float = 0.1
    tau: int = 5
    p_H: float = 0.9
    p_Q: float = 0.6
    p_U: float = 0.3
    w_max: float = 1.0
    w_min: float = 0.2
    wage_update_prob: float = 0.25
    horizon_N: int = 50
    # forgiveness-buffer constant of the PLM hiring threshold
    c_delta: float = 2.0
    # "paper": contributions scaled by hired population share; "per_capita": divided by sigma_mu
    reputation_norm: str = "paper"
    # "hired": outcome recursion uses the ability CDF of the group's skilled pool
    outcome_pool: str = "hired"

    def sigma(self, group: str) -> float:
        return self.sigma_B if group == "B" else 1.0 - self.sigma_B


def validate_params(p: ModelParams) -> None:
    """Raise on the first violated constraint; return None when ``p`` is valid."""

    def open_unit(name):
        v = getattr(p, name)
        if not 0.0 < v < 1.0:
            raise RangeViolation(f"{name}={v} must lie in (0, 1)")

    for name in ("sigma_B", "ell", "m", "p_H", "p_Q", "p_U"):
        open_unit(name)
    if not p.kappa > 0:
        raise RangeViolation(f"kappa={p.kappa} must be > 0")
    if not p.lambda_exit > 0:
        raise RangeViolation(f"lambda_exit={p.lambda_exit} must be > 0")
    if int(p.tau) != p.tau or p.tau < 1:
        raise RangeViolation(f"tau={p.tau} must be an integer >= 1")
    if int(p.horizon_N) != p.horizon_N or p.horizon_N < 1:
        raise RangeViolation(f"horizon_N={p.horizon_N} must be an integer >= 1")
    if not 0.0 < p.wage_update_prob <= 1.0:
        raise RangeViolation(f"wage_update_prob={p.wage_update_prob} must lie in (0, 1]")
    if not p.w_min >= 0:
        raise RangeViolation(f"w_min={p.w_min} must be >= 0")
    if not p.w_max > p.w_min:
        raise OrderingViolation(f"w_max={p.w_max} must exceed w_min={p.w_min}")
    if not p.p_Q > p.p_U:
        raise OrderingViolation(f"p_Q={p.p_Q} must exceed p_U={p.p_U}")
    if not p.p_H > p.p_Q:
        raise OrderingViolation(f"p_H={p.p_H} must exceed p_Q={p.p_Q}")
    if not p.c_delta > 0:
        raise RangeViolation(f"c_delta={p.c_delta} must be > 0")
    if p.reputation_norm not in ("paper", "per_capita"):
        raise RangeViolation(f"reputation_norm={p.reputation_norm!r} not in (paper, per_capita)")
    if p.outcome_pool not in ("hired", "population"):
        raise RangeViolation(f"outcome_pool={p.outcome_pool!r} not in (hired, population)")


# ---------------------------------------------------------------------------
# ability distributions


@dataclass(frozen=True)
class UniformAbility:
    lo: float = 0.0
    hi: float = 1.0

    def cdf(self, theta):
        return np.clip((np.asarray(theta, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def ppf(self, q):
        return self.lo + (self.hi - self.lo) * np.asarray(q, dtype=float)

    @property
    def support(self):
        return self.lo, self.hi


@dataclass(frozen=True)
class BetaAbility:
    a: float = 2.0
    b: float = 2.0

    def cdf(self, theta):
        return special.betainc(self.a, self.b, np.clip(np.asarray(theta, dtype=float), 0.0, 1.0))

    def ppf(self, q):
        return special.betaincinv(self.a, self.b, np.asarray(q, dtype=float))

    @property
    def support(self):
        return 0.0, 1.0


def quantile(F, q: float, tol: float = 1e-13) -> float:
    """Smallest ability ``theta`` with ``F(theta) >= q``.

    Uses the distribution's own inverse when it has one and falls back to
    bisection on the CDF otherwise.
    """
    if not 0.0 <= q <= 1.0:
        raise RangeViolation(f"quantile level {q} outside [0, 1]")
    lo, hi = F.support
    if hasattr(F, "ppf"):
        return float(F.ppf(q))
    if q <= F.cdf(lo):
        return lo
    if q >= 1.0:
        return hi
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if F.cdf(mid) >= q:
            hi = mid
        else:
            lo = mid
    if abs(float(F.cdf(hi)) - q) > 1e-8:
        # CDF jumps over q, so there is no theta with F(theta) = q
        raise NonInvertible(f"CDF does not attain level {q} (jump at theta={hi:.6g})")
    return hi


def bisect(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of a monotone scalar function on a bracketing interval."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootNotBracketed(f"no sign change on [{lo}, {hi}] (f={flo:.3g}, {fhi:.3g})")
    return optimize.brentq(f, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=ROOT_MAXITER)


# ---------------------------------------------------------------------------
# cost, qualification and wage curves


@dataclass(frozen=True)
class InvestCost:
    """c_pi(theta, eta) = eta * (1 + beta*(1 - pi)) / (theta + theta0)."""

    beta: float = 1.0
    theta0: float = 0.1

    def __call__(self, pi, theta, eta):
        return eta * (1.0 + self.beta * (1.0 - pi)) / (theta + self.theta0)

    def eta_at(self, pi, theta, cost):
        """Investment level whose cost equals ``cost`` for ability ``theta``."""
        return cost * (theta + self.theta0) / (1.0 + self.beta * (1.0 - pi))

    def theta_at(self, pi, eta, cost):
        """Ability at which investing ``eta`` costs exactly ``cost``."""
        return eta * (1.0 + self.beta * (1.0 - pi)) / cost - self.theta0


@dataclass(frozen=True)
class QualProb:
    """gamma(eta) = 1 - exp(-a * eta)."""

    a: float = 2.0

    def __call__(self, eta):
        return -np.expm1(-self.a * np.asarray(eta, dtype=float))


@dataclass(frozen=True)
class EffortCost:
    """e_rho(theta) = k_rho / (theta + theta0)."""

    k_Q: float = 0.2
    k_U: float = 0.45
    theta0: float = 0.1

    def __call__(self, rho, theta):
        k = self.k_Q if rho == "Q" else self.k_U
        return k / (np.asarray(theta, dtype=float) + self.theta0)

    def inverse(self, rho, cost):
        k = self.k_Q if rho == "Q" else self.k_U
        return k / cost - self.theta0


@dataclass(frozen=True)
class WageCurve:
    """w(g) = w_min + (w_max - w_min) * exp(-s * g); ``pinned`` holds it at w_max."""

    w_max: float = 1.0
    w_min: float = 0.2
    s: float = 1.0
    pinned: bool = False

    def __call__(self, g):
        if np.any(np.asarray(g) < 0):
            raise NegativeSupply(f"good-worker supply g={g} is negative")
        if self.pinned:
            return self.w_max + 0.0 * np.asarray(g, dtype=float)
        return self.w_min + (self.w_max - self.w_min) * np.exp(-self.s * np.asarray(g, dtype=float))


@dataclass(frozen=True)
class FunctionalForms:
    ability: object = field(default_factory=UniformAbility)
    invest_cost: InvestCost = field(default_factory=InvestCost)
    qual_prob: QualProb = field(default_factory=QualProb)
    effort_cost: EffortCost = field(default_factory=EffortCost)
    wage_curve: WageCurve = field(default_factory=WageCurve)

    def pinned(self) -> "FunctionalForms":
        """Same forms with the wage held at its maximum (unsaturated demand)."""
        return replace(self, wage_curve=replace(self.wage_curve, pinned=True))


def default_forms(p: ModelParams | None = None) -> FunctionalForms:
    p = p or ModelParams()
    return FunctionalForms(wage_curve=WageCurve(w_max=p.w_max, w_min=p.w_min))


def wage(g: float, forms: FunctionalForms) -> float:
    return float(forms.wage_curve(g))


def param_names() -> list[str]:
    return [f.name for f in fields(ModelParams)]


def lil_bound(t: float, variance: float = 0.25) -> float:
    """sqrt(2*variance*loglog(t)/t), the iterated-logarithm deviation scale."""
    if t <= math.e:
        return math.inf if t <= 1 else math.sqrt(max(0.0, 2 * variance * math.log(math.log(t))) / t)
    return math.sqrt(2 * variance * math.log(math.log(t)) / t)
