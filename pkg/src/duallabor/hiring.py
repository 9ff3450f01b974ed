"""TLM investment thresholds under parity, group-blind and statistical-discrimination hiring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .market import (
    FunctionalForms,
    ModelError,
    ModelParams,
    RangeViolation,
    RootNotBracketed,
    bisect,
    QualProb,
    quantile,
)

PARITY = "parity"
BLIND = "blind"
STATDISC = "statdisc"

# investment search ceiling for the statistical-discrimination cutoff
ETA_CEILING = 1e3


class DegenerateLikelihood(ModelError):
    pass


class CutoffUnreachable(ModelError):
    pass


@dataclass(frozen=True)
class HiringRegime:
    tag: str = PARITY
    xi_B: float = 0.3
    xi_W: float = 0.7
    signal_noise: float = 0.05
    # posterior hiring cutoff; None clears the TLM at ell
    cutoff: float | None = None
    # "reputation": priors track lagged group reputation; "static": keep xi_B, xi_W
    prior_dynamics: str = "reputation"

    def __post_init__(self):
        if self.tag not in (PARITY, BLIND, STATDISC):
            raise RangeViolation(f"unknown regime {self.tag!r}")
        if self.tag == STATDISC:
            for name in ("xi_B", "xi_W", "cutoff"):
                v = getattr(self, name)
                if v is None and name == "cutoff":
                    continue
                if not 0.0 < v < 1.0:
                    raise RangeViolation(f"{name}={v} must lie in (0, 1)")
            if not self.signal_noise > 0:
                raise RangeViolation("signal_noise must be > 0")
            if self.prior_dynamics not in ("static", "reputation"):
                raise RangeViolation(f"prior_dynamics={self.prior_dynamics!r}")

    def prior(self, group: str) -> float:
        return self.xi_B if group == "B" else self.xi_W


@dataclass(frozen=True)
class ThresholdSet:
    eta_hat_B: float
    eta_hat_W: float
    theta_star_B: float
    theta_star_W: float
    k_B: float
    hired_B: float  # within-group hired mass 1 - F(theta_star_B)
    hired_W: float

    def eta(self, group):
        return self.eta_hat_B if group == "B" else self.eta_hat_W

    def theta(self, group):
        return self.theta_star_B if group == "B" else self.theta_star_W

    def hired(self, group):
        return self.hired_B if group == "B" else self.hired_W

    def as_tuple(self):
        return (self.eta_hat_B, self.eta_hat_W, self.theta_star_B, self.theta_star_W, self.k_B)


def _eta_for(pi, theta, w, forms):
    c = forms.invest_cost
    if hasattr(c, "eta_at"):
        return float(c.eta_at(pi, theta, w))
    return bisect(lambda eta: c(pi, theta, eta) - w, 0.0, ETA_CEILING)


def _theta_for(pi, eta, w, forms):
    """Ability cutoff at which investing ``eta`` costs exactly the wage, clipped to the support."""
    lo, hi = forms.ability.support
    c = forms.invest_cost
    if hasattr(c, "theta_at"):
        theta = float(c.theta_at(pi, eta, w))
    else:
        f = lambda th: w - c(pi, th, eta)  # noqa: E731
        if f(lo) >= 0:
            theta = lo
        elif f(hi) < 0:
            theta = hi
        else:
            theta = bisect(f, lo, hi)
    return min(max(theta, lo), hi)


def _assemble(eta_B, eta_W, th_B, th_W, p, forms):
    F = forms.ability
    h_B = float(1.0 - F.cdf(th_B)) if math.isfinite(eta_B) else 0.0
    h_W = float(1.0 - F.cdf(th_W)) if math.isfinite(eta_W) else 0.0
    mass = p.sigma_B * h_B + (1 - p.sigma_B) * h_W
    k_B = p.sigma_B * h_B / mass if mass > 0 else 0.0
    return ThresholdSet(eta_B, eta_W, th_B, th_W, k_B, h_B, h_W)


def parity_thresholds(pi_B, pi_W, w, p: ModelParams, forms: FunctionalForms) -> ThresholdSet:
    """Group thresholds that admit the top ``ell`` of each group's ability distribution."""
    if not w > 0:
        raise RootNotBracketed(f"wage {w} admits no investment")
    theta = quantile(forms.ability, 1.0 - p.ell)
    eta_B = _eta_for(pi_B, theta, w, forms)
    eta_W = _eta_for(pi_W, theta, w, forms)
    ts = _assemble(eta_B, eta_W, theta, theta, p, forms)
    # k_B is sigma_B by construction; avoid rounding drift in the ratio
    return ThresholdSet(eta_B, eta_W, theta, theta, p.sigma_B, ts.hired_B, ts.hired_W)


def group_blind_threshold(pi_B, pi_W, w, p: ModelParams, forms: FunctionalForms) -> ThresholdSet:
    """Single investment threshold whose total hired mass across both groups is ``ell``."""
    if not w > 0:
        raise RootNotBracketed(f"wage {w} admits no investment")
    F = forms.ability

    def excess(eta):
        th_B = _theta_for(pi_B, eta, w, forms)
        th_W = _theta_for(pi_W, eta, w, forms)
        hired = p.sigma_B * (1 - F.cdf(th_B)) + (1 - p.sigma_B) * (1 - F.cdf(th_W))
        return float(hired) - p.ell

    # bracket: zero investment hires everyone, a large one hires nobody
    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
        if hi > ETA_CEILING:
            raise RootNotBracketed("no investment level reduces the hired mass to ell")
    eta = bisect(excess, 0.0, hi)
    th_B = _theta_for(pi_B, eta, w, forms)
    th_W = _theta_for(pi_W, eta, w, forms)
    return _assemble(eta, eta, th_B, th_W, p, forms)


# ---------------------------------------------------------------------------
# statistical discrimination

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite_e.hermegauss(40)
_GH_WEIGHTS = _GH_WEIGHTS / _GH_WEIGHTS.sum()
_SQRT2 = math.sqrt(2.0)


def _norm_cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


def signal_likelihoods(eta, regime: HiringRegime, forms: FunctionalForms):
    """Likelihoods (p_Q, p_U) of observing investment ``eta``.

    The observed level is the true level blurred by Gaussian noise of scale
    ``regime.signal_noise``, and a worker at true level x is qualified with
    probability gamma(x), so p_Q is gamma smoothed by the noise kernel.
    """
    s = regime.signal_noise
    q = forms.qual_prob
    if isinstance(q, QualProb):
        # E[exp(-a max(X, 0))] for X ~ N(eta, s^2), in closed form
        a = q.a
        tail = math.exp(-a * eta + 0.5 * a * a * s * s) * _norm_cdf((eta - a * s * s) / s)
        p_u = _norm_cdf(-eta / s) + tail
        return 1.0 - p_u, p_u
    x = np.maximum(eta + s * _GH_NODES, 0.0)
    p_q = float(np.dot(_GH_WEIGHTS, q(x)))
    return p_q, 1.0 - p_q


def posterior_from(prior, p_q, p_u):
    num = p_q * prior
    den = num + (1.0 - prior) * p_u
    if den == 0:
        raise DegenerateLikelihood("both signal likelihoods vanish")
    return num / den


def stat_disc_posterior(group, eta_observed, regime: HiringRegime, forms: FunctionalForms) -> float:
    p_q, p_u = signal_likelihoods(eta_observed, regime, forms)
    return posterior_from(regime.prior(group), p_q, p_u)


def stat_disc_eta(prior, cutoff, regime, forms):
    """Smallest observed investment whose posterior reaches ``cutoff``."""
    post = lambda eta: posterior_from(prior, *signal_likelihoods(eta, regime, forms))  # noqa: E731
    if post(0.0) >= cutoff:
        return 0.0
    if post(ETA_CEILING) < cutoff:
        raise CutoffUnreachable(f"posterior never reaches {cutoff} for prior {prior}")
    hi = 1.0
    while post(hi) < cutoff:
        hi *= 2.0
    return bisect(lambda eta: post(eta) - cutoff, 0.0, hi)


def _stat_disc_fixed(pi_B, pi_W, w, p, regime, forms, cutoff):
    etas, thetas = {}, {}
    _, sup = forms.ability.support
    for group, pi in (("B", pi_B), ("W", pi_W)):
        try:
            etas[group] = stat_disc_eta(regime.prior(group), cutoff, regime, forms)
            thetas[group] = _theta_for(pi, etas[group], w, forms)
        except CutoffUnreachable:
            etas[group], thetas[group] = math.inf, sup
    return _assemble(etas["B"], etas["W"], thetas["B"], thetas["W"], p, forms)


def stat_disc_thresholds(pi_B, pi_W, w, p: ModelParams, regime: HiringRegime, forms: FunctionalForms) -> ThresholdSet:
    """Group-specific thresholds from the firm's posterior beliefs.

    With ``regime.cutoff`` set, each group's threshold is the least
    investment whose posterior reaches it; a group that can never reach it
    is excluded (threshold ``inf``, no TLM share). With ``cutoff=None`` the
    firm hires the ``ell`` applicants with the highest posteriors, i.e. the
    cutoff is the posterior level at which the TLM clears.
    """
    if not w > 0:
        raise RootNotBracketed(f"wage {w} admits no investment")
    if regime.cutoff is not None:
        return _stat_disc_fixed(pi_B, pi_W, w, p, regime, forms, regime.cutoff)

    F = forms.ability
    xi_W = regime.prior("W")
    xi_B = regime.prior("B")

    def etas_for(eta_W):
        q = posterior_from(xi_W, *signal_likelihoods(eta_W, regime, forms))
        try:
            eta_B = stat_disc_eta(xi_B, q, regime, forms)
        except CutoffUnreachable:
            eta_B = math.inf
        return eta_B, eta_W

    def excess(eta_W):
        eta_B, _ = etas_for(eta_W)
        hired = (1 - p.sigma_B) * (1 - F.cdf(_theta_for(pi_W, eta_W, w, forms)))
        if math.isfinite(eta_B):
            hired += p.sigma_B * (1 - F.cdf(_theta_for(pi_B, eta_B, w, forms)))
        return float(hired) - p.ell

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
        if hi > ETA_CEILING:
            raise RootNotBracketed("no posterior cutoff reduces the hired mass to ell")
    if excess(0.0) <= 0:
        eta_W = 0.0
    else:
        eta_W = bisect(excess, 0.0, hi)
    eta_B, eta_W = etas_for(eta_W)
    _, sup = F.support
    th_B = _theta_for(pi_B, eta_B, w, forms) if math.isfinite(eta_B) else sup
    return _assemble(eta_B, eta_W, th_B, _theta_for(pi_W, eta_W, w, forms), p, forms)


def posterior_cutoff(ts: ThresholdSet, regime: HiringRegime, forms: FunctionalForms) -> float:
    """Posterior level at which a stat-disc threshold set hires (group W side)."""
    return stat_disc_posterior("W", ts.eta_hat_W, regime, forms)


def thresholds(pi_B, pi_W, w, p, regime: HiringRegime, forms) -> ThresholdSet:
    if regime.tag == PARITY:
        return parity_thresholds(pi_B, pi_W, w, p, forms)
    if regime.tag == BLIND:
        return group_blind_threshold(pi_B, pi_W, w, p, forms)
    return stat_disc_thresholds(pi_B, pi_W, w, p, regime, forms)


def invest_decision(theta, group, ts: ThresholdSet, pi, w, forms) -> float:
    """Investment chosen by a worker of ability ``theta``: the group threshold or nothing."""
    eta = ts.eta(group)
    # relative slack keeps the exact cutoff ability on the investing side
    if math.isfinite(eta) and forms.invest_cost(pi, theta, eta) <= w * (1 + 1e-12):
        return eta
    return 0.0
