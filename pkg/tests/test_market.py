import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from duallabor.market import (
    BetaAbility,
    InvestCost,
    ModelParams,
    NegativeSupply,
    NonInvertible,
    OrderingViolation,
    RangeViolation,
    RootNotBracketed,
    UniformAbility,
    WageCurve,
    bisect,
    default_forms,
    lil_bound,
    quantile,
    validate_params,
    wage,
)

import oracles


def test_defaults_are_valid(params):
    assert validate_params(params) is None


@pytest.mark.parametrize(
    "change, error",
    [
        (dict(p_Q=0.2, p_U=0.3), OrderingViolation),
        (dict(p_H=0.5, p_Q=0.6), OrderingViolation),
        (dict(ell=1.0), RangeViolation),
        (dict(sigma_B=0.0), RangeViolation),
        (dict(w_max=0.1, w_min=0.2), OrderingViolation),
        (dict(w_min=-0.1), RangeViolation),
        (dict(tau=0), RangeViolation),
        (dict(kappa=0.0), RangeViolation),
        (dict(wage_update_prob=0.0), RangeViolation),
        (dict(reputation_norm="both"), RangeViolation),
    ],
)
def test_invalid_params(change, error):
    with pytest.raises(error):
        validate_params(replace(ModelParams(), **change))


def test_first_violation_is_reported():
    p = replace(ModelParams(), ell=2.0, p_Q=0.1)
    with pytest.raises(RangeViolation, match="ell"):
        validate_params(p)


class TestWage:
    def test_endpoints(self, forms, params):
        assert wage(0.0, forms) == params.w_max
        assert abs(wage(1e6, forms) - params.w_min) < 1e-6

    def test_half_way(self, forms):
        # exp(-s g) = 1/2 at g = ln 2 / s
        assert wage(math.log(2.0), forms) == pytest.approx(0.6, abs=1e-12)
        s = 2.5
        f = replace(forms, wage_curve=WageCurve(1.0, 0.2, s))
        assert wage(math.log(2.0) / s, f) == pytest.approx(oracles.wage_curve(math.log(2) / s, s=s), abs=1e-12)

    def test_negative_supply(self, forms):
        with pytest.raises(NegativeSupply):
            wage(-1e-9, forms)

    def test_monotone(self, forms):
        g = np.linspace(0, 20, 5001)
        w = forms.wage_curve(g)
        assert np.all(np.diff(w) <= 0)
        assert np.all((w >= 0.2) & (w <= 1.0))

    def test_pinned(self, forms):
        f = forms.pinned()
        assert wage(0.7, f) == 1.0


class TestQuantile:
    def test_uniform(self):
        F = UniformAbility()
        assert quantile(F, 0.5) == 0.5
        assert quantile(F, 0.0) == 0.0

    def test_beta_symmetric(self):
        F = BetaAbility(2, 2)
        assert quantile(F, 0.5) == pytest.approx(0.5, abs=1e-12)
        assert quantile(F, 0.5) == pytest.approx(oracles.quantile_by_bisection(F.cdf, 0.5), abs=1e-10)

    @pytest.mark.parametrize("a, b", [(2, 5), (30, 30), (0.7, 1.3)])
    def test_beta_against_scipy(self, a, b):
        F = BetaAbility(a, b)
        for q in (0.01, 0.3, 0.77, 0.999):
            assert quantile(F, q) == pytest.approx(stats.beta.ppf(q, a, b), abs=1e-9)

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        for F in (UniformAbility(), BetaAbility(2, 2), BetaAbility(100, 100), UniformAbility(0.2, 1.4)):
            q = rng.random(1000)
            th = np.array([quantile(F, x) for x in q])
            assert np.max(np.abs(F.cdf(th) - q)) < 1e-8

    def test_cdf_fallback_and_jump(self):
        class Step:
            support = (0.0, 1.0)

            def cdf(self, x):
                return 0.0 if x < 0.5 else 1.0

        class Smooth:
            support = (0.0, 1.0)

            def cdf(self, x):
                return x * x

        assert quantile(Smooth(), 0.25) == pytest.approx(0.5, abs=1e-10)
        with pytest.raises(NonInvertible):
            quantile(Step(), 0.3)

    def test_out_of_range(self):
        with pytest.raises(RangeViolation):
            quantile(UniformAbility(), 1.5)


def test_bisect_needs_bracket():
    assert bisect(lambda x: x - 0.3, 0, 1) == pytest.approx(0.3, abs=1e-10)
    with pytest.raises(RootNotBracketed):
        bisect(lambda x: x + 1, 0, 1)


class TestCosts:
    def test_invest_cost_closed_form(self):
        c = InvestCost(beta=1.0, theta0=0.1)
        assert c(0.5, 0.5, 0.4) == pytest.approx(1.0)
        assert c.eta_at(0.5, 0.5, 1.0) == pytest.approx(0.4)
        assert c.theta_at(0.5, 0.4, 1.0) == pytest.approx(0.5)

    @settings(max_examples=200, deadline=None)
    @given(
        pi=st.floats(0, 0.99),
        theta=st.floats(0, 0.99),
        eta=st.floats(0.01, 3),
        beta=st.floats(0.1, 10),
    )
    def test_invest_cost_monotone(self, pi, theta, eta, beta):
        c = InvestCost(beta=beta)
        h = 1e-3
        base = c(pi, theta, eta)
        assert c(pi, theta + h, eta) < base
        assert c(pi, theta, eta + h) > base
        assert c(pi + h, theta, eta) <= base

    def test_effort_costs_ordered(self, forms):
        th = np.linspace(0, 1, 101)
        assert np.all(forms.effort_cost("U", th) > forms.effort_cost("Q", th))
        assert forms.effort_cost.inverse("Q", float(forms.effort_cost("Q", 0.3))) == pytest.approx(0.3)

    def test_qual_prob_shape(self, forms):
        eta = np.linspace(0, 10, 1001)
        gam = forms.qual_prob(eta)
        assert gam[0] == 0.0
        assert np.all(np.diff(gam) >= 0) and gam[-1] <= 1.0


def test_lil_bound_values():
    assert lil_bound(1.0) == math.inf
    assert lil_bound(100) == pytest.approx(math.sqrt(0.5 * math.log(math.log(100)) / 100))


def test_default_forms_follow_params():
    p = replace(ModelParams(), w_max=2.0, w_min=0.5)
    f = default_forms(p)
    assert wage(0.0, f) == 2.0
