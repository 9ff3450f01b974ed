import csv
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duallabor.contracts import (
    HorizonTooLarge,
    ReputationState,
    bellman_residual,
    delta_reaches,
    delta_schedule,
    effort_cutoffs,
    hire_threshold,
    one_shot_effort,
    plm_hire,
    solve_dp,
)
from duallabor.market import ModelParams, default_forms

import oracles


class ConstEffort:
    """Effort cost that ignores ability (to pin e_rho(theta) at a chosen value)."""

    def __init__(self, value):
        self.value = value

    def __call__(self, rho, theta):
        return self.value + 0.0 * np.asarray(theta, dtype=float)


class SlowEffort:
    """Decreasing effort cost with no closed-form inverse."""

    def __call__(self, rho, theta):
        k = 0.2 if rho == "Q" else 0.45
        return k * np.exp(-np.asarray(theta, dtype=float))


class TestReputationState:
    def test_value_convention(self):
        assert ReputationState().value == 0.0
        assert ReputationState(3, 4).value == 0.75
        assert ReputationState(1, 2).after(True) == ReputationState(2, 3)

    def test_invalid(self):
        with pytest.raises(ValueError):
            ReputationState(3, 2)


class TestEffortCutoffs:
    def test_closed_form(self, params, forms):
        w = 0.8
        th_Q, th_U = effort_cutoffs(w, params, forms)
        assert th_Q == pytest.approx(0.2 / (w * 0.3) - 0.1, abs=1e-12)
        assert th_U == pytest.approx(0.45 / (w * 0.6) - 0.1, abs=1e-12)

    def test_bisection_path(self, params, forms):
        f = replace(forms, effort_cost=SlowEffort())
        th_Q, _ = effort_cutoffs(0.5, params, f)
        assert th_Q == pytest.approx(math.log(0.2 / (0.5 * 0.3)), abs=1e-9)

    def test_everyone_high(self, params, forms):
        th_Q, th_U = effort_cutoffs(50.0, params, forms)
        assert (th_Q, th_U) == (0.0, 0.0)

    def test_zero_wage(self, params, forms):
        th_Q, th_U = effort_cutoffs(0.0, params, forms)
        assert (th_Q, th_U) == (1.0, 1.0)
        assert one_shot_effort(1.0, "Q", 0.0, params, forms) == "L"


class TestOneShot:
    @pytest.mark.parametrize("e, expected", [(0.3, "H"), (0.5, "L"), (0.4, "H")])
    def test_examples(self, forms, e, expected):
        p = replace(ModelParams(), p_Q=0.5, p_U=0.3)
        f = replace(forms, effort_cost=ConstEffort(e))
        assert one_shot_effort(0.5, "Q", 1.0, p, f) == expected


class TestDelta:
    def test_lil_reference_at_100(self, params):
        ref = math.sqrt(0.5 * math.log(math.log(100)) / 100)
        assert ref == pytest.approx(0.0874, abs=5e-5)
        assert delta_schedule(100, params.c_delta) > ref

    def test_monotone_scan(self, params):
        d = delta_schedule(np.arange(10, 1001), params.c_delta)
        assert np.all(np.diff(d) < 0)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 5.0])
    def test_above_lil_bound(self, c):
        t = np.arange(3, 200_001)
        d = delta_schedule(t, c)
        assert np.all(d > np.sqrt(0.5 * np.log(np.log(t)) / t))

    def test_reaches_one_percent(self, params):
        T = delta_reaches(1e-2, params.c_delta)
        assert delta_schedule(T, params.c_delta) < 1e-2 <= delta_schedule(T - 1, params.c_delta)
        assert 5_000 < T < 50_000
        assert delta_schedule(T, params.c_delta) == pytest.approx(oracles.delta(T, params.c_delta), abs=1e-15)


class TestHire:
    def test_fresh_history(self, params):
        assert plm_hire(ReputationState(0, 0), params)
        assert hire_threshold(0, params) == -np.inf

    def test_perfect_rate(self, params):
        for n in (1, 10, 1000):
            assert plm_hire(ReputationState(round(params.p_H * n), n), params)

    def test_p_H_exactly(self, params):
        assert plm_hire(ReputationState(9, 10), params)
        assert plm_hire(ReputationState(900, 1000), params)

    def test_zero_reputation(self, params):
        assert not plm_hire(ReputationState(0, 5000), params)

    def test_weak_inequality(self):
        n = 40
        d = float(delta_schedule(n, 2.0))
        # place p_H so that the threshold falls exactly on a representable success share
        p = replace(ModelParams(), p_H=30 / 40 + d)
        assert p.p_H - delta_schedule(n, p.c_delta) == 30 / 40
        assert plm_hire(ReputationState(30, n), p)
        assert not plm_hire(ReputationState(29, n), p)


class TestDP:
    @pytest.mark.parametrize("theta, rho, w", [(0.3, "Q", 0.8), (0.9, "U", 1.0), (0.05, "U", 0.4), (0.6, "Q", 0.2)])
    def test_bellman_residual(self, params, forms, theta, rho, w):
        table = solve_dp(theta, rho, w, params, forms)
        assert bellman_residual(table, params, forms) < 1e-12

    def test_terminal_and_shape(self, params, forms):
        table = solve_dp(0.5, "Q", 1.0, params, forms, horizon=7)
        assert np.all(table.value[7, :8] == 0)
        assert np.isnan(table.value[2, 3])
        rows = list(table.rows())
        assert len(rows) == 8 * 9 // 2
        assert all(e in (0.0, 1.0) for *_, e in rows)

    def test_one_step_horizon(self, params, forms):
        table = solve_dp(0.5, "Q", 1.0, params, forms, horizon=1)
        assert table.policy(ReputationState()) == 0.0
        assert table.at(ReputationState()) == pytest.approx(1.0)

    def test_value_nonnegative_and_monotone_in_successes(self, params, forms):
        for theta, rho, w in [(0.2, "Q", 0.6), (0.8, "U", 1.0), (0.5, "Q", 0.3)]:
            table = solve_dp(theta, rho, w, params, forms)
            for n in range(params.horizon_N + 1):
                row = table.value[n, : n + 1]
                assert np.all(row >= 0)
                assert np.all(np.diff(row) >= -1e-12)

    def test_budget(self, params, forms):
        with pytest.raises(HorizonTooLarge):
            solve_dp(0.5, "Q", 1.0, params, forms, horizon=200, state_budget=1000)

    def test_csv_dump(self, params, forms, tmp_path):
        table = solve_dp(0.5, "U", 0.9, params, forms, horizon=4)
        path = tmp_path / "v.csv"
        table.to_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["length", "successes", "steps_remaining", "value", "effort_prob"]
        assert len(rows) == 1 + 15
        assert float(rows[1][3]) == table.at(ReputationState())

    @pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("theta, rho, w", [(0.3, "Q", 1.0), (0.7, "U", 0.6), (0.1, "U", 1.0)])
    def test_matches_policy_enumeration(self, params, forms, N, theta, rho, w):
        p = replace(params, horizon_N=N)
        table = solve_dp(theta, rho, w, p, forms)
        e = float(forms.effort_cost(rho, theta))
        best = oracles.enumerate_policies(N, e, w, p.p_H, p.p_Q if rho == "Q" else p.p_U, p.lambda_exit, p.c_delta)
        assert table.at(ReputationState()) == pytest.approx(best, abs=1e-9)

    @pytest.mark.parametrize("N", [6, 8])
    def test_matches_history_expectimax(self, params, forms, N):
        p = replace(params, horizon_N=N, c_delta=0.5)
        for theta, rho, w in [(0.4, "Q", 0.9), (0.9, "U", 1.0)]:
            table = solve_dp(theta, rho, w, p, forms)
            e = float(forms.effort_cost(rho, theta))
            best = oracles.expectimax_histories(N, e, w, p.p_H, p.p_Q if rho == "Q" else p.p_U, p.lambda_exit, p.c_delta)
            assert table.at(ReputationState()) == pytest.approx(best, abs=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(theta=st.floats(0, 1), w=st.floats(0.05, 1.0), rho=st.sampled_from("QU"), lam=st.floats(0.01, 0.9))
    def test_residual_property(self, theta, w, rho, lam):
        p = replace(ModelParams(), lambda_exit=lam, horizon_N=20)
        forms = default_forms(p)
        table = solve_dp(theta, rho, w, p, forms)
        assert bellman_residual(table, p, forms) < 1e-12

    def test_costless_effort_is_always_high(self, params, forms):
        f = replace(forms, effort_cost=ConstEffort(0.0))
        table = solve_dp(0.5, "U", 1.0, params, f)
        eff = table.effort[: params.horizon_N]
        assert np.all(eff[~np.isnan(eff)] == 1.0)
