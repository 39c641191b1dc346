"""Ladder clock: walk rates, metrics, master equation, sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quenchclock import (
    LadderRates,
    LadderSpec,
    NotReachable,
    Rates,
    UnstableStep,
    ZeroRates,
    clock_metrics,
    evolve_master,
    ladder_rates,
    qubit_steady_state,
    resolve_gamma,
    sample_tick_times,
    simulate_ticks,
    solve_first_passage,
)


class TestSteadyState:
    def test_balanced(self):
        ss = qubit_steady_state(Rates(gamma_up=0.4, gamma_down=0.4))
        assert ss.p_excited == 0.5
        assert ss.p_ground == 0.5
        assert ss.magnetization == 0.0

    def test_pumped_three_to_one(self):
        ss = qubit_steady_state(Rates(gamma_up=3.0, gamma_down=1.0))
        assert ss.p_excited == pytest.approx(0.75)
        assert ss.magnetization == pytest.approx(0.5)
        assert ss.inverted

    def test_pure_decay(self):
        ss = qubit_steady_state(Rates(gamma_up=0.0, gamma_down=2.0))
        assert ss.p_excited == 0.0
        assert ss.magnetization == -1.0

    def test_zero_rates(self):
        with pytest.raises(ZeroRates):
            qubit_steady_state(Rates(gamma_up=0.0, gamma_down=0.0))


class TestLadderRates:
    def test_second_order_values(self):
        lad = LadderSpec(d=10, epsilon_w=1.0, g=0.2)
        lr = ladder_rates(Rates(gamma_up=3.0, gamma_down=1.0), lad)
        # scale = g^2/(gamma_up+gamma_down) = 0.01; m = 1/2
        assert lr.p_up == pytest.approx(0.015, rel=1e-14)
        assert lr.p_down == pytest.approx(0.005, rel=1e-14)
        assert lr.bias == pytest.approx(0.5, rel=1e-14)

    def test_validity_ratios_recorded(self):
        lad = LadderSpec(d=4, epsilon_w=1.0, g=0.2, Gamma=8.0)
        lr = ladder_rates(Rates(gamma_up=3.0, gamma_down=1.0), lad)
        assert lr.g_over_bath == pytest.approx(0.05)
        assert lr.g_over_emission == pytest.approx(0.025)
        assert lr.weak_coupling
        strong = ladder_rates(Rates(gamma_up=3.0, gamma_down=1.0),
                              LadderSpec(d=4, epsilon_w=1.0, g=2.0, Gamma=8.0))
        assert not strong.weak_coupling

    def test_zero_environment(self):
        with pytest.raises(ZeroRates):
            ladder_rates(Rates(gamma_up=0.0, gamma_down=0.0),
                         LadderSpec(d=3, epsilon_w=1.0, g=0.1))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            LadderSpec(d=1, epsilon_w=1.0, g=0.1)
        with pytest.raises(ValueError):
            LadderSpec(d=5, epsilon_w=-2.0, g=0.1)
        with pytest.raises(ValueError):
            LadderSpec(d=5, epsilon_w=1.0, g=0.1, Gamma=0.0)


class TestMetrics:
    def test_three_to_one_ladder(self):
        m = clock_metrics(LadderRates(p_up=3.0, p_down=1.0), d=10)
        assert m.nu_tick == pytest.approx(0.2, rel=1e-15)
        assert m.accuracy_N == pytest.approx(5.0, rel=1e-15)
        assert m.entropy_per_tick == pytest.approx(10.0 * math.log(3.0), rel=1e-15)
        assert m.relative_bias == pytest.approx(0.5, rel=1e-15)
        assert not m.weak_bias

    def test_unidirectional_sentinels(self):
        m = clock_metrics(LadderRates(p_up=2.0, p_down=0.0), d=7)
        assert m.accuracy_N == 7.0
        assert m.entropy_per_tick == math.inf
        assert m.tur_ratio == 0.0
        down = clock_metrics(LadderRates(p_up=0.0, p_down=2.0), d=7)
        assert down.entropy_per_tick == -math.inf

    def test_weak_bias_report(self):
        m = clock_metrics(LadderRates(p_up=1.02, p_down=1.0), d=10)
        assert m.weak_bias
        # in this regime accuracy approaches half the entropy cost
        assert m.accuracy_N == pytest.approx(m.entropy_per_tick / 2.0, rel=1e-3)

    def test_balanced_walk(self):
        m = clock_metrics(LadderRates(p_up=1.0, p_down=1.0), d=5)
        assert m.nu_tick == 0.0
        assert m.accuracy_N == 0.0
        assert m.entropy_per_tick == 0.0
        assert math.isnan(m.tur_ratio)

    def test_tur_bound(self):
        for ratio in (1.1, 2.0, 5.0, 50.0):
            m = clock_metrics(LadderRates(p_up=ratio, p_down=1.0), d=12)
            assert m.tur_ratio <= 1.0 + 1e-12


@given(gu=st.floats(1e-6, 1e3), gd=st.floats(1e-6, 1e3),
       g=st.floats(1e-4, 10.0), d=st.integers(2, 200))
@settings(max_examples=200, deadline=None)
def test_rate_sum_identity(gu, gd, g, d):
    lad = LadderSpec(d=d, epsilon_w=1.0, g=g)
    lr = ladder_rates(Rates(gamma_up=gu, gamma_down=gd), lad)
    expected = 2.0 * g * g / (gu + gd)
    assert abs(lr.total - expected) <= 1e-15 * expected


@given(gu=st.floats(1e-6, 1e3), gd=st.floats(1e-6, 1e3), d=st.integers(2, 500))
@settings(max_examples=200, deadline=None)
def test_accuracy_entropy_identity(gu, gd, d):
    m = clock_metrics(LadderRates(p_up=gu, p_down=gd), d=d)
    expected = d * math.tanh(m.entropy_per_tick / (2.0 * d))
    assert m.accuracy_N == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert abs(m.accuracy_N) <= d * (1.0 + 1e-15)


@given(gu=st.floats(1e-3, 1e2), gd=st.floats(1e-3, 1e2),
       c=st.floats(1e-3, 1e3), d=st.integers(2, 50))
@settings(max_examples=100, deadline=None)
def test_rate_rescaling_moves_speed_not_accuracy(gu, gd, c, d):
    lad = LadderSpec(d=d, epsilon_w=1.0, g=0.1)
    m1 = clock_metrics(ladder_rates(Rates(gamma_up=gu, gamma_down=gd), lad), d)
    m2 = clock_metrics(ladder_rates(Rates(gamma_up=c * gu, gamma_down=c * gd), lad), d)
    assert m2.accuracy_N == pytest.approx(m1.accuracy_N, rel=1e-12)
    assert m2.nu_tick == pytest.approx(m1.nu_tick / c, rel=1e-12)


class TestResolveGamma:
    def test_default_is_fast_reset(self):
        lad = LadderSpec(d=6, epsilon_w=1.0, g=0.5)
        lr = LadderRates(p_up=0.3, p_down=0.1)
        assert resolve_gamma(lad, lr) == pytest.approx(10.0 * 0.4 * 6, rel=1e-15)

    def test_explicit_wins(self):
        lad = LadderSpec(d=6, epsilon_w=1.0, g=0.5, Gamma=2.5)
        assert resolve_gamma(lad, LadderRates(p_up=0.3, p_down=0.1)) == 2.5


class TestFirstPassage:
    def test_two_level_hand_solution(self):
        # d=2, p_down=0: tick time = Exp(p) + Exp(Gamma);
        # mean = 1/p + 1/Gamma, var = 1/p^2 + 1/Gamma^2
        lr = LadderRates(p_up=0.7, p_down=0.0)
        lad = LadderSpec(d=2, epsilon_w=1.0, g=0.1, Gamma=11.0)
        fp = solve_first_passage(lr, lad)
        assert fp.mean_tick_time == pytest.approx(1.5194805194805194, rel=1e-14)
        assert fp.var_tick_time == pytest.approx(2.0490807893405303, rel=1e-13)
        assert fp.exact_N == pytest.approx(fp.mean_tick_time**2 / fp.var_tick_time, rel=1e-15)
        assert fp.exact_rate == pytest.approx(1.0 / fp.mean_tick_time, rel=1e-15)

    def test_unidirectional_limit_counts_stages(self):
        # p_down=0 and instantaneous emission: d-1 iid climbs, N -> d-1
        lr = LadderRates(p_up=1.0, p_down=0.0)
        lad = LadderSpec(d=9, epsilon_w=1.0, g=0.1, Gamma=1e9)
        fp = solve_first_passage(lr, lad)
        assert fp.exact_N == pytest.approx(8.0, rel=1e-6)
        assert fp.mean_tick_time == pytest.approx(8.0, rel=1e-6)

    def test_monotone_in_bias(self):
        lad = LadderSpec(d=12, epsilon_w=1.0, g=0.1, Gamma=50.0)
        ns = [solve_first_passage(LadderRates(p_up=r, p_down=1.0), lad).exact_N
              for r in (1.5, 2.0, 4.0, 10.0, 100.0)]
        assert all(b > a for a, b in zip(ns, ns[1:]))

    def test_not_reachable(self):
        lad = LadderSpec(d=3, epsilon_w=1.0, g=0.1)
        with pytest.raises(NotReachable):
            solve_first_passage(LadderRates(p_up=0.0, p_down=1.0), lad)


class TestMaster:
    def test_two_level_flux_approaches_up_rate(self):
        # fast emission drains the top as soon as it fills: flux -> p_up
        lr = LadderRates(p_up=0.05, p_down=0.0)
        lad = LadderSpec(d=2, epsilon_w=1.0, g=0.1, Gamma=5.0)
        fp = solve_first_passage(lr, lad)
        tr = evolve_master(lr, lad, t_max=12.0 / fp.exact_rate, n_records=101)
        assert tr.tick_rate[-1] == pytest.approx(0.05, rel=0.015)

    def test_flux_matches_renewal_rate(self):
        lr = LadderRates(p_up=3.0, p_down=1.0)
        lad = LadderSpec(d=8, epsilon_w=1.0, g=0.1)
        fp = solve_first_passage(lr, lad)
        tr = evolve_master(lr, lad, t_max=40.0 / fp.exact_rate, n_records=81)
        assert tr.tick_rate[-1] == pytest.approx(fp.exact_rate, rel=1e-8)
        assert tr.probability_drift < 1e-9
        # accumulated expected ticks track the flux integral
        integral = np.trapezoid(tr.tick_rate, tr.times)
        assert tr.ticks[-1] == pytest.approx(integral, rel=1e-3)

    def test_populations_normalized_and_positive(self):
        lr = LadderRates(p_up=2.0, p_down=0.5)
        lad = LadderSpec(d=5, epsilon_w=1.0, g=0.1, Gamma=30.0)
        tr = evolve_master(lr, lad, t_max=20.0, n_records=41)
        assert np.all(tr.populations > -1e-12)
        assert np.allclose(tr.populations.sum(axis=1), 1.0, atol=1e-9)

    def test_unstable_step_rejected(self):
        lr = LadderRates(p_up=1.0, p_down=0.5)
        lad = LadderSpec(d=10, epsilon_w=1.0, g=0.1, Gamma=4.0)
        # bound is 0.1 / max(p_up d, p_down d, Gamma) = 0.1/10
        with pytest.raises(UnstableStep):
            evolve_master(lr, lad, t_max=5.0, dt=0.02)
        evolve_master(lr, lad, t_max=5.0, dt=0.009)  # under the bound: fine


class TestSampling:
    LAD = LadderSpec(d=4, epsilon_w=1.0, g=0.1, Gamma=40.0)
    LR = LadderRates(p_up=3.0, p_down=1.0)

    def test_bitwise_reproducible(self):
        a = sample_tick_times(self.LR, self.LAD, 3000, seed=123)
        b = sample_tick_times(self.LR, self.LAD, 3000, seed=123)
        assert np.array_equal(a, b)

    def test_stream_per_trajectory_prefix(self):
        # trajectory j is keyed by (seed, j): a shorter run is a prefix
        long = sample_tick_times(self.LR, self.LAD, 5000, seed=5)
        short = sample_tick_times(self.LR, self.LAD, 1200, seed=5)
        assert np.array_equal(long[:1200], short)

    def test_seed_changes_sample(self):
        a = sample_tick_times(self.LR, self.LAD, 1000, seed=1)
        b = sample_tick_times(self.LR, self.LAD, 1000, seed=2)
        assert not np.array_equal(a, b)

    def test_statistics_against_exact(self):
        stats = simulate_ticks(self.LR, self.LAD, 20000, seed=77)
        fp = solve_first_passage(self.LR, self.LAD)
        assert stats.mean_tick_time == pytest.approx(fp.mean_tick_time, rel=0.03)
        assert stats.empirical_accuracy == pytest.approx(fp.exact_N, rel=0.06)
        assert stats.n_trajectories == 20000
        assert stats.seed == 77

    def test_two_level_hand_distribution(self):
        lr = LadderRates(p_up=0.7, p_down=0.0)
        lad = LadderSpec(d=2, epsilon_w=1.0, g=0.1, Gamma=11.0)
        t = sample_tick_times(lr, lad, 40000, seed=3)
        assert t.mean() == pytest.approx(1.0 / 0.7 + 1.0 / 11.0, rel=0.02)
        assert t.var(ddof=1) == pytest.approx(1.0 / 0.49 + 1.0 / 121.0, rel=0.05)

    def test_validation(self):
        with pytest.raises(ValueError):
            simulate_ticks(self.LR, self.LAD, 1, seed=0)
        with pytest.raises(ValueError):
            sample_tick_times(self.LR, self.LAD, 10, seed=-1)
        with pytest.raises(ValueError):
            sample_tick_times(self.LR, self.LAD, 10, seed=2**64)
        with pytest.raises(NotReachable):
            sample_tick_times(LadderRates(p_up=0.0, p_down=1.0), self.LAD, 10, seed=0)
