import math

import numpy as np
import pytest

from hapticsched import (
    ArrivalCurve,
    ConfigError,
    DivergenceError,
    HapticTrafficModel,
    InfeasibleError,
    LeftoverServiceCurve,
    LeftoverTrafficModel,
    RadioConfig,
    SchedulingScheme,
    combined_violation_bound,
    crossing_time,
    effective_bandwidth,
    horizontal_distance,
    leftover_delay_bound,
    leftover_delay_bound_details,
    leftover_service,
    long_run_rate,
    max_stable_theta,
)

S = SchedulingScheme
LEFTOVER = LeftoverTrafficModel(4.0, 12000.0)


def radio(tti=0.5e-3, t_pg=None, rate=1e6, demand=1e-4):
    return RadioConfig(10, rate, tti, tti, t_pg or 10 * tti, demand)


def haptic(t_ib=2e-3):
    return HapticTrafficModel(1.0, 0.2, t_ib, 50e-3)


class TestCurveShape:
    def test_value_at_zero_is_the_fixed_charge(self):
        curve = LeftoverServiceCurve(S.SEMI_PERSISTENT, radio(), haptic())
        # 2 blocks * 100 kb/s * 0.5 ms = 100 bits/slot; 40 burst grants + 2 edge slots
        assert curve.value(0.0) == pytest.approx(-4200.0, rel=1e-12)
        assert curve.value(0.0) <= 0

    def test_zero_demand_gives_full_capacity_line(self):
        curve = LeftoverServiceCurve(S.DYNAMIC, radio(demand=0.0), haptic())
        u = np.linspace(0.0, 2.5, 777)
        assert np.array_equal(curve.value(u), 1e6 * u)

    def test_demand_schemes_identical_above_both_gates(self):
        u = np.linspace(0.0, 3.0, 1000)
        ds = leftover_service(S.DYNAMIC, radio(), haptic(2.5e-3), u)
        fa = leftover_service(S.FAST_UPLINK, radio(), haptic(2.5e-3), u)
        assert np.allclose(ds, fa, rtol=1e-12)

    @pytest.mark.parametrize("scheme", list(S))
    def test_never_exceeds_full_capacity(self, scheme):
        curve = LeftoverServiceCurve(scheme, radio(), haptic())
        u = np.linspace(0.0, 5.0, 4001)
        assert np.all(curve.value(u) <= 1e6 * u + 1e-9)

    @pytest.mark.parametrize("scheme", list(S))
    def test_period_shift_additivity(self, scheme):
        curve = LeftoverServiceCurve(scheme, radio(), haptic())
        gain = curve.long_run_rate() * 1.0
        for u in (0.1, 0.37, 0.5, 0.93):
            assert curve.value(u + 1.0) - curve.value(u) == pytest.approx(gain, rel=1e-12)

    def test_soft_reservation_dominates_standing_grant(self):
        # sparse spacing 50 ms above the 5 ms grant period: fewer slots consumed
        srr = LeftoverServiceCurve(S.SOFT_RESERVATION, radio(), haptic())
        sps = LeftoverServiceCurve(S.SEMI_PERSISTENT, radio(), haptic())
        u = np.linspace(0.0, 4.0, 2001)
        assert np.all(srr.value(u) >= sps.value(u))

    def test_reserved_schemes_independent_of_burst_spacing(self):
        u = np.linspace(0.0, 3.0, 501)
        for scheme in (S.SEMI_PERSISTENT, S.SOFT_RESERVATION):
            curves = [LeftoverServiceCurve(scheme, radio(), haptic(t)).value(u) for t in (1e-3, 2e-3, 3e-3)]
            assert np.array_equal(curves[0], curves[1])
            assert np.array_equal(curves[1], curves[2])


class TestLongRunRate:
    def test_zero_demand_gives_full_rate(self):
        assert LeftoverServiceCurve(S.DYNAMIC, radio(demand=0.0), haptic()).long_run_rate() == 1e6

    def test_standing_grant_rate_matches_secant_slope(self):
        curve = LeftoverServiceCurve(S.SEMI_PERSISTENT, radio(), haptic())
        rate = long_run_rate(curve)
        assert rate == pytest.approx(980000.0, rel=1e-12)
        u = 1000.0
        secant = (curve.value(u + 1.0) - curve.value(u)) / 1.0
        assert secant == pytest.approx(rate, rel=1e-9)

    def test_saturated_configuration_rejected(self):
        # 10 blocks on 10 channels with a grant every slot leaves nothing
        cfg = RadioConfig(10, 1e6, 1e-3, 1e-3, 1e-3, haptic_demand_norm=1e-3)
        curve = LeftoverServiceCurve(S.SEMI_PERSISTENT, cfg, HapticTrafficModel(1.0, 0.2, 2e-3, 50e-3))
        with pytest.raises(InfeasibleError):
            curve.long_run_rate()


class TestMaxStableTheta:
    def test_solution_satisfies_the_rate_equation(self):
        theta = max_stable_theta(LEFTOVER, 0.98e6)
        star = theta / (1 - 1e-9)
        residual = abs(effective_bandwidth(4.0, 12000.0, star) - 0.98e6) / 0.98e6
        assert residual < 1e-9
        assert effective_bandwidth(4.0, 12000.0, theta) < 0.98e6  # strict stability

    def test_monotone_in_service_rate(self):
        t1 = max_stable_theta(LEFTOVER, 0.5e6)
        t2 = max_stable_theta(LEFTOVER, 1.0e6)
        assert t2 > t1

    def test_rate_near_mean_load_gives_tiny_theta(self):
        lam_sigma = 4.0 * 12000.0
        theta = max_stable_theta(LEFTOVER, lam_sigma * 1.0001)
        assert 0 < theta < 1e-7

    def test_infeasible_below_mean_load(self):
        with pytest.raises(InfeasibleError):
            max_stable_theta(LEFTOVER, 4.0 * 12000.0)


class TestCrossingTime:
    def test_zero_level_zero_demand(self):
        curve = LeftoverServiceCurve(S.DYNAMIC, radio(demand=0.0), haptic())
        assert crossing_time(curve, 0.0) == 0.0

    def test_inverse_on_monotone_tail(self):
        curve = LeftoverServiceCurve(S.SEMI_PERSISTENT, radio(), haptic())
        # pick a point deep inside a rising segment, past the last dip at its level
        u0 = 2.5
        x = curve.value(u0)
        assert curve.value(3.0) > x  # the next dip is already above the level
        assert crossing_time(curve, x) == pytest.approx(u0, abs=1e-12)

    @pytest.mark.parametrize("scheme", list(S))
    def test_defining_property_on_sampled_levels(self, scheme):
        curve = LeftoverServiceCurve(scheme, radio(), haptic())
        for x in (0.0, 150.0, 4200.0, 30000.0, 2.2e6):
            d0 = crossing_time(curve, x)
            ahead = np.linspace(d0, d0 + 3.5, 200001)
            assert np.all(curve.value(ahead) >= x - 1e-6), (scheme, x)
            if d0 > 0:
                before = np.linspace(max(0.0, d0 - 2e-4), d0, 64, endpoint=False)
                assert np.any(curve.value(before) < x + 1e-6), (scheme, x)


class TestDelayBound:
    def test_monotone_in_outage_probability(self):
        d_tight = leftover_delay_bound(S.DYNAMIC, radio(), haptic(), LEFTOVER, 1e-5)
        d_loose = leftover_delay_bound(S.DYNAMIC, radio(), haptic(), LEFTOVER, 1e-2)
        assert d_tight >= d_loose

    def test_demand_schemes_agree_between_gates(self):
        ds = leftover_delay_bound(S.DYNAMIC, radio(), haptic(2.5e-3), LEFTOVER, 1e-5)
        fa = leftover_delay_bound(S.FAST_UPLINK, radio(), haptic(2.5e-3), LEFTOVER, 1e-5)
        assert ds == fa

    def test_antitone_in_demand(self):
        bounds = [
            leftover_delay_bound(S.DYNAMIC, radio(demand=d), haptic(), LEFTOVER, 1e-5)
            for d in (0.5e-4, 1e-4, 2e-4)
        ]
        assert bounds == sorted(bounds)

    def test_complement_convention_is_reproducible_and_smaller(self):
        details = leftover_delay_bound_details(S.DYNAMIC, radio(), haptic(), LEFTOVER, 1e-5)
        literal = leftover_delay_bound_details(
            S.DYNAMIC, radio(), haptic(), LEFTOVER, 1e-5, convention="complement"
        )
        assert literal.x_bits == pytest.approx(math.log(1 / (1 - 1e-5)) / literal.theta)
        assert literal.d0_s < details.d0_s

    def test_near_certain_outage_approaches_zero_level_crossing(self):
        curve = LeftoverServiceCurve(S.DYNAMIC, radio(), haptic())
        d = leftover_delay_bound(S.DYNAMIC, radio(), haptic(), LEFTOVER, 1 - 1e-12)
        assert d == pytest.approx(crossing_time(curve, 0.0), rel=1e-6)

    def test_infeasible_load_propagates(self):
        heavy = LeftoverTrafficModel(4.0, 5e5)
        with pytest.raises(InfeasibleError):
            leftover_delay_bound(S.DYNAMIC, radio(), haptic(), heavy, 1e-5)

    def test_epsilon_validation(self):
        with pytest.raises(ConfigError):
            leftover_delay_bound(S.DYNAMIC, radio(), haptic(), LEFTOVER, 0.0)


class TestHorizontalDistance:
    def test_no_arrivals_collapses_to_crossing_time(self):
        curve = LeftoverServiceCurve(S.SEMI_PERSISTENT, radio(), haptic())
        idle = ArrivalCurve(theta=1e-4, lambda_rate=0.0, sigma=12000.0)
        assert horizontal_distance(idle, 4200.0, curve, 3.5) == crossing_time(curve, 4200.0)

    def test_never_below_crossing_time(self):
        curve = LeftoverServiceCurve(S.SEMI_PERSISTENT, radio(), haptic())
        theta = max_stable_theta(LEFTOVER, curve.long_run_rate())
        loaded = ArrivalCurve(theta=theta, lambda_rate=4.0, sigma=12000.0)
        for x in (0.0, 4200.0, 20000.0):
            assert horizontal_distance(loaded, x, curve, 3.5) >= crossing_time(curve, x)

    def test_matches_brute_force_on_small_instance(self):
        # one channel fully claimed by each packet, short periods
        cfg = RadioConfig(1, 1e5, 0.5e-3, 0.5e-3, 2e-3, haptic_demand_norm=0.5e-3)
        h = HapticTrafficModel(t_p=10e-3, t_b=2e-3, t_ib=1e-3, t_nb=4e-3)
        curve = LeftoverServiceCurve(S.DYNAMIC, cfg, h)
        rate = 0.5 * curve.long_run_rate()
        lam = rate / (math.expm1(1e-4 * 1200.0) / 1e-4)
        arrival = ArrivalCurve(theta=1e-4, lambda_rate=lam, sigma=1200.0)
        horizon = 5 * h.t_p
        got = horizontal_distance(arrival, 0.0, curve, horizon)

        # oracle: dense sup-inf scan at 10x finer resolution
        fine = cfg.tti / 40.0
        scan = np.arange(0.0, horizon + 6 * h.t_p, fine)
        beta = curve.value(scan)
        alpha_rate = arrival.rate()
        best = 0.0
        for tau in np.arange(0.0, horizon, fine):
            level = alpha_rate * tau
            below = np.nonzero(beta < level)[0]
            d = scan[below[-1]] + fine if len(below) else 0.0
            best = max(best, max(0.0, d - tau))
        assert abs(got - best) <= cfg.tti / 4.0 + 1e-12

    def test_overload_rejected(self):
        curve = LeftoverServiceCurve(S.SEMI_PERSISTENT, radio(), haptic())
        hot = ArrivalCurve(theta=1e-3, lambda_rate=4.0, sigma=12000.0)
        assert hot.rate() > curve.long_run_rate()
        with pytest.raises(InfeasibleError):
            horizontal_distance(hot, 0.0, curve, 3.5)

    def test_divergence_guard_trips_on_pathological_curve(self):
        class _FlatCurve:
            """Envelope rising far slower than its advertised long-run rate:
            the inner inversion then grows faster than the window start and
            the supremum never settles."""

            class radio:
                tti = 0.25
                total_rate = 10.0

            t_p = 1.0
            period_bits = 0.1
            offset_bits = 0.0

            def value(self, u):
                return 0.1 * np.asarray(u, dtype=float)

            def long_run_rate(self):
                return 10.0

        slowpoke = ArrivalCurve(theta=1.0, lambda_rate=2.0, sigma=1.0)
        assert slowpoke.rate() < 10.0
        with pytest.raises(DivergenceError):
            horizontal_distance(slowpoke, 1.0, _FlatCurve(), 5.0)


class TestViolationBoundComposition:
    def test_error_free_server_collapses_to_arrival_bound(self):
        f = lambda x: math.exp(-x)
        assert combined_violation_bound(f, None) is f

    def test_numeric_composition_with_nonzero_service_bound(self):
        f = lambda x: math.exp(-x)
        g = lambda x: math.exp(-2 * x)
        h = combined_violation_bound(f, g)
        assert h(3.0) <= f(3.0) + g(0.0)
