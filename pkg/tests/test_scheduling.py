import numpy as np
import pytest

from hapticsched import (
    HapticTrafficModel,
    RadioConfig,
    SchedulingScheme,
    drop_walk,
    ds_effective_burst_count,
    ds_grant_latency,
    effective_burst_count,
    grant_pattern,
    haptic_arrivals,
    remainder_of_service,
)

S = SchedulingScheme


def radio(tti, t_pg=None, t_sr=None):
    return RadioConfig(10, 1e6, tti, t_sr or tti, t_pg or 10 * tti, 1e-4)


def haptic(t_ib, **kw):
    args = dict(t_p=1.0, t_b=0.2, t_ib=t_ib, t_nb=50e-3)
    args.update(kw)
    return HapticTrafficModel(**args)


def grid(start_ms, stop_ms, step_ms=0.05):
    n = round((stop_ms - start_ms) / step_ms)
    return [round((start_ms + k * step_ms) * 1e6) / 1e9 for k in range(n + 1)]


class TestDropWalkDynamic:
    def test_zero_drops_at_grant_latency_boundary(self):
        # spacing 2 ms equals the grant latency: boundary counts as schedulable
        report = drop_walk(S.DYNAMIC, radio(0.5e-3), haptic(2e-3))
        assert report.dropped == 0
        assert report.arrivals == 116

    def test_drops_below_grant_latency(self):
        report = drop_walk(S.DYNAMIC, radio(0.5e-3), haptic(1.5e-3))
        assert report.dropped > 0

    def test_zero_iff_spacing_at_least_grant_latency(self):
        for tti in (0.125e-3, 0.25e-3, 0.5e-3, 1e-3):
            cfg = radio(tti)
            gate = ds_grant_latency(cfg)
            for t_ib in grid(1.0, 3.0):
                report = drop_walk(S.DYNAMIC, cfg, haptic(t_ib))
                assert (report.dropped == 0) == (t_ib >= gate), (tti, t_ib)

    def test_transmitted_delays_are_the_flat_access_delay(self):
        report = drop_walk(S.DYNAMIC, radio(0.5e-3), haptic(2e-3))
        assert np.all(report.per_packet_delays == 3.5e-3)


class TestDropWalkFast:
    @pytest.mark.parametrize("tti", [0.125e-3, 0.25e-3, 0.5e-3, 1e-3])
    def test_zero_drops_across_full_spacing_range(self, tti):
        for t_ib in grid(1.0, 3.0):
            report = drop_walk(S.FAST_UPLINK, radio(tti), haptic(t_ib))
            assert report.dropped == 0, (tti, t_ib)

    def test_drops_when_spacing_below_one_slot(self):
        cfg = RadioConfig(10, 1e6, 1e-3, 1e-3, 10e-3, 1e-4)
        report = drop_walk(S.FAST_UPLINK, cfg, haptic(0.5e-3))
        assert report.dropped > 0


class TestDropWalkStandingGrant:
    def test_zero_drops_when_spacing_reaches_grant_period(self):
        # grant period 1.25 ms at the smallest slot: 1.3 ms spacing is clean
        report = drop_walk(S.SEMI_PERSISTENT, radio(0.125e-3), haptic(1.3e-3))
        assert report.dropped == 0

    def test_drops_at_half_millisecond_slot(self):
        report = drop_walk(S.SEMI_PERSISTENT, radio(0.5e-3), haptic(2e-3))
        assert report.dropped > 0

    def test_exact_coincidence_with_grants_is_clean(self):
        report = drop_walk(S.SEMI_PERSISTENT, radio(0.125e-3), haptic(1.25e-3))
        assert report.dropped == 0
        # coincident arrivals wait one full grant period
        assert report.per_packet_delays.max() == 1.25e-3 + 4 * 0.125e-3

    def test_delays_bounded_by_grant_period_plus_four_slots(self):
        for t_ib in (1e-3, 2e-3, 3e-3):
            report = drop_walk(S.SEMI_PERSISTENT, radio(0.5e-3), haptic(t_ib))
            assert report.per_packet_delays.max() <= 5e-3 + 4 * 0.5e-3 + 1e-12

    def test_exactly_one_transmission_per_grant(self):
        report = drop_walk(S.SEMI_PERSISTENT, radio(0.5e-3), haptic(1e-3))
        # 200 burst windows of 5 ms each hold 5 arrivals; one survives per window
        assert report.arrivals == report.transmitted + report.dropped
        assert report.transmitted == 40 + 16


class TestDropWalkSoftReservation:
    def test_matches_standing_grant_inside_burst(self):
        for tti, t_ib in ((0.125e-3, 1.3e-3), (0.25e-3, 2.5e-3)):
            report = drop_walk(S.SOFT_RESERVATION, radio(tti), haptic(t_ib))
            assert report.dropped == 0, (tti, t_ib)

    def test_burst_tail_rides_the_held_grant(self):
        # last burst arrival lands between the last in-burst grant and the
        # burst edge; the reserved grant is held and still serves it
        report = drop_walk(S.SOFT_RESERVATION, radio(0.125e-3), haptic(1.3e-3))
        assert report.dropped == 0

    def test_sparse_stretch_uses_dynamic_latency(self):
        report = drop_walk(S.SOFT_RESERVATION, radio(0.5e-3), haptic(2e-3))
        sparse_delays = report.per_packet_delays[report.per_packet_delays == 3.5e-3]
        assert len(sparse_delays) == 16


class TestWalkConsistency:
    @pytest.mark.parametrize("scheme", list(S))
    def test_arrival_count_matches_timeline(self, scheme):
        h = haptic(2e-3, worst_case_excess_burst=False)
        report = drop_walk(scheme, radio(0.5e-3), h)
        assert report.arrivals == len(haptic_arrivals(h, h.t_p))

    def test_report_identity(self):
        report = drop_walk(S.SEMI_PERSISTENT, radio(0.5e-3), haptic(2e-3))
        assert report.arrivals == report.transmitted + report.dropped
        assert report.drop_rate == report.dropped / report.arrivals

    def test_csv_row_shape(self):
        report = drop_walk(S.DYNAMIC, radio(0.5e-3), haptic(2e-3))
        row = report.csv_row(radio(0.5e-3), haptic(2e-3))
        assert row.split(",")[0] == "DS"
        assert len(row.split(",")) == len(report.CSV_HEADER.split(","))


class TestEffectiveBurstCount:
    def test_boundary_spacing_counts_as_schedulable(self):
        assert ds_effective_burst_count(radio(0.5e-3), haptic(2e-3)) == 100

    def test_every_second_packet_served(self):
        assert ds_effective_burst_count(radio(0.5e-3), haptic(1.5e-3)) == 66

    def test_every_third_packet_served(self):
        assert effective_burst_count(2_000_000, haptic(0.9e-3)) == 74

    def test_tracks_walk_within_one_packet(self):
        cfg = radio(0.5e-3)
        for t_ib in grid(1.0, 3.0):
            h = haptic(t_ib)
            closed = ds_effective_burst_count(cfg, h)
            walk_burst = drop_walk(S.DYNAMIC, cfg, h).transmitted - 16
            assert abs(closed - walk_burst) <= 1, t_ib
            k = max(1, -(-2_000_000 // h.t_ib_ns))
            if h.t_b_ns % (k * h.t_ib_ns) == 0:
                assert closed == walk_burst, t_ib


class TestRemainder:
    def test_standing_grant_versus_soft_reservation(self):
        # 200 reserved slots against 40 burst grants + 16 sparse sends
        sps = remainder_of_service(S.SEMI_PERSISTENT, radio(0.5e-3), haptic(2e-3))
        srr = remainder_of_service(S.SOFT_RESERVATION, radio(0.5e-3), haptic(2e-3))
        assert sps == pytest.approx(980000.0, rel=1e-12)
        assert srr == pytest.approx(994400.0, rel=1e-12)
        assert srr > sps

    def test_reserved_schemes_ignore_burst_spacing(self):
        for scheme in (S.SEMI_PERSISTENT, S.SOFT_RESERVATION):
            values = {remainder_of_service(scheme, radio(0.5e-3), haptic(t)) for t in (1e-3, 2e-3, 3e-3)}
            assert len(values) == 1

    def test_demand_driven_grows_with_spacing(self):
        r2 = remainder_of_service(S.DYNAMIC, radio(0.5e-3), haptic(2e-3))
        r3 = remainder_of_service(S.DYNAMIC, radio(0.5e-3), haptic(3e-3))
        assert r3 > r2

    @pytest.mark.parametrize("t_pg", [1.25e-3, 2.5e-3, 5e-3, 10e-3])
    def test_soft_reservation_never_below_standing_grant(self, t_pg):
        # holds whenever the sparse spacing covers the grant period
        cfg = radio(0.5e-3, t_pg=t_pg)
        h = haptic(2e-3)
        assert h.t_nb >= t_pg
        assert remainder_of_service(S.SOFT_RESERVATION, cfg, h) >= remainder_of_service(S.SEMI_PERSISTENT, cfg, h)

    def test_demand_schemes_equal_when_both_lossless(self):
        for t_ib in (2e-3, 2.5e-3, 3e-3):
            ds = remainder_of_service(S.DYNAMIC, radio(0.5e-3), haptic(t_ib))
            fa = remainder_of_service(S.FAST_UPLINK, radio(0.5e-3), haptic(t_ib))
            assert ds == fa


class TestGrantPattern:
    def test_standing_grant_count(self):
        pattern = grant_pattern(S.SEMI_PERSISTENT, radio(0.5e-3), haptic(2e-3))
        assert len(pattern.instants_s) == 200
        assert np.allclose(np.diff(pattern.instants_s), 5e-3)

    def test_soft_reservation_clipped_to_burst(self):
        pattern = grant_pattern(S.SOFT_RESERVATION, radio(0.5e-3), haptic(2e-3))
        assert len(pattern.instants_s) == 40
        assert pattern.instants_s.max() < 0.2

    def test_demand_driven_empty(self):
        assert len(grant_pattern(S.DYNAMIC, radio(0.5e-3), haptic(2e-3)).instants_s) == 0
        assert len(grant_pattern(S.FAST_UPLINK, radio(0.5e-3), haptic(2e-3)).instants_s) == 0

    def test_hyperperiod_alignment(self):
        cfg = RadioConfig(10, 1e6, 0.5e-3, 0.5e-3, 3e-3, 1e-4)
        pattern = grant_pattern(S.SEMI_PERSISTENT, cfg, haptic(2e-3))
        assert pattern.hyperperiod_s == pytest.approx(3.0)  # lcm(1 s, 3 ms)
        assert pattern.instants_s[-1] < pattern.hyperperiod_s
