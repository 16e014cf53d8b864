"""Per-scheme grant mechanics at the analytic level: the exact one-period
drop walk, the effective burst transmission count, remainder of service,
and grant pattern generation.

Drop semantics follow the latest-data rule: at each transmission
opportunity only the freshest pending packet is sent and every packet it
supersedes counts as dropped.  Packets are never buffered across
opportunities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .radio import (
    RadioConfig,
    SchedulingScheme,
    ds_grant_latency,
    fa_grant_latency,
    haptic_access_delay,
    haptic_blocks,
)
from .traffic import HapticTrafficModel, period_arrival_offsets_ns, period_counters
from .units import ceil_div, to_ns, to_s


@dataclass
class GrantPattern:
    """Grant instants of one hyperperiod (empty for demand-driven schemes)."""

    instants_s: np.ndarray
    hyperperiod_s: float
    scheme: SchedulingScheme


@dataclass
class DropReport:
    """Outcome of one walk: counts and the access delay of each
    transmitted packet."""

    scheme: SchedulingScheme
    arrivals: int
    transmitted: int
    dropped: int
    drop_rate: float
    per_packet_delays: np.ndarray

    CSV_HEADER = "scheme,tti_s,t_ib_s,arrivals,transmitted,dropped,drop_rate,max_access_delay_s"

    def max_access_delay(self) -> float:
        return float(self.per_packet_delays.max()) if len(self.per_packet_delays) else 0.0

    def csv_row(self, radio: RadioConfig, haptic: HapticTrafficModel) -> str:
        return (
            f"{self.scheme.value},{radio.tti!r},{haptic.t_ib!r},{self.arrivals},"
            f"{self.transmitted},{self.dropped},{self.drop_rate!r},{self.max_access_delay()!r}"
        )


def _make_report(scheme, arrivals, delays, dropped) -> DropReport:
    transmitted = len(delays)
    rate = dropped / arrivals if arrivals else 0.0
    return DropReport(scheme, arrivals, transmitted, dropped, rate, np.asarray(delays, dtype=float))


def _walk_demand(offsets_ns: np.ndarray, gate_ns: int, flat_delay_s: float):
    """Grant-on-demand walk (DS and FA): a packet is accepted only when the
    previous acceptance happened at least gate_ns earlier; the boundary
    counts as free."""
    busy = None
    delays, dropped = [], 0
    for a in offsets_ns:
        if busy is None or a >= busy:
            delays.append(flat_delay_s)
            busy = a + gate_ns
        else:
            dropped += 1
    return delays, dropped


def _walk_demand_slotted(offsets_ns: np.ndarray, radio: RadioConfig, fast: bool):
    """Slot-quantized variant: arrivals round down to slots, SR waits round
    up to the next opportunity, and the busy window closes once the grant
    has been received (three slots after the SR slot)."""
    tti = radio.tti_ns
    if not fast and radio.t_sr_ns % tti:
        raise ConfigError("radio.t_sr: must be a whole number of TTIs for the slotted walk")
    k_sr = radio.t_sr_ns // tti
    busy = None
    delays, dropped = [], 0
    for a in offsets_ns:
        sa = a // tti
        if busy is None or sa >= busy:
            if fast:
                busy = sa + 1
                delays.append(to_s(4 * tti))
            else:
                sr = ceil_div(sa, k_sr) * k_sr
                busy = sr + 3
                delays.append(to_s((sr - sa + 6) * tti))
        else:
            dropped += 1
    return delays, dropped


def _walk_granted(offsets_ns: np.ndarray, t_pg_ns: int, extra_delay_ns: int, last_grant_ns: int | None = None):
    """Standing-grant walk: grants fire every t_pg_ns from zero; each grant
    transmits the freshest arrival strictly before it and drops the rest of
    the backlog.  An arrival coincident with a grant waits for the next one.
    Grants continue (or run to last_grant_ns inclusive) until every arrival
    is resolved."""
    delays, dropped = [], 0
    i, n = 0, len(offsets_ns)
    pend_last, pend_cnt = 0, 0
    k = 0
    while True:
        g = k * t_pg_ns
        while i < n and offsets_ns[i] < g:
            pend_last = offsets_ns[i]
            pend_cnt += 1
            i += 1
        if pend_cnt:
            delays.append(to_s((g - pend_last) + extra_delay_ns))
            dropped += pend_cnt - 1
            pend_cnt = 0
        if i >= n:
            break
        if last_grant_ns is not None and g >= last_grant_ns:
            break
        k += 1
    return delays, dropped


def _walk_granted_slotted(offsets_ns: np.ndarray, radio: RadioConfig, last_grant_slot: int | None = None):
    tti = radio.tti_ns
    if radio.t_pg_ns % tti:
        raise ConfigError("radio.t_pg: must be a whole number of TTIs for the slotted walk")
    k_pg = radio.t_pg_ns // tti
    slots = offsets_ns // tti
    delays, dropped = [], 0
    i, n = 0, len(slots)
    pend_last, pend_cnt = 0, 0
    k = 0
    while True:
        g = k * k_pg
        while i < n and slots[i] < g:
            pend_last = slots[i]
            pend_cnt += 1
            i += 1
        if pend_cnt:
            delays.append(to_s((g - pend_last + 4) * tti))
            dropped += pend_cnt - 1
            pend_cnt = 0
        if i >= n:
            break
        if last_grant_slot is not None and g >= last_grant_slot:
            break
        k += 1
    return delays, dropped


def drop_walk(
    scheme: SchedulingScheme,
    radio: RadioConfig,
    haptic: HapticTrafficModel,
    slotted: bool = False,
) -> DropReport:
    """Exact deterministic walk over one traffic period (no excess burst).

    With slotted=True the walk is re-run at slot granularity (arrival times
    rounded down to slot boundaries, SR waits rounded up to the next
    opportunity), matching the simulator's clock.
    """
    offs = period_arrival_offsets_ns(haptic)
    arrivals = len(offs)
    tti = radio.tti_ns

    if scheme in (SchedulingScheme.DYNAMIC, SchedulingScheme.FAST_UPLINK):
        fast = scheme is SchedulingScheme.FAST_UPLINK
        if slotted:
            # one physical pipeline, busy state carried across the burst edge,
            # exactly as the simulator runs it
            delays, dropped = _walk_demand_slotted(offs, radio, fast)
        else:
            # worst-case gating is evaluated per regime: the burst stream and
            # the sparse stream are each paced by their own spacing, so the
            # boundary packet at the burst edge is not charged against the
            # burst's worst-case grant wait
            gate = to_ns(fa_grant_latency(radio) if fast else ds_grant_latency(radio))
            flat = haptic_access_delay(scheme, radio)
            t_b = haptic.t_b_ns
            b_delays, b_dropped = _walk_demand(offs[offs < t_b], gate, flat)
            s_delays, s_dropped = _walk_demand(offs[offs >= t_b], gate, flat)
            delays, dropped = b_delays + s_delays, b_dropped + s_dropped
        return _make_report(scheme, arrivals, delays, dropped)

    if scheme is SchedulingScheme.SEMI_PERSISTENT:
        if slotted:
            delays, dropped = _walk_granted_slotted(offs, radio)
        else:
            delays, dropped = _walk_granted(offs, radio.t_pg_ns, 4 * tti)
        return _make_report(scheme, arrivals, delays, dropped)

    if scheme is SchedulingScheme.SOFT_RESERVATION:
        t_b = haptic.t_b_ns
        burst = offs[offs < t_b]
        sparse = offs[offs >= t_b]
        if slotted:
            if t_b % tti:
                raise ConfigError("haptic.t_b: must be a whole number of TTIs for the slotted SRR walk")
            k_pg = radio.t_pg_ns // tti
            flush_slot = ceil_div(t_b // tti, k_pg) * k_pg
            b_delays, b_dropped = _walk_granted_slotted(burst, radio, last_grant_slot=flush_slot)
            s_delays, s_dropped = _walk_demand_slotted(sparse, radio, fast=False)
        else:
            # The standing grant is held through the first instant at or past
            # the burst end, so burst-tail data still rides the reserved grant.
            flush = ceil_div(t_b, radio.t_pg_ns) * radio.t_pg_ns
            b_delays, b_dropped = _walk_granted(burst, radio.t_pg_ns, 4 * tti, last_grant_ns=flush)
            gate = to_ns(ds_grant_latency(radio))
            s_delays, s_dropped = _walk_demand(sparse, gate, haptic_access_delay(scheme, radio, in_burst=False))
        return _make_report(scheme, arrivals, b_delays + s_delays, b_dropped + s_dropped)

    raise ConfigError(f"unknown scheme {scheme!r}")


def effective_burst_count(gate_ns: int, haptic: HapticTrafficModel) -> int:
    """Closed-form transmissions per burst when a pre-transmission wait of
    gate_ns gates acceptance: only every k-th arrival gets through, with the
    boundary spacing == gate counting as schedulable."""
    k = max(1, ceil_div(gate_ns, haptic.t_ib_ns))
    return int(haptic.t_b_ns // (k * haptic.t_ib_ns))


def ds_effective_burst_count(radio: RadioConfig, haptic: HapticTrafficModel) -> int:
    """Transmissions per burst under dynamic scheduling.  The drop walk is
    the ground truth; this closed form tracks it to within one packet."""
    return effective_burst_count(to_ns(ds_grant_latency(radio)), haptic)


def remainder_of_service(scheme: SchedulingScheme, radio: RadioConfig, haptic: HapticTrafficModel) -> float:
    """Capacity left to background traffic in one traffic period, bits.

    Demand-driven schemes consume one slot per transmitted packet.  A
    standing grant consumes every reserved slot whether used or not; soft
    reservation reserves only inside bursts and pays per transmission in
    the sparse stretch.
    """
    m = haptic_blocks(radio)
    _, _, r_nb, _ = period_counters(haptic, 0.0)
    if scheme in (SchedulingScheme.DYNAMIC, SchedulingScheme.FAST_UPLINK):
        consumed = drop_walk(scheme, radio, haptic).transmitted
    elif scheme is SchedulingScheme.SEMI_PERSISTENT:
        consumed = haptic.t_p_ns // radio.t_pg_ns
    elif scheme is SchedulingScheme.SOFT_RESERVATION:
        consumed = haptic.t_b_ns // radio.t_pg_ns + r_nb
    else:
        raise ConfigError(f"unknown scheme {scheme!r}")
    slot_bits = m * radio.channel_rate * radio.tti
    return radio.total_rate * haptic.t_p - slot_bits * consumed


def grant_pattern(scheme: SchedulingScheme, radio: RadioConfig, haptic: HapticTrafficModel) -> GrantPattern:
    """Reserved grant instants over one hyperperiod (lcm of the traffic and
    grant periods).  Demand-driven schemes have no standing grants."""
    if scheme in (SchedulingScheme.DYNAMIC, SchedulingScheme.FAST_UPLINK):
        return GrantPattern(np.array([], dtype=float), haptic.t_p, scheme)
    hyper = math.lcm(haptic.t_p_ns, radio.t_pg_ns)
    instants = np.arange(0, hyper, radio.t_pg_ns, dtype=np.int64)
    if scheme is SchedulingScheme.SOFT_RESERVATION:
        instants = instants[(instants % haptic.t_p_ns) < haptic.t_b_ns]
    return GrantPattern(instants / 1e9, to_s(hyper), scheme)
