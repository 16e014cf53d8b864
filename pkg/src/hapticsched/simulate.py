"""Slot-accurate discrete-event oracle.

Time advances in integer slots.  The latency-critical flow runs its grant
state machine on the slot grid and claims its channel blocks in the slot
where each transmission lands; reserved-but-unused standing grants still
claim their slots.  Whatever capacity is left in each slot drains the
background FIFO queue as fluid, so a background packet may finish mid-slot
with its completion time interpolated linearly.

The per-period structure of the latency-critical flow is exploited when
the configuration is cleanly periodic (grant and SR periods divide the
traffic period and no scheduler state crosses a period boundary): one
period is walked exactly and the pattern is replicated, which keeps
multi-hour horizons cheap.  Otherwise the machines run event by event over
the whole horizon.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InfeasibleError
from .radio import RadioConfig, SchedulingScheme, haptic_blocks
from .scheduling import drop_walk
from .traffic import (
    HapticTrafficModel,
    LeftoverTrafficModel,
    leftover_arrivals,
    period_arrival_offsets_ns,
)
from .units import ceil_div, to_ns

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    radio: RadioConfig
    haptic: HapticTrafficModel
    leftover: LeftoverTrafficModel
    scheme: SchedulingScheme
    horizon: float
    seed: int

    def __post_init__(self):
        problems = []
        tti = self.radio.tti_ns
        if self.horizon < 10 * self.haptic.t_p:
            problems.append(
                f"horizon: must cover at least 10 traffic periods, got {self.horizon!r} s "
                f"with t_p={self.haptic.t_p!r} s"
            )
        if self.haptic.t_p_ns % tti:
            problems.append("haptic.t_p: must be a whole number of TTIs for simulation")
        if self.scheme in (SchedulingScheme.DYNAMIC, SchedulingScheme.SOFT_RESERVATION):
            if self.radio.t_sr_ns % tti:
                problems.append("radio.t_sr: SR opportunities must fall on slot boundaries")
        if self.scheme in (SchedulingScheme.SEMI_PERSISTENT, SchedulingScheme.SOFT_RESERVATION):
            if self.radio.t_pg_ns % tti:
                problems.append("radio.t_pg: standing grants must fall on slot boundaries")
        if self.scheme is SchedulingScheme.SOFT_RESERVATION and self.haptic.t_b_ns % tti:
            problems.append("haptic.t_b: burst windows must end on a slot boundary for SRR")
        if problems:
            raise ConfigError(problems)

    @property
    def n_periods(self) -> int:
        return int(to_ns(self.horizon) // self.haptic.t_p_ns)

    @property
    def slots_per_period(self) -> int:
        return int(self.haptic.t_p_ns // self.radio.tti_ns)


@dataclass
class SimReport:
    scheme: SchedulingScheme
    haptic_drop_rate: float
    haptic_delays: np.ndarray
    leftover_delays: np.ndarray
    remainder_bits_per_period: float
    slots_simulated: int
    seed: int
    haptic_period_counts: np.ndarray  # (n_periods, 2): transmitted, dropped per arrival period
    horizon_s: float

    CSV_HEADER = "scheme,tti_s,t_ib_s,seed,haptic_drop_rate,haptic_delay_max_s,leftover_p99_s,remainder_bits"

    def to_json(self) -> str:
        return json.dumps(
            {
                "scheme": self.scheme.value,
                "seed": self.seed,
                "horizon_s": self.horizon_s,
                "slots_simulated": self.slots_simulated,
                "haptic_drop_rate": self.haptic_drop_rate,
                "remainder_bits_per_period": self.remainder_bits_per_period,
                "haptic_delays_s": self.haptic_delays.tolist(),
                "leftover_delays_s": self.leftover_delays.tolist(),
                "haptic_period_counts": self.haptic_period_counts.tolist(),
            }
        )

    def csv_row(self, radio: RadioConfig, haptic: HapticTrafficModel) -> str:
        dmax = float(self.haptic_delays.max()) if len(self.haptic_delays) else 0.0
        p99 = empirical_quantile(self.leftover_delays, 0.99) if len(self.leftover_delays) else float("nan")
        return (
            f"{self.scheme.value},{radio.tti!r},{haptic.t_ib!r},{self.seed},"
            f"{self.haptic_drop_rate!r},{dmax!r},{p99!r},{self.remainder_bits_per_period!r}"
        )


@dataclass
class _HapticEvents:
    """Resolved outcome of a scheduler machine over one span of slots."""

    data_slots: np.ndarray       # slots carrying a latency-critical transmission
    reserved_slots: np.ndarray   # slots claimed by standing grants whether used or not
    tx_arrival_slots: np.ndarray
    delays_s: np.ndarray
    dropped_arrival_slots: np.ndarray
    busy_end: int                # first slot at which a new SR procedure could start

    def occupied(self) -> np.ndarray:
        return np.unique(np.concatenate([self.data_slots, self.reserved_slots]))


def _demand_machine(sa: np.ndarray, tti_ns: int, k_sr: int | None) -> _HapticEvents:
    """DS when k_sr is given, FA when None.  Acceptance is gated by the
    grant pipeline: SR at the next opportunity, grant in hand three slots
    later; fast uplink is free again after one slot."""
    busy = -1
    tx, data, delays, dropped = [], [], [], []
    for s in sa:
        s = int(s)
        if s >= busy:
            if k_sr is None:
                busy = s + 1
                data.append(s + 2)
                delays.append(4 * tti_ns / 1e9)
            else:
                sr = ceil_div(s, k_sr) * k_sr
                busy = sr + 3
                data.append(sr + 4)
                delays.append((sr - s + 6) * tti_ns / 1e9)
            tx.append(s)
        else:
            dropped.append(s)
    return _HapticEvents(
        np.array(data, dtype=np.int64),
        np.array([], dtype=np.int64),
        np.array(tx, dtype=np.int64),
        np.array(delays, dtype=float),
        np.array(dropped, dtype=np.int64),
        busy,
    )


def _grant_machine(sa: np.ndarray, tti_ns: int, k_pg: int, reserved: np.ndarray,
                   last_grant: int | None) -> tuple[_HapticEvents, int]:
    """Standing-grant machine: the grant at slot g transmits the freshest
    pending arrival strictly before g and supersedes the rest.  Arrivals
    whose serving grant falls past last_grant stay unresolved.  Returns the
    events plus the unresolved count."""
    if len(sa) == 0:
        empty = np.array([], dtype=np.int64)
        return _HapticEvents(empty, reserved, empty.copy(), np.array([], dtype=float), empty.copy(), -1), 0
    g_slot = (sa // k_pg + 1) * k_pg
    resolved = np.ones(len(sa), dtype=bool) if last_grant is None else (g_slot <= last_grant)
    last_of_group = np.empty(len(sa), dtype=bool)
    last_of_group[:-1] = g_slot[1:] != g_slot[:-1]
    last_of_group[-1] = True
    served = last_of_group & resolved
    delays = (g_slot[served] - sa[served] + 4) * tti_ns / 1e9
    events = _HapticEvents(
        g_slot[served].astype(np.int64),
        reserved,
        sa[served].astype(np.int64),
        delays.astype(float),
        sa[~served & resolved].astype(np.int64),
        -1,
    )
    return events, int(np.count_nonzero(~resolved))


def _srr_one_period(radio: RadioConfig, haptic: HapticTrafficModel, arrivals_ns: np.ndarray) -> _HapticEvents:
    """Soft reservation over a single period starting from idle state:
    standing grants inside the burst (held through the first grant at or
    past the burst end while burst data pends), SR procedure outside."""
    tti = radio.tti_ns
    k_pg = radio.t_pg_ns // tti
    k_b = haptic.t_b_ns // tti
    sa = arrivals_ns // tti
    in_burst = sa < k_b
    flush = ceil_div(k_b, k_pg) * k_pg
    reserved = np.arange(0, k_b, k_pg, dtype=np.int64)
    burst_events, unresolved = _grant_machine(sa[in_burst], tti, k_pg, reserved, last_grant=flush)
    sparse_events = _demand_machine(sa[~in_burst], tti, radio.t_sr_ns // tti)
    if unresolved:
        raise AssertionError("burst arrivals must resolve by the flush grant")
    return _HapticEvents(
        np.sort(np.concatenate([burst_events.data_slots, sparse_events.data_slots])),
        reserved,
        np.concatenate([burst_events.tx_arrival_slots, sparse_events.tx_arrival_slots]),
        np.concatenate([burst_events.delays_s, sparse_events.delays_s]),
        np.concatenate([burst_events.dropped_arrival_slots, sparse_events.dropped_arrival_slots]),
        sparse_events.busy_end,
    )


def _srr_sequential(radio: RadioConfig, haptic: HapticTrafficModel, arrivals_ns: np.ndarray,
                    n_slots: int) -> _HapticEvents:
    """General soft-reservation walk over the whole horizon, carrying SR
    pipeline state across period boundaries.  Used when the per-period
    pattern does not replicate cleanly."""
    tti = radio.tti_ns
    k_pg = radio.t_pg_ns // tti
    k_sr = radio.t_sr_ns // tti
    k_p = haptic.t_p_ns // tti
    k_b = haptic.t_b_ns // tti
    sa = arrivals_ns // tti
    in_burst = (sa % k_p) < k_b

    tx, data, delays, dropped = [], [], [], []
    reserved = [g for g in range(0, n_slots, k_pg) if (g % k_p) < k_b]
    busy = -1
    pend_last, pend_cnt = 0, 0
    i, n = 0, len(sa)
    max_grant = (n_slots // k_pg + 2) * k_pg
    for g in range(0, max_grant + 1, k_pg):
        while i < n and sa[i] < g:
            s = int(sa[i])
            if in_burst[i]:
                if pend_cnt:
                    dropped.append(pend_last)
                    pend_cnt -= 1
                pend_last, pend_cnt = s, pend_cnt + 1
            elif s >= busy:
                sr = ceil_div(s, k_sr) * k_sr
                busy = sr + 3
                data.append(sr + 4)
                delays.append((sr - s + 6) * tti / 1e9)
                tx.append(s)
            else:
                dropped.append(s)
            i += 1
        if pend_cnt:
            # grant is held (burst or flush) and serves the freshest packet
            tx.append(pend_last)
            data.append(g)
            delays.append((g - pend_last + 4) * tti / 1e9)
            pend_cnt = 0
        if i >= n and pend_cnt == 0:
            break
    return _HapticEvents(
        np.array(sorted(data), dtype=np.int64),
        np.array(reserved, dtype=np.int64),
        np.array(tx, dtype=np.int64),
        np.array(delays, dtype=float),
        np.array(dropped, dtype=np.int64),
        busy,
    )


def _one_period_events(config: SimConfig, offsets_ns: np.ndarray) -> _HapticEvents:
    radio, haptic, scheme = config.radio, config.haptic, config.scheme
    tti = radio.tti_ns
    sa = offsets_ns // tti
    if scheme is SchedulingScheme.DYNAMIC:
        return _demand_machine(sa, tti, radio.t_sr_ns // tti)
    if scheme is SchedulingScheme.FAST_UPLINK:
        return _demand_machine(sa, tti, None)
    if scheme is SchedulingScheme.SEMI_PERSISTENT:
        k_pg = radio.t_pg_ns // tti
        reserved = np.arange(0, config.slots_per_period, k_pg, dtype=np.int64)
        events, _ = _grant_machine(sa, tti, k_pg, reserved, last_grant=None)
        return events
    return _srr_one_period(radio, haptic, offsets_ns)


def _pattern_is_clean(config: SimConfig, events: _HapticEvents) -> bool:
    """True when one period's outcome replicates verbatim: grant and SR
    phases realign at the period boundary and no state crosses it.  A grant
    landing exactly on the boundary is allowed for SPS because it rides the
    next period's reserved slot."""
    radio, scheme = config.radio, config.scheme
    tti = radio.tti_ns
    k_p = config.slots_per_period
    if scheme in (SchedulingScheme.DYNAMIC, SchedulingScheme.SOFT_RESERVATION):
        if k_p % (radio.t_sr_ns // tti):
            return False
    if scheme in (SchedulingScheme.SEMI_PERSISTENT, SchedulingScheme.SOFT_RESERVATION):
        if k_p % (radio.t_pg_ns // tti):
            return False
    if events.busy_end > k_p:
        return False
    limit = k_p + 1 if scheme is SchedulingScheme.SEMI_PERSISTENT else k_p
    if len(events.data_slots) and events.data_slots.max() >= limit:
        return False
    return True


class _CapacityProfile:
    """Piecewise-linear cumulative background capacity, periodic over the
    occupancy pattern.  Supports exact evaluation and inversion."""

    def __init__(self, occupied_slots: np.ndarray, period_slots: int, repeats: int,
                 tti_ns: int, total_rate: float, reduced_rate: float):
        self.period_ns = period_slots * tti_ns
        self.repeats = repeats
        occ = np.unique(np.asarray(occupied_slots, dtype=np.int64))
        if len(occ) and (occ[0] < 0 or occ[-1] >= period_slots):
            raise ValueError("occupied slots outside the profile period")
        seg_t, seg_rate = [0], []
        for s in occ:
            s = int(s)
            if s * tti_ns > seg_t[-1]:
                seg_rate.append(total_rate)
                seg_t.append(s * tti_ns)
            seg_rate.append(reduced_rate)
            seg_t.append((s + 1) * tti_ns)
        if seg_t[-1] < self.period_ns:
            seg_rate.append(total_rate)
            seg_t.append(self.period_ns)
        bounds = np.array(seg_t, dtype=np.int64)
        self.seg_t = bounds[:-1]
        self.seg_rate = np.array(seg_rate, dtype=float)
        seg_bits = self.seg_rate * (np.diff(bounds) / 1e9)
        self.seg_S = np.concatenate([[0.0], np.cumsum(seg_bits)[:-1]])
        self.period_bits = float(np.sum(seg_bits))
        self.total_bits = self.period_bits * repeats
        rising = self.seg_rate > 0
        self.ris_t = self.seg_t[rising]
        self.ris_S = self.seg_S[rising]
        self.ris_rate = self.seg_rate[rising]
        self.n_occupied = len(occ)

    def supply_at(self, t_ns) -> np.ndarray:
        t_ns = np.asarray(t_ns, dtype=np.int64)
        k = t_ns // self.period_ns
        r = t_ns - k * self.period_ns
        j = np.searchsorted(self.seg_t, r, side="right") - 1
        return k * self.period_bits + self.seg_S[j] + self.seg_rate[j] * (r - self.seg_t[j]) / 1e9

    def time_of_supply(self, bits) -> np.ndarray:
        """Earliest time (seconds) at which cumulative capacity reaches each
        target; inf when the target lies past the horizon.  Targets that
        fall on a zero-rate plateau resolve at the next rising segment."""
        bits = np.asarray(bits, dtype=float)
        if self.period_bits <= 0 or len(self.ris_S) == 0:
            return np.full(bits.shape, np.inf)
        k = np.floor(bits / self.period_bits)
        res = bits - k * self.period_bits
        low = res < 0
        k[low] -= 1
        res[low] += self.period_bits
        high = res >= self.period_bits
        k[high] += 1
        res[high] -= self.period_bits
        j = np.clip(np.searchsorted(self.ris_S, res, side="right") - 1, 0, len(self.ris_S) - 1)
        dt_ns = (res - self.ris_S[j]) / self.ris_rate[j] * 1e9
        t_ns = k * float(self.period_ns) + self.ris_t[j] + dt_ns
        out = t_ns / 1e9
        out[bits > self.total_bits * (1 + 1e-12)] = np.inf
        return out


def _haptic_layer(config: SimConfig):
    """Resolve the latency-critical flow over the whole horizon.

    Returns (capacity profile, per-period counts, post-warm-up access
    delays, mean occupied slots per period).
    """
    radio, haptic, scheme = config.radio, config.haptic, config.scheme
    tti = radio.tti_ns
    k_p = config.slots_per_period
    n_periods = config.n_periods
    offs = period_arrival_offsets_ns(haptic)
    m = haptic_blocks(radio)
    reduced = (radio.n_channels - m) * radio.channel_rate

    one = _one_period_events(config, offs)
    if _pattern_is_clean(config, one):
        occupied = one.occupied()
        occupied = occupied[occupied < k_p]
        profile = _CapacityProfile(occupied, k_p, n_periods, tti, radio.total_rate, reduced)
        tx, dr = len(one.delays_s), len(one.dropped_arrival_slots)
        counts = np.tile(np.array([[tx, dr]], dtype=np.int64), (n_periods, 1))
        delays = np.tile(one.delays_s, max(n_periods - 1, 0))
        return profile, counts, delays, float(len(occupied))

    # general path: explicit events over the whole horizon
    starts = (np.arange(n_periods, dtype=np.int64) * haptic.t_p_ns)[:, None]
    arrivals = (starts + offs[None, :]).ravel()
    n_slots = n_periods * k_p
    if scheme is SchedulingScheme.DYNAMIC:
        events = _demand_machine(arrivals // tti, tti, radio.t_sr_ns // tti)
    elif scheme is SchedulingScheme.FAST_UPLINK:
        events = _demand_machine(arrivals // tti, tti, None)
    elif scheme is SchedulingScheme.SEMI_PERSISTENT:
        k_pg = radio.t_pg_ns // tti
        reserved = np.arange(0, n_slots, k_pg, dtype=np.int64)
        events, _ = _grant_machine(arrivals // tti, tti, k_pg, reserved, last_grant=n_slots)
    else:
        events = _srr_sequential(radio, haptic, arrivals, n_slots)
    occupied = events.occupied()
    occupied = occupied[occupied < n_slots]
    profile = _CapacityProfile(occupied, n_slots, 1, tti, radio.total_rate, reduced)
    counts = np.zeros((n_periods, 2), dtype=np.int64)
    np.add.at(counts[:, 0], np.minimum(events.tx_arrival_slots // k_p, n_periods - 1), 1)
    np.add.at(counts[:, 1], np.minimum(events.dropped_arrival_slots // k_p, n_periods - 1), 1)
    keep = events.tx_arrival_slots >= k_p
    per_period_occ = np.bincount(occupied // k_p, minlength=n_periods)
    occupancy = float(per_period_occ[1:].mean()) if n_periods > 1 else float(per_period_occ.mean())
    return profile, counts, events.delays_s[keep], occupancy


def run(config: SimConfig) -> SimReport:
    """Replay the configuration and measure drop rates, access delays,
    background completion delays and the spare per-period capacity.

    The horizon is snapped down to a whole number of traffic periods; the
    first period is discarded as warm-up.
    """
    radio, haptic, scheme = config.radio, config.haptic, config.scheme
    n_periods = config.n_periods
    n_slots = n_periods * config.slots_per_period
    horizon_s = n_slots * radio.tti_ns / 1e9
    warmup_s = haptic.t_p_ns / 1e9

    profile, counts, haptic_delays, occupancy = _haptic_layer(config)

    timeline = leftover_arrivals(config.leftover, horizon_s, config.seed)
    arrivals = timeline.times_s
    sizes = timeline.sizes_bits
    if len(arrivals):
        a_ns = np.round(arrivals * 1e9).astype(np.int64)
        supply_at_arrival = profile.supply_at(a_ns)
        cum = np.cumsum(sizes)
        backlog = np.maximum.accumulate(supply_at_arrival - (cum - sizes))
        completion = profile.time_of_supply(backlog + cum)
        finished = np.isfinite(completion)
        fin_times = completion[finished]  # nondecreasing: FIFO

        t_mid = 0.5 * horizon_s
        q_mid = int(np.searchsorted(arrivals, t_mid, side="right") - np.searchsorted(fin_times, t_mid, side="right"))
        q_end = int(len(arrivals) - len(fin_times))
        if queue_blowup(q_mid, q_end):
            raise InfeasibleError(
                f"leftover queue grew superlinearly ({q_mid} packets at mid-horizon, "
                f"{q_end} at the end): configuration is unstable"
            )
        keep = (arrivals >= warmup_s) & finished
        leftover_delays = (completion - arrivals)[keep]
    else:
        leftover_delays = np.array([], dtype=float)

    post = counts[1:] if n_periods > 1 else counts
    tx_total = int(post[:, 0].sum())
    dr_total = int(post[:, 1].sum())
    drop_rate = dr_total / (tx_total + dr_total) if (tx_total + dr_total) else 0.0
    slot_bits = haptic_blocks(radio) * radio.channel_rate * radio.tti
    remainder = radio.total_rate * haptic.t_p - slot_bits * occupancy

    return SimReport(
        scheme=scheme,
        haptic_drop_rate=drop_rate,
        haptic_delays=np.asarray(haptic_delays, dtype=float),
        leftover_delays=np.asarray(leftover_delays, dtype=float),
        remainder_bits_per_period=remainder,
        slots_simulated=n_slots,
        seed=config.seed,
        haptic_period_counts=counts,
        horizon_s=horizon_s,
    )


def queue_blowup(q_mid: int, q_end: int) -> bool:
    """Superlinear-growth detector: the backlog at the horizon exceeds ten
    times the backlog at half the horizon, with both above 100 packets."""
    return q_end > 10 * q_mid and min(q_mid, q_end) > 100


def empirical_quantile(delays, p: float) -> float:
    """Nearest-rank order statistic: the ceil(p*n)-th smallest sample."""
    if not (0 < p < 1):
        raise ConfigError(f"p must be in (0, 1), got {p!r}")
    data = np.sort(np.asarray(delays, dtype=float))
    if len(data) == 0:
        raise ValueError("empty sample")
    rank = min(max(math.ceil(p * len(data)), 1), len(data))
    return float(data[rank - 1])


def validate_against_walk(config: SimConfig) -> bool:
    """Cross-check the simulator against the analytic walk re-run at slot
    granularity: per-period transmitted/dropped counts must match exactly
    on every full period after warm-up (the final period is skipped because
    its tail may still be in flight at the horizon)."""
    report = run(config)
    walk = drop_walk(config.scheme, config.radio, config.haptic, slotted=True)
    expected = (walk.transmitted, walk.dropped)
    counts = report.haptic_period_counts
    ok = True
    for period in range(1, len(counts) - 1):
        got = (int(counts[period, 0]), int(counts[period, 1]))
        if got != expected:
            log.warning(
                "%s: period %d simulated (tx=%d, dropped=%d) != walk (tx=%d, dropped=%d)",
                config.scheme.value, period, got[0], got[1], expected[0], expected[1],
            )
            ok = False
    return ok
