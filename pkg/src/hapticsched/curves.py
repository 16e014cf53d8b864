"""Stochastic service/arrival envelopes for the background traffic and the
delay bound built from them.

The leftover service envelope is piecewise linear in the window length u:
it rises at the full rate C and, at every whole traffic period inside the
window, loses the capacity of the slots the latency-critical flow claims in
that period.  A fixed allowance for one excess burst plus two edge slots is
subtracted throughout, and the positive-part clamp is deliberately omitted,
so the envelope may be negative for small u.  Every inversion is done
conservatively: it returns the first instant after which the envelope never
dips below the requested level again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, InfeasibleError
from .radio import (
    RadioConfig,
    SchedulingScheme,
    ds_grant_latency,
    fa_grant_latency,
    haptic_blocks,
)
from .scheduling import effective_burst_count
from .traffic import HapticTrafficModel, LeftoverTrafficModel
from .units import to_ns


@dataclass
class ArrivalCurve:
    """Linear envelope of the compound-Poisson background flow for a given
    tail-decay parameter theta, with violation bound exp(-theta * x)."""

    theta: float
    lambda_rate: float
    sigma: float

    def __post_init__(self):
        if self.theta <= 0:
            raise ConfigError(f"theta must be > 0, got {self.theta!r}")
        if self.lambda_rate < 0 or self.sigma <= 0:
            raise ConfigError("lambda_rate must be >= 0 and sigma > 0")

    def rate(self) -> float:
        """Equivalent rate of the flow at this theta, bits/s.  Decreases to
        lambda * sigma as theta approaches zero."""
        return self.lambda_rate * math.expm1(self.theta * self.sigma) / self.theta

    def alpha(self, t):
        return self.rate() * np.asarray(t, dtype=float)

    def violation_bound(self, x: float) -> float:
        return math.exp(-self.theta * x)


def effective_bandwidth(lambda_rate: float, sigma: float, theta: float) -> float:
    return lambda_rate * math.expm1(theta * sigma) / theta


class LeftoverServiceCurve:
    """Leftover service envelope of one scheme, with its occupancy counters.

    slots_per_period is the per-period slot consumption charged inside the
    window; slots_excess is the extra one-burst allowance charged once.
    """

    def __init__(self, scheme: SchedulingScheme, radio: RadioConfig, haptic: HapticTrafficModel):
        self.scheme = scheme
        self.radio = radio
        self.haptic = haptic
        self.blocks = haptic_blocks(radio)
        r_nb = (haptic.t_p_ns - haptic.t_b_ns) // haptic.t_nb_ns
        if scheme is SchedulingScheme.DYNAMIC:
            r_b = effective_burst_count(to_ns(ds_grant_latency(radio)), haptic)
            self.slots_per_period = r_b + r_nb
            self.slots_excess = r_b
        elif scheme is SchedulingScheme.FAST_UPLINK:
            r_b = effective_burst_count(to_ns(fa_grant_latency(radio)), haptic)
            self.slots_per_period = r_b + r_nb
            self.slots_excess = r_b
        elif scheme is SchedulingScheme.SEMI_PERSISTENT:
            self.slots_per_period = int(haptic.t_p_ns // radio.t_pg_ns)
            self.slots_excess = int(haptic.t_b_ns // radio.t_pg_ns)
        elif scheme is SchedulingScheme.SOFT_RESERVATION:
            r_bg = int(haptic.t_b_ns // radio.t_pg_ns)
            self.slots_per_period = r_bg + int(r_nb)
            self.slots_excess = r_bg
        else:
            raise ConfigError(f"unknown scheme {scheme!r}")
        self.slots_per_period = int(self.slots_per_period)
        self.slots_excess = int(self.slots_excess)
        # bits lost per claimed slot, and the two fixed charges
        self.slot_bits = self.blocks * radio.channel_rate * radio.tti
        self.period_bits = self.slot_bits * self.slots_per_period
        self.offset_bits = self.slot_bits * (self.slots_excess + 2)
        self.t_p = haptic.t_p

    def value(self, u):
        """Envelope at window length u seconds, in bits (no positive-part
        clamp; may be negative for small u)."""
        u_arr = np.asarray(u, dtype=float)
        n_p = np.floor(u_arr / self.t_p)
        out = self.radio.total_rate * u_arr - self.period_bits * n_p - self.offset_bits
        return float(out) if np.isscalar(u) or out.ndim == 0 else out

    def long_run_rate(self) -> float:
        """Asymptotic slope of the envelope, bits/s.  This is the correct
        stability rate: the per-period charge grows linearly with the
        window, so it must be netted off the full rate."""
        rate = self.radio.total_rate - self.period_bits / self.t_p
        if rate <= 0:
            raise InfeasibleError(
                f"{self.scheme.value}: latency-critical load saturates capacity "
                f"(per-period consumption {self.period_bits} bits >= {self.radio.total_rate * self.t_p} bits)"
            )
        return rate


def leftover_service(scheme: SchedulingScheme, radio: RadioConfig, haptic: HapticTrafficModel, u):
    """Convenience evaluation of the leftover envelope at window length u."""
    return LeftoverServiceCurve(scheme, radio, haptic).value(u)


def long_run_rate(curve: LeftoverServiceCurve) -> float:
    return curve.long_run_rate()


def max_stable_theta(leftover: LeftoverTrafficModel, service_rate: float) -> float:
    """Largest tail-decay parameter that keeps the flow's equivalent rate
    below the service rate.

    Solved by bisection to 1e-12 relative width, then backed off by 1e-9 so
    the stability inequality stays strict.
    """
    lam, sig = leftover.lambda_rate, leftover.sigma
    if service_rate <= lam * sig:
        raise InfeasibleError(
            f"service rate {service_rate!r} b/s cannot carry the background load "
            f"(mean rate {lam * sig!r} b/s)"
        )
    hi = 1.0 / sig
    while effective_bandwidth(lam, sig, hi) < service_rate:
        hi *= 2.0
    lo = 0.0
    while (hi - lo) > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if effective_bandwidth(lam, sig, mid) < service_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) * (1.0 - 1e-9)


def crossing_time(curve: LeftoverServiceCurve, bits: float) -> float:
    """Conservative inversion: the earliest time after which the envelope
    stays at or above the requested level.

    The envelope dips at every period boundary, but consecutive dips rise
    by long_run_rate * t_p, so only the first period whose dip clears the
    level has to be found; the crossing then lies on the rising segment
    just before it.
    """
    if bits < 0:
        raise ConfigError(f"level must be >= 0, got {bits!r}")
    c = curve.radio.total_rate
    if curve.period_bits == 0:
        # no per-period loss: straight line through -offset
        return (bits + curve.offset_bits) / c
    rate = curve.long_run_rate()
    t_p = curve.t_p
    gain = rate * t_p
    k = max(0, math.ceil((bits + curve.offset_bits) / gain))
    while curve.value(k * t_p) < bits:
        k += 1
    while k > 0 and curve.value((k - 1) * t_p) >= bits:
        k -= 1
    if k == 0:
        return 0.0
    floor_val = curve.value((k - 1) * t_p)
    return (k - 1) * t_p + (bits - floor_val) / c


@dataclass
class DelayBoundResult:
    """Full bound computation for one scheme and outage target."""

    scheme: SchedulingScheme
    epsilon: float
    convention: str
    theta: float
    x_bits: float
    d0_s: float
    long_run_rate_bps: float

    CSV_HEADER = "scheme,tti_s,t_ib_s,epsilon,theta,x_bits,d0_s,long_run_rate_bps"

    def csv_row(self, radio: RadioConfig, haptic: HapticTrafficModel) -> str:
        return (
            f"{self.scheme.value},{radio.tti!r},{haptic.t_ib!r},{self.epsilon!r},"
            f"{self.theta!r},{self.x_bits!r},{self.d0_s!r},{self.long_run_rate_bps!r}"
        )


def leftover_delay_bound_details(
    scheme: SchedulingScheme,
    radio: RadioConfig,
    haptic: HapticTrafficModel,
    leftover: LeftoverTrafficModel,
    epsilon: float,
    convention: str = "violation",
) -> DelayBoundResult:
    """Delay bound for the background traffic with outage target epsilon.

    The default convention makes the tail bound equal epsilon (violation
    probability epsilon).  The alternative 'complement' convention sets
    the tail bound to 1 - epsilon instead; it gives a far smaller level
    and is kept only for reproducing that reading.
    """
    if not (0 < epsilon < 1):
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon!r}")
    if convention not in ("violation", "complement"):
        raise ConfigError(f"unknown outage convention {convention!r}")
    curve = LeftoverServiceCurve(scheme, radio, haptic)
    rate = curve.long_run_rate()
    theta = max_stable_theta(leftover, rate)
    target = epsilon if convention == "violation" else 1.0 - epsilon
    x = math.log(1.0 / target) / theta
    d0 = crossing_time(curve, x)
    return DelayBoundResult(scheme, epsilon, convention, theta, x, d0, rate)


def leftover_delay_bound(
    scheme: SchedulingScheme,
    radio: RadioConfig,
    haptic: HapticTrafficModel,
    leftover: LeftoverTrafficModel,
    epsilon: float,
    convention: str = "violation",
) -> float:
    return leftover_delay_bound_details(scheme, radio, haptic, leftover, epsilon, convention).d0_s


def horizontal_distance(arrival: ArrivalCurve, x: float, curve: LeftoverServiceCurve, horizon: float) -> float:
    """Rigorous-mode bound: the largest horizontal gap between the arrival
    envelope lifted by x and the service envelope.

    The supremum is taken over a grid of window starts at quarter-slot
    resolution plus every period breakpoint; each inner infimum uses the
    conservative inversion shifted by the window start.  Always at least
    crossing_time(curve, x), which is the window-start-zero term.
    """
    if horizon < 2 * curve.t_p:
        raise ConfigError(f"horizon must span several traffic periods, got {horizon!r}")
    rate = arrival.rate()
    lrr = curve.long_run_rate()
    if rate >= lrr:
        raise InfeasibleError(
            f"arrival envelope rate {rate!r} b/s is not below the leftover long-run rate {lrr!r} b/s"
        )
    step = curve.radio.tti / 4.0
    taus = np.unique(
        np.concatenate(
            [
                np.arange(0.0, horizon, step),
                np.arange(0.0, horizon, curve.t_p),
                [horizon],
            ]
        )
    )
    best = -math.inf
    best_tau = 0.0
    for tau in taus:
        level = rate * tau + x
        s = crossing_time(curve, level) - tau
        if s < 0.0:
            s = 0.0
        if s > best:
            best = s
            best_tau = tau
    if best_tau > 0.8 * horizon:
        raise DivergenceError(
            f"horizontal distance still growing at the end of the horizon "
            f"(attained at {best_tau!r} of {horizon!r} s); extend the horizon"
        )
    return best


def combined_violation_bound(f, g=None, grid: int = 256):
    """Combine the arrival-side and service-side violation bounds.

    With an error-free server there is no service-side bound and the
    combination collapses to the arrival-side bound itself; that identity
    is relied on by the delay-bound path, which uses f directly.
    """
    if g is None:
        return f

    def combined(x: float) -> float:
        ys = np.linspace(0.0, x, grid)
        return float(min(f(y) + g(x - y) for y in ys))

    return combined
