"""Traffic models: the periodic bursty latency-critical flow and the
compound-Poisson background flow, plus concrete arrival timelines."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .units import to_ns


@dataclass(frozen=True)
class HapticTrafficModel:
    """Periodic bursty arrivals: each period of length t_p opens with a
    burst of duration t_b (spacing t_ib inside it) and continues with
    sparse arrivals every t_nb until the period ends.

    worst_case_excess_burst controls whether analysis timelines append one
    extra burst at the right edge, the adversarial alignment used when
    constructing service envelopes.
    """

    t_p: float
    t_b: float
    t_ib: float
    t_nb: float
    worst_case_excess_burst: bool = True

    def __post_init__(self):
        problems = []
        if not (0 < self.t_b < self.t_p):
            problems.append(f"haptic.t_b: must satisfy 0 < t_b < haptic.t_p, got t_b={self.t_b!r}, t_p={self.t_p!r}")
        if not (0 < self.t_ib <= self.t_b):
            problems.append(f"haptic.t_ib: must satisfy 0 < t_ib <= haptic.t_b, got t_ib={self.t_ib!r}, t_b={self.t_b!r}")
        if not (0 < self.t_nb <= self.t_p - self.t_b):
            problems.append(
                f"haptic.t_nb: must satisfy 0 < t_nb <= haptic.t_p - haptic.t_b, "
                f"got t_nb={self.t_nb!r}, t_p - t_b={self.t_p - self.t_b!r}"
            )
        if problems:
            raise ConfigError(problems)

    @property
    def t_p_ns(self) -> int:
        return to_ns(self.t_p)

    @property
    def t_b_ns(self) -> int:
        return to_ns(self.t_b)

    @property
    def t_ib_ns(self) -> int:
        return to_ns(self.t_ib)

    @property
    def t_nb_ns(self) -> int:
        return to_ns(self.t_nb)


class SizeDistribution(Enum):
    DETERMINISTIC = "deterministic"
    EXPONENTIAL_MEAN = "exponential_mean"

    @classmethod
    def parse(cls, name: str) -> "SizeDistribution":
        key = name.strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise ConfigError(f"unknown size distribution {name!r}")


@dataclass(frozen=True)
class LeftoverTrafficModel:
    """Background traffic: Poisson arrivals at lambda_rate packets/s with
    per-packet size parameter sigma in bits.  The simulator draws either
    fixed sizes of sigma or exponential sizes with mean sigma."""

    lambda_rate: float
    sigma: float
    size_distribution: SizeDistribution = SizeDistribution.DETERMINISTIC

    def __post_init__(self):
        problems = []
        if self.lambda_rate <= 0:
            problems.append(f"leftover.lambda_rate: must be > 0, got {self.lambda_rate!r}")
        if self.sigma <= 0:
            problems.append(f"leftover.sigma: must be > 0, got {self.sigma!r}")
        if problems:
            raise ConfigError(problems)


@dataclass
class ArrivalTimeline:
    """Ordered (arrival time, size) pairs over a finite horizon."""

    times_s: np.ndarray
    sizes_bits: np.ndarray
    horizon_s: float

    def __post_init__(self):
        self.times_s = np.asarray(self.times_s, dtype=float)
        self.sizes_bits = np.asarray(self.sizes_bits, dtype=float)
        if self.times_s.shape != self.sizes_bits.shape:
            raise ValueError("times and sizes must have matching lengths")
        if len(self.times_s):
            if np.any(np.diff(self.times_s) <= 0):
                raise ValueError("arrival times must be strictly increasing")
            if self.times_s[0] < 0 or self.times_s[-1] > self.horizon_s:
                raise ValueError("arrival times must lie within [0, horizon]")
            if np.any(self.sizes_bits <= 0):
                raise ValueError("sizes must be positive")

    def __len__(self) -> int:
        return len(self.times_s)

    def to_csv(self, path) -> None:
        lines = ["arrival_time_s,size_bits"]
        lines += [f"{t:.9f},{float(s)!r}" for t, s in zip(self.times_s, self.sizes_bits)]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, horizon_s: float | None = None) -> "ArrivalTimeline":
        rows = Path(path).read_text().strip().splitlines()
        if not rows or rows[0] != "arrival_time_s,size_bits":
            raise ValueError(f"{path}: not an arrival timeline CSV")
        times, sizes = [], []
        for row in rows[1:]:
            t, s = row.split(",")
            times.append(float(t))
            sizes.append(float(s))
        if horizon_s is None:
            horizon_s = times[-1] if times else 0.0
        return cls(np.array(times), np.array(sizes), horizon_s)


def period_arrival_offsets_ns(model: HapticTrafficModel) -> np.ndarray:
    """Arrival instants within one traffic period, in ns from the period start.

    The burst occupies [0, t_b) with spacing t_ib; sparse arrivals run from
    t_b (inclusive) to the period end with spacing t_nb.
    """
    burst = np.arange(0, model.t_b_ns, model.t_ib_ns, dtype=np.int64)
    sparse = np.arange(model.t_b_ns, model.t_p_ns, model.t_nb_ns, dtype=np.int64)
    return np.concatenate([burst, sparse])


def haptic_arrivals(model: HapticTrafficModel, horizon: float) -> ArrivalTimeline:
    """Deterministic latency-critical timeline over [0, horizon).

    Sizes are symbolic (one resource-block group per packet, recorded as 1).
    When worst_case_excess_burst is set, one extra burst is laid over the
    final t_b of the horizon and merged with the periodic arrivals.
    """
    if horizon <= 0:
        raise ConfigError(f"horizon must be > 0, got {horizon!r}")
    horizon_ns = to_ns(horizon)
    offs = period_arrival_offsets_ns(model)
    starts = np.arange(0, horizon_ns, model.t_p_ns, dtype=np.int64)
    times = (starts[:, None] + offs[None, :]).ravel()
    times = times[times < horizon_ns]
    if model.worst_case_excess_burst:
        eb_start = max(horizon_ns - model.t_b_ns, 0)
        extra = eb_start + np.arange(0, model.t_b_ns, model.t_ib_ns, dtype=np.int64)
        times = np.concatenate([times, extra[extra < horizon_ns]])
    times = np.unique(times)
    return ArrivalTimeline(times / 1e9, np.ones(len(times)), horizon)


def leftover_arrivals(model: LeftoverTrafficModel, horizon: float, seed: int) -> ArrivalTimeline:
    """Seeded Poisson background timeline on [0, horizon].

    Gaps are exponential with mean 1/lambda_rate; sizes follow the model's
    size law.  The same (model, horizon, seed) always reproduces the same
    timeline.
    """
    if horizon <= 0:
        raise ConfigError(f"horizon must be > 0, got {horizon!r}")
    rng = np.random.default_rng(seed)
    mean_gap = 1.0 / model.lambda_rate
    expected = model.lambda_rate * horizon
    chunk = int(expected + 10 * math.sqrt(expected) + 16)
    gaps = rng.exponential(mean_gap, chunk)
    times = np.cumsum(gaps)
    while len(times) and times[-1] <= horizon:
        more = np.cumsum(rng.exponential(mean_gap, chunk)) + times[-1]
        times = np.concatenate([times, more])
    times = np.unique(times[times <= horizon])
    if model.size_distribution is SizeDistribution.DETERMINISTIC:
        sizes = np.full(len(times), float(model.sigma))
    else:
        sizes = rng.exponential(model.sigma, len(times))
        sizes = np.maximum(sizes, np.finfo(float).tiny)
    return ArrivalTimeline(times, sizes, horizon)


def period_counters(model: HapticTrafficModel, duration: float) -> tuple[int, int, int, int]:
    """Whole-period and per-period arrival counts over a duration.

    Returns (full periods, burst arrivals per period, sparse arrivals per
    period, total arrivals per period), all by exact floor division on the
    ns lattice.
    """
    if duration < 0:
        raise ConfigError(f"duration must be >= 0, got {duration!r}")
    n_p = to_ns(duration) // model.t_p_ns
    r_b = model.t_b_ns // model.t_ib_ns
    r_nb = (model.t_p_ns - model.t_b_ns) // model.t_nb_ns
    return int(n_p), int(r_b), int(r_nb), int(r_b + r_nb)
