"""Configuration loading and experiment orchestration.

Configs are flat INI-style files with sections radio, haptic, leftover,
snc and experiment; keys are the model field names and time values accept
ms/s suffixes.  Omitted keys fall back to the documented defaults, with
the SR and standing-grant periods tracking the TTI (1x and 10x) unless set
explicitly.  Every emitted CSV row carries a hash of the effective
configuration so result files are self-describing.
"""

from __future__ import annotations

import concurrent.futures
import configparser
import hashlib
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .curves import leftover_delay_bound_details
from .errors import ConfigError, InfeasibleError
from .radio import RadioConfig, SchedulingScheme
from .scheduling import DropReport, drop_walk, remainder_of_service
from .simulate import SimConfig, SimReport, empirical_quantile, run as run_simulation
from .traffic import HapticTrafficModel, LeftoverTrafficModel, SizeDistribution

DEFAULT_TTI = 0.5e-3
DEFAULT_N_CHANNELS = 10
DEFAULT_TOTAL_RATE = 1e6          # documented default; a free model parameter
DEFAULT_DEMAND_NORM = 1e-4        # documented default; keeps every TTI feasible
DEFAULT_T_P = 1.0
DEFAULT_T_B = 0.2
DEFAULT_T_IB = 2e-3
DEFAULT_T_NB = 50e-3
DEFAULT_LAMBDA = 4.0
DEFAULT_SIGMA = 12000.0           # 1500 bytes
DEFAULT_EPSILON = 1e-5
DEFAULT_HORIZON = 2000.0
DEFAULT_SEEDS = (1,)

_SECTIONS = {
    "radio": {"n_channels", "total_rate", "tti", "t_sr", "t_pg", "haptic_demand_norm"},
    "haptic": {"t_p", "t_b", "t_ib", "t_nb", "worst_case_excess_burst"},
    "leftover": {"lambda_rate", "sigma", "size_distribution"},
    "snc": {"epsilon", "outage_convention"},
    "experiment": {"horizon", "seeds", "schemes", "workers"},
}

COMPARE_EPSILONS = (1e-1, 1e-2)   # statistically checkable targets for compare mode


def parse_time(text: str, field: str) -> float:
    """Parse a time value with an optional ms/s suffix into seconds."""
    raw = str(text).strip().lower()
    scale = 1.0
    if raw.endswith("ms"):
        raw, scale = raw[:-2], 1e-3
    elif raw.endswith("s"):
        raw = raw[:-1]
    try:
        return float(raw) * scale
    except ValueError:
        raise ConfigError(f"{field}: cannot parse time value {text!r}") from None


@dataclass(frozen=True)
class LoadedConfig:
    radio: RadioConfig
    haptic: HapticTrafficModel
    leftover: LeftoverTrafficModel
    epsilon: float
    outage_convention: str
    horizon: float
    seeds: tuple[int, ...]
    schemes: tuple[SchedulingScheme, ...]
    workers: int
    t_sr_tracks_tti: bool
    t_pg_tracks_tti: bool

    def at_point(self, tti: float | None = None, t_ib: float | None = None) -> "LoadedConfig":
        """Re-derive the configuration at a sweep grid point.  When the SR
        or grant period was defaulted it keeps tracking the new TTI."""
        radio = self.radio
        haptic = self.haptic
        if tti is not None:
            radio = RadioConfig(
                n_channels=radio.n_channels,
                total_rate=radio.total_rate,
                tti=tti,
                t_sr=tti if self.t_sr_tracks_tti else radio.t_sr,
                t_pg=10 * tti if self.t_pg_tracks_tti else radio.t_pg,
                haptic_demand_norm=radio.haptic_demand_norm,
            )
        if t_ib is not None:
            haptic = replace(haptic, t_ib=t_ib)
        return replace(self, radio=radio, haptic=haptic)

    def config_hash(self, scheme: SchedulingScheme | None = None, seed: int | None = None) -> str:
        payload = {
            "radio": [self.radio.n_channels, self.radio.total_rate, self.radio.tti,
                      self.radio.t_sr, self.radio.t_pg, self.radio.haptic_demand_norm],
            "haptic": [self.haptic.t_p, self.haptic.t_b, self.haptic.t_ib, self.haptic.t_nb,
                       self.haptic.worst_case_excess_burst],
            "leftover": [self.leftover.lambda_rate, self.leftover.sigma,
                         self.leftover.size_distribution.value],
            "snc": [self.epsilon, self.outage_convention],
            "scheme": scheme.value if scheme else None,
            "seed": seed,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def load_config(path=None) -> LoadedConfig:
    """Load and validate a configuration file; None or an empty file yields
    the full defaults.  All violations are reported together."""
    parser = configparser.ConfigParser()
    if path is not None:
        target = Path(path)
        if not target.exists():
            raise ConfigError(f"config file not found: {target}")
        try:
            parser.read_string(target.read_text(), source=str(target))
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from None

    problems = []
    for section in parser.sections():
        if section not in _SECTIONS:
            problems.append(f"{section}: unknown section (expected one of {sorted(_SECTIONS)})")
            continue
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                problems.append(f"{section}.{key}: unknown key")

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return default

    tti = parse_time(get("radio", "tti", repr(DEFAULT_TTI)), "radio.tti")
    t_sr_raw = get("radio", "t_sr")
    t_pg_raw = get("radio", "t_pg")
    t_sr = parse_time(t_sr_raw, "radio.t_sr") if t_sr_raw is not None else tti
    t_pg = parse_time(t_pg_raw, "radio.t_pg") if t_pg_raw is not None else 10 * tti

    radio = haptic = leftover = None
    try:
        radio = RadioConfig(
            n_channels=int(get("radio", "n_channels", DEFAULT_N_CHANNELS)),
            total_rate=float(get("radio", "total_rate", DEFAULT_TOTAL_RATE)),
            tti=tti,
            t_sr=t_sr,
            t_pg=t_pg,
            haptic_demand_norm=parse_time(
                get("radio", "haptic_demand_norm", repr(DEFAULT_DEMAND_NORM)), "radio.haptic_demand_norm"
            ),
        )
    except (ConfigError, ValueError) as exc:
        problems.extend(getattr(exc, "problems", [str(exc)]))
    try:
        haptic = HapticTrafficModel(
            t_p=parse_time(get("haptic", "t_p", repr(DEFAULT_T_P)), "haptic.t_p"),
            t_b=parse_time(get("haptic", "t_b", repr(DEFAULT_T_B)), "haptic.t_b"),
            t_ib=parse_time(get("haptic", "t_ib", repr(DEFAULT_T_IB)), "haptic.t_ib"),
            t_nb=parse_time(get("haptic", "t_nb", repr(DEFAULT_T_NB)), "haptic.t_nb"),
            worst_case_excess_burst=str(get("haptic", "worst_case_excess_burst", "true")).lower()
            in ("1", "true", "yes", "on"),
        )
    except (ConfigError, ValueError) as exc:
        problems.extend(getattr(exc, "problems", [str(exc)]))
    try:
        leftover = LeftoverTrafficModel(
            lambda_rate=float(get("leftover", "lambda_rate", DEFAULT_LAMBDA)),
            sigma=float(get("leftover", "sigma", DEFAULT_SIGMA)),
            size_distribution=SizeDistribution.parse(get("leftover", "size_distribution", "deterministic")),
        )
    except (ConfigError, ValueError) as exc:
        problems.extend(getattr(exc, "problems", [str(exc)]))

    try:
        epsilon = float(get("snc", "epsilon", DEFAULT_EPSILON))
    except ValueError:
        problems.append(f"snc.epsilon: cannot parse {get('snc', 'epsilon')!r}")
        epsilon = DEFAULT_EPSILON
    convention = str(get("snc", "outage_convention", "violation")).strip()
    if not (0 < epsilon < 1):
        problems.append(f"snc.epsilon: must be in (0, 1), got {epsilon!r}")
    if convention not in ("violation", "complement"):
        problems.append(f"snc.outage_convention: must be 'violation' or 'complement', got {convention!r}")

    horizon = DEFAULT_HORIZON
    try:
        horizon = parse_time(get("experiment", "horizon", repr(DEFAULT_HORIZON)), "experiment.horizon")
    except ConfigError as exc:
        problems.extend(exc.problems)
    try:
        seeds = tuple(int(s) for s in str(get("experiment", "seeds", "1")).split(",") if s.strip())
    except ValueError:
        problems.append(f"experiment.seeds: must be a comma-separated integer list")
        seeds = DEFAULT_SEEDS
    schemes_raw = get("experiment", "schemes", "DS,SPS,SRR,FA")
    schemes = []
    for token in str(schemes_raw).split(","):
        if not token.strip():
            continue
        try:
            schemes.append(SchedulingScheme.parse(token))
        except ConfigError as exc:
            problems.extend(exc.problems)
    try:
        workers = int(get("experiment", "workers", 1))
    except ValueError:
        problems.append(f"experiment.workers: must be an integer, got {get('experiment', 'workers')!r}")
        workers = 1
    if not seeds:
        problems.append("experiment.seeds: at least one seed is required")

    if problems:
        raise ConfigError(problems)
    return LoadedConfig(
        radio=radio,
        haptic=haptic,
        leftover=leftover,
        epsilon=epsilon,
        outage_convention=convention,
        horizon=horizon,
        seeds=seeds,
        schemes=tuple(schemes),
        workers=max(1, workers),
        t_sr_tracks_tti=t_sr_raw is None,
        t_pg_tracks_tti=t_pg_raw is None,
    )


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str
    loaded: LoadedConfig
    schemes: tuple[SchedulingScheme, ...]
    epsilon: float
    seeds: tuple[int, ...]
    horizon: float
    out: str | None = None
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] | None = None
    workers: int = 1

    def __post_init__(self):
        problems = []
        if self.mode not in ("bound", "drop", "remainder", "simulate", "sweep", "compare"):
            problems.append(f"mode: unknown mode {self.mode!r}")
        if not self.schemes:
            problems.append("schemes: at least one scheduling scheme is required")
        if self.mode in ("sweep", "compare"):
            if self.sweep_param not in ("t_ib", "tti"):
                problems.append(f"sweep.param: must be 't_ib' or 'tti', got {self.sweep_param!r}")
            values = self.sweep_values or ()
            if len(values) < 2:
                problems.append("sweep: at least two grid values are required (steps >= 2)")
            if any(v <= 0 for v in values):
                problems.append("sweep: grid values must be positive")
            if list(values) != sorted(values):
                problems.append("sweep: grid values must be ascending")
        if problems:
            raise ConfigError(problems)


def linear_grid(start: float, stop: float, steps: int) -> tuple[float, ...]:
    """Closed linear grid snapped to the ns lattice so boundary coincidence
    tests behave identically across runs."""
    if steps < 2:
        raise ConfigError("sweep: steps must be >= 2")
    if not (0 < start < stop):
        raise ConfigError(f"sweep: range must be positive and ordered, got [{start!r}, {stop!r}]")
    vals = [start + i * (stop - start) / (steps - 1) for i in range(steps)]
    return tuple(round(v * 1e9) / 1e9 for v in vals)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _bound_fields(point: LoadedConfig, scheme: SchedulingScheme, epsilon: float) -> tuple[list, str]:
    try:
        details = leftover_delay_bound_details(
            scheme, point.radio, point.haptic, point.leftover, epsilon, point.outage_convention
        )
        return [details.theta, details.x_bits, details.d0_s, details.long_run_rate_bps], "ok"
    except InfeasibleError:
        return ["", "", "", ""], "infeasible"


def _sweep_point_rows(args) -> list[str]:
    point, schemes, epsilon, mode, seeds, horizon = args
    rows = []
    for scheme in schemes:
        walk = drop_walk(scheme, point.radio, point.haptic)
        remainder = remainder_of_service(scheme, point.radio, point.haptic)
        bound, status = _bound_fields(point, scheme, epsilon)
        base = [
            scheme.value, point.radio.tti, point.haptic.t_ib, epsilon,
            walk.drop_rate, remainder, *bound, status,
        ]
        if mode == "sweep":
            rows.append(",".join(_fmt(v) for v in base) + f",{point.config_hash(scheme)}")
            continue
        walk_slotted = drop_walk(scheme, point.radio, point.haptic, slotted=True)
        for seed in seeds:
            sim = run_simulation(SimConfig(point.radio, point.haptic, point.leftover, scheme, horizon, seed))
            checks = []
            sim_cols = [seed, sim.haptic_drop_rate, walk_slotted.drop_rate]
            checks.append(sim.haptic_drop_rate == walk_slotted.drop_rate)
            for eps in COMPARE_EPSILONS:
                b, b_status = _bound_fields(point, scheme, eps)
                if len(sim.leftover_delays):
                    q = empirical_quantile(sim.leftover_delays, 1 - eps)
                else:
                    q = float("nan")
                sim_cols.extend([q, b[2] if b_status == "ok" else ""])
                if b_status == "ok" and len(sim.leftover_delays):
                    checks.append(q <= b[2])
            verdict = "pass" if all(checks) else "fail"
            if status == "infeasible":
                verdict = "infeasible"
            row = base + sim_cols + [verdict]
            rows.append(",".join(_fmt(v) for v in row) + f",{point.config_hash(scheme, seed)}")
    return rows


SWEEP_HEADER = (
    "scheme,tti_s,t_ib_s,epsilon,drop_rate,remainder_bits,theta,x_bits,d0_s,"
    "long_run_rate_bps,status"
)
COMPARE_HEADER = (
    SWEEP_HEADER
    + ",seed,sim_drop_rate,walk_drop_rate_slotted,sim_p90_s,d0_eps0.1_s,sim_p99_s,d0_eps0.01_s,verdict"
)


def run_experiment(spec: ExperimentSpec) -> int:
    """Execute one experiment and write its CSV.  Returns the exit status:
    0 on success, 2 when compare mode found a violated check."""
    loaded = spec.loaded
    lines = []
    failures = False

    if spec.mode == "bound":
        lines.append("scheme,tti_s,t_ib_s,epsilon,theta,x_bits,d0_s,long_run_rate_bps,status,config_hash")
        for scheme in spec.schemes:
            fields, status = _bound_fields(loaded, scheme, spec.epsilon)
            row = [scheme.value, loaded.radio.tti, loaded.haptic.t_ib, spec.epsilon, *fields, status]
            lines.append(",".join(_fmt(v) for v in row) + f",{loaded.config_hash(scheme)}")

    elif spec.mode == "drop":
        lines.append(DropReport.CSV_HEADER + ",config_hash")
        for scheme in spec.schemes:
            report = drop_walk(scheme, loaded.radio, loaded.haptic)
            lines.append(report.csv_row(loaded.radio, loaded.haptic) + f",{loaded.config_hash(scheme)}")

    elif spec.mode == "remainder":
        lines.append("scheme,tti_s,t_ib_s,remainder_bits,config_hash")
        for scheme in spec.schemes:
            remainder = remainder_of_service(scheme, loaded.radio, loaded.haptic)
            row = [scheme.value, loaded.radio.tti, loaded.haptic.t_ib, remainder]
            lines.append(",".join(_fmt(v) for v in row) + f",{loaded.config_hash(scheme)}")

    elif spec.mode == "simulate":
        lines.append(SimReport.CSV_HEADER + ",config_hash")
        for scheme in spec.schemes:
            for seed in spec.seeds:
                sim = run_simulation(
                    SimConfig(loaded.radio, loaded.haptic, loaded.leftover, scheme, spec.horizon, seed)
                )
                lines.append(
                    sim.csv_row(loaded.radio, loaded.haptic) + f",{loaded.config_hash(scheme, seed)}"
                )

    else:  # sweep / compare
        header = SWEEP_HEADER if spec.mode == "sweep" else COMPARE_HEADER
        lines.append(header + ",config_hash")
        tasks = []
        for value in spec.sweep_values:
            point = loaded.at_point(tti=value) if spec.sweep_param == "tti" else loaded.at_point(t_ib=value)
            tasks.append((point, spec.schemes, spec.epsilon, spec.mode, spec.seeds, spec.horizon))
        if spec.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=spec.workers) as pool:
                results = list(pool.map(_sweep_point_rows, tasks))
        else:
            results = [_sweep_point_rows(task) for task in tasks]
        for rows in results:
            lines.extend(rows)
        if spec.mode == "compare":
            failures = any(line.split(",")[-2] == "fail" for line in lines[1:])

    text = "\n".join(lines) + "\n"
    if spec.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(spec.out).write_text(text)
    return 2 if failures else 0
