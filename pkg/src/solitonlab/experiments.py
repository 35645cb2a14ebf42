"""Three-phase transmission experiment and the velocity-scaling study.

A boosted soliton starts at x0 = -x0_factor * v^(1-delta) (at or left of
the required launch threshold -v^(1-delta)), crosses the potential around
t* = |x0|/v, and is tracked against the exact free soliton over the horizon
t_end = (1-delta) log v. The phases are

    phase 1 (pre-interaction)  [0, T1],  T1 = |x0|/v - v^-delta
    phase 2 (interaction)      [T1, T2], T2 = |x0|/v + v^-delta
    phase 3 (post-interaction) [T2, t_end]   (empty when t_end <= T2,
                                              which happens at small v)

The scaling study fits log sup_t ||u - u1||_L2 against log v and passes when
the error is strictly decreasing and the fitted slope is at most
-(2 delta - 1) + 0.1; faster decay than the theoretical envelope passes.
Each velocity also gets a V = 0 companion run at matched resolution whose
sup error is the discretization floor; scaling points must sit at least
10x above their floor to count as physics rather than numerics.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .grid import Field, Grid, l2_norm, make_grid
from .potentials import AdmissibilityReport, PotentialSpec, check_admissibility, sample_potential
from .propagation import (
    EvolveResult,
    ObserverSeries,
    SolitonParams,
    StepperConfig,
    evolve,
    soliton,
    suggested_dt,
    validate_step_rules,
)

#: scaling points must exceed this multiple of the matched-resolution floor
FLOOR_FACTOR = 10.0
#: slack added to the theoretical slope bound -(2 delta - 1)
SLOPE_SLACK = 0.1


@dataclass(frozen=True)
class PhaseTimes:
    """Interaction timing for one (v, x0, delta) triple."""

    t1: float
    t2: float
    t3: float
    t_end: float

    @property
    def interaction_width(self) -> float:
        return self.t2 - self.t1


def phase_times(v: float, x0: float, delta: float) -> PhaseTimes:
    """T1 = |x0|/v - v^-delta, T2 = |x0|/v + v^-delta, T3 = T2 + (1-delta) log v,
    horizon t_end = (1-delta) log v. Rejects T1 < 0 (start inside the
    interaction window)."""
    if not v > 1:
        raise ConfigError(f"velocity must exceed 1, got {v}")
    if not x0 < 0:
        raise ConfigError(f"x0 must be negative, got {x0}")
    if not 0 < delta < 1:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    t_cross = abs(x0) / v
    half = v**-delta
    t1 = t_cross - half
    if t1 < 0:
        raise ConfigError(
            f"T1 = |x0|/v - v^-delta = {t1:.3g} < 0: soliton starts inside the "
            "interaction window; move x0 further out"
        )
    t_end = (1.0 - delta) * math.log(v)
    return PhaseTimes(t1=t1, t2=t_cross + half, t3=t_cross + half + t_end, t_end=t_end)


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of the transmission experiment (defaults follow the run rules)."""

    potential: PotentialSpec
    delta: float
    velocities: tuple[float, ...]
    x0_factor: float = 2.0
    mu: float = 1.0
    margin: float = 30.0
    kmax_factor: float = 4.0
    dt_safety: float = 1.0
    obs_points: int = 800
    edge_mass_tol: float = 1e-8
    override_admissibility: bool = False

    def __post_init__(self):
        s = self.potential.decay_parameter
        upper = s / (1.0 + s) if math.isfinite(s) else 1.0
        if not 0.5 < self.delta < upper:
            raise ConfigError(
                f"delta={self.delta} outside (1/2, s/(1+s)) = (0.5, {upper:.4g}) "
                f"for decay parameter s={s:g}"
            )
        if self.x0_factor < 1.0:
            raise ConfigError("x0_factor must be >= 1 so that x0 <= -v^(1-delta)")
        if not self.velocities or any(not v > 1 for v in self.velocities):
            raise ConfigError("all velocities must exceed 1")
        if self.mu <= 0 or self.margin <= 0 or self.dt_safety < 1.0:
            raise ConfigError("mu and margin must be positive, dt_safety >= 1")
        if self.obs_points < 16:
            raise ConfigError("obs_points must be at least 16")
        object.__setattr__(self, "velocities", tuple(float(v) for v in self.velocities))

    def default_x0(self, v: float) -> float:
        return -self.x0_factor * v ** (1.0 - self.delta)

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.to_dict(),
            "delta": self.delta,
            "velocities": list(self.velocities),
            "x0_factor": self.x0_factor,
            "mu": self.mu,
            "margin": self.margin,
            "kmax_factor": self.kmax_factor,
            "dt_safety": self.dt_safety,
            "obs_points": self.obs_points,
            "edge_mass_tol": self.edge_mass_tol,
            "override_admissibility": self.override_admissibility,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("experiment config must be a JSON object")
        known = {
            "potential", "delta", "velocities", "x0_factor", "mu", "margin",
            "kmax_factor", "dt_safety", "obs_points", "edge_mass_tol",
            "override_admissibility",
        }
        unknown = set(d) - known - {"out_dir", "v", "x0", "dt"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "potential" not in d or "delta" not in d:
            raise ConfigError("config needs at least 'potential' and 'delta'")
        kwargs = {k: d[k] for k in known & set(d) if k not in ("potential", "velocities")}
        velocities = d.get("velocities", [d["v"]] if "v" in d else None)
        if velocities is None:
            raise ConfigError("config needs 'velocities' (or a single 'v')")
        return cls(
            potential=PotentialSpec.from_dict(d["potential"]),
            velocities=tuple(float(v) for v in velocities),
            **kwargs,
        )


@dataclass(frozen=True)
class RunPlan:
    """Grid, step and timing derived from the run rules for one velocity."""

    v: float
    x0: float
    grid: Grid
    dt: float
    cadence: float
    phases: PhaseTimes

    @property
    def t_end(self) -> float:
        return self.phases.t_end


def plan_run(config: ExperimentConfig, v: float, x0: float | None = None) -> RunPlan:
    """Size domain, grid and time step for one velocity.

    The domain covers the soliton path plus the leftward excursion of the
    reflected component (speed ~ -v from the potential after the crossing),
    with ``margin`` clearance so nothing reaches the edge windows.
    """
    if x0 is None:
        x0 = config.default_x0(v)
    threshold = -(v ** (1.0 - config.delta))
    if x0 > threshold + 1e-12:
        raise ConfigError(f"x0={x0:g} violates x0 <= -v^(1-delta) = {threshold:g}")
    phases = phase_times(v, x0, config.delta)
    center = config.potential.center
    t_cross = (center - x0) / v
    left_reach = center - v * max(0.0, phases.t_end - t_cross)
    x_min = min(x0, left_reach) - config.margin
    x_max = x0 + v * phases.t_end + config.margin
    dx_max = math.pi / (config.kmax_factor * (v + 3.0 * config.mu))
    n = max(16, 1 << math.ceil(math.log2((x_max - x_min) / dx_max)))
    if n > 1 << 22:
        raise ConfigError(f"required grid size n={n} is unreasonably large")
    grid = make_grid(x_min, x_max, n)
    dt = suggested_dt(v, config.potential.sup_norm, config.mu, config.dt_safety)
    cadence = min(phases.t_end / config.obs_points, v**-config.delta / 10.0)
    return RunPlan(v=float(v), x0=float(x0), grid=grid, dt=dt, cadence=cadence, phases=phases)


@dataclass(frozen=True)
class RunReport:
    """One transmission run: error series against the exact soliton plus
    per-phase peak errors and validity flags."""

    plan: RunPlan
    potential: PotentialSpec
    delta: float
    mu: float
    series: ObserverSeries
    final: Field
    sup_error: float
    peak_phase1: float | None
    peak_phase2: float | None
    peak_phase3: float | None
    valid: bool
    invalid_reason: str | None
    admissibility: AdmissibilityReport | None
    admissibility_overridden: bool
    snapshot_times: tuple[float, ...] = ()
    snapshots: tuple[Field, ...] = ()

    def to_dict(self) -> dict:
        return {
            "v": self.plan.v,
            "x0": self.plan.x0,
            "delta": self.delta,
            "mu": self.mu,
            "t_end": self.plan.t_end,
            "phases": {
                "t1": self.plan.phases.t1,
                "t2": self.plan.phases.t2,
                "t3": self.plan.phases.t3,
            },
            "grid": {"x_min": self.plan.grid.x_min, "x_max": self.plan.grid.x_max,
                     "n": self.plan.grid.n},
            "dt": self.plan.dt,
            "potential": self.potential.to_dict(),
            "sup_error": self.sup_error,
            "peak_phase1": self.peak_phase1,
            "peak_phase2": self.peak_phase2,
            "peak_phase3": self.peak_phase3,
            "valid": self.valid,
            "invalid_reason": self.invalid_reason,
            "admissibility_overridden": self.admissibility_overridden,
        }


def _phase_peaks(series: ObserverSeries, phases: PhaseTimes):
    t = series.times
    e = series.err_l2

    def peak(lo, hi):
        mask = (t >= lo - 1e-12) & (t <= hi + 1e-12)
        return float(e[mask].max()) if mask.any() else None

    return peak(0.0, phases.t1), peak(phases.t1, phases.t2), peak(phases.t2, phases.t_end)


def _execute_plan(
    plan: RunPlan,
    config: ExperimentConfig,
    potential_spec: PotentialSpec | None,
    snapshot_every: int | None = None,
) -> tuple[EvolveResult, SolitonParams]:
    params = SolitonParams(v=plan.v, x0=plan.x0, mu=config.mu)
    grid = plan.grid
    sup_v = potential_spec.sup_norm if potential_spec is not None else 0.0
    validate_step_rules(grid, plan.dt, plan.v, sup_v, config.mu)
    pot = sample_potential(potential_spec, grid) if potential_spec is not None else None
    u0 = soliton(params, 0.0, grid)
    soliton(params, plan.t_end, grid)  # final support must fit as well
    stepper = StepperConfig(
        dt=plan.dt,
        obs_cadence=plan.cadence,
        edge_mass_tol=config.edge_mass_tol,
        snapshot_every=snapshot_every,
    )
    result = evolve(u0, pot, (0.0, plan.t_end), stepper, reference=params)
    return result, params


def transmission_run(
    config: ExperimentConfig,
    v: float,
    x0: float | None = None,
    dt: float | None = None,
    snapshot_every: int | None = None,
    free_floor: bool = False,
) -> RunReport:
    """Evolve the boosted soliton under V and record ||u - u1|| over the
    horizon. ``free_floor=True`` replaces V by zero on the *same* plan (the
    matched-resolution discretization floor of the scaling study).

    An explicit ``dt`` must still satisfy the phase-resolution cap. The
    potential must be admissible unless config.override_admissibility is
    set; the override is recorded in the report.
    """
    plan = plan_run(config, v, x0)
    if dt is not None:
        plan = replace(plan, dt=float(dt))
    admissibility = None
    if free_floor:
        potential_spec = None
        overridden = True
    else:
        potential_spec = config.potential
        overridden = config.override_admissibility
        if not overridden:
            half = 40.0
            adm_grid = make_grid(config.potential.center - half, config.potential.center + half, 2048)
            admissibility = check_admissibility(config.potential, adm_grid)
            if not admissibility.admissible:
                raise ConfigError(
                    f"potential {config.potential.to_dict()} is not admissible "
                    f"({admissibility.to_dict()}); set override_admissibility to force"
                )
    result, _ = _execute_plan(plan, config, potential_spec, snapshot_every)
    p1, p2, p3 = _phase_peaks(result.series, plan.phases)
    report = RunReport(
        plan=plan,
        potential=potential_spec if potential_spec is not None else PotentialSpec("zero"),
        delta=config.delta,
        mu=config.mu,
        series=result.series,
        final=result.final,
        sup_error=float(result.series.err_l2.max()),
        peak_phase1=p1,
        peak_phase2=p2,
        peak_phase3=p3,
        valid=result.valid,
        invalid_reason=result.invalid_reason,
        admissibility=admissibility,
        admissibility_overridden=overridden,
        snapshot_times=result.snapshot_times,
        snapshots=result.snapshots,
    )
    return report


@dataclass(frozen=True)
class ScalingResult:
    """Velocity sweep against the theoretical decay exponent."""

    velocities: tuple[float, ...]
    errors: tuple[float, ...]
    floors: tuple[float, ...]
    slope: float
    bound_slope: float
    strictly_decreasing: bool
    floor_gate_ok: bool
    runs_valid: bool
    passed: bool
    runs: tuple[RunReport, ...]
    floor_runs: tuple[RunReport, ...]

    @property
    def slope_limit(self) -> float:
        return self.bound_slope + SLOPE_SLACK

    def to_dict(self) -> dict:
        return {
            "velocities": list(self.velocities),
            "per_v_error": list(self.errors),
            "per_v_floor": list(self.floors),
            "slope": self.slope,
            "bound_slope": self.bound_slope,
            "slope_limit": self.slope_limit,
            "strictly_decreasing": self.strictly_decreasing,
            "floor_gate_ok": self.floor_gate_ok,
            "runs_valid": self.runs_valid,
            "pass": self.passed,
            "per_phase_peaks": [
                {"v": r.plan.v, "phase1": r.peak_phase1, "phase2": r.peak_phase2,
                 "phase3": r.peak_phase3}
                for r in self.runs
            ],
        }


def loglog_slope(vs, es) -> float:
    """Least-squares slope of log(es) against log(vs)."""
    vs = np.asarray(vs, dtype=np.float64)
    es = np.asarray(es, dtype=np.float64)
    if vs.size < 2 or np.any(es <= 0) or np.any(vs <= 0):
        raise ConfigError("slope fit needs >= 2 points with positive values")
    return float(np.polyfit(np.log(vs), np.log(es), 1)[0])


def _study_pair(args):
    config, v = args
    main = transmission_run(config, v)
    floor = transmission_run(config, v, free_floor=True)
    return v, main, floor


def scaling_study(config: ExperimentConfig, jobs: int = 1) -> ScalingResult:
    """Run every velocity (plus its matched V=0 floor) and fit the exponent.

    Needs >= 4 velocities spanning at least a factor 8. Runs are independent
    and can execute in parallel; results are keyed by v so the aggregation is
    order-independent.
    """
    vs = sorted(config.velocities)
    if len(vs) < 4:
        raise ConfigError(f"scaling study needs >= 4 velocities, got {len(vs)}")
    if vs[-1] < 8.0 * vs[0] - 1e-9:
        raise ConfigError("velocities must span at least a factor of 8")
    tasks = [(config, v) for v in vs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = {v: (main, floor) for v, main, floor in pool.map(_study_pair, tasks)}
    else:
        results = {v: (main, floor) for v, main, floor in map(_study_pair, tasks)}
    runs = tuple(results[v][0] for v in vs)
    floor_runs = tuple(results[v][1] for v in vs)
    errors = tuple(r.sup_error for r in runs)
    floors = tuple(r.sup_error for r in floor_runs)
    runs_valid = all(r.valid for r in runs) and all(r.valid for r in floor_runs)
    floor_gate_ok = all(e >= FLOOR_FACTOR * f for e, f in zip(errors, floors))
    usable = [(v, e) for v, e, f in zip(vs, errors, floors) if e >= FLOOR_FACTOR * f]
    if len(usable) >= 2:
        slope = loglog_slope([u[0] for u in usable], [u[1] for u in usable])
    else:
        slope = math.nan
    bound_slope = -(2.0 * config.delta - 1.0)
    decreasing = all(errors[i + 1] < errors[i] for i in range(len(errors) - 1))
    passed = (
        runs_valid
        and floor_gate_ok
        and decreasing
        and math.isfinite(slope)
        and slope <= bound_slope + SLOPE_SLACK
    )
    return ScalingResult(
        velocities=tuple(vs),
        errors=errors,
        floors=floors,
        slope=slope,
        bound_slope=bound_slope,
        strictly_decreasing=decreasing,
        floor_gate_ok=floor_gate_ok,
        runs_valid=runs_valid,
        passed=bool(passed),
        runs=runs,
        floor_runs=floor_runs,
    )


# --- soliton-potential forcing diagnostics -----------------------------------


@dataclass(frozen=True)
class ForcingProfile:
    """Discrete L2 norm of V u1(t) over sampled times, with the algebraic
    envelope C <x0 + v t - center>^{-s} (C measured as the sup of the ratio)."""

    times: np.ndarray
    values: np.ndarray
    envelope_constant: float
    envelope: np.ndarray | None

    def __post_init__(self):
        for name in ("times", "values"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def forcing_profile(potential, params: SolitonParams, times) -> ForcingProfile:
    """Evaluate t -> ||V u1(t)||_L2 on the potential's grid.

    For an algebraically decaying potential the profile is dominated by a
    single algebraic envelope in the soliton position; the constant is the
    measured sup of the ratio. Super-algebraic kinds carry no envelope.
    """
    times = np.asarray(times, dtype=np.float64)
    grid = potential.grid
    # support at the extreme sampled times implies support throughout
    for t in (float(times.min()), float(times.max())):
        soliton(params, t, grid)
    vals = np.empty(times.size)
    for i, t in enumerate(times):
        u1 = soliton(params, float(t), grid, check_support=False)
        vals[i] = l2_norm(Field(grid, potential.values * u1.values))
    s = potential.spec.decay_parameter
    if math.isfinite(s):
        pos = params.x0 + params.v * times - potential.spec.center
        decay = (1.0 + pos**2) ** (-s / 2.0)
        with np.errstate(divide="ignore"):
            const = float(np.max(vals / decay))
        env = const * decay
        env.flags.writeable = False
    else:
        const = math.nan
        env = None
    return ForcingProfile(times=times, values=vals, envelope_constant=const, envelope=env)


# --- exponential-window tail bound -------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    """sup_y || e^{-|x-y|} <x>^{-s} ||_L2 / <y>^{-s}, with a domain-doubling
    stability probe."""

    s: float
    y: np.ndarray
    ratios: np.ndarray
    sup_ratio: float
    sup_ratio_doubled: float

    @property
    def stable(self) -> bool:
        return abs(self.sup_ratio_doubled - self.sup_ratio) <= 0.05 * self.sup_ratio


def lemma_error_check(s: float, y_values, half_width: float = 80.0, n: int = 1 << 15) -> LemmaCheck:
    """Quadrature check that the windowed algebraic weight is dominated by
    <y>^{-s} uniformly in the window center y (requires s > 1/2)."""
    if not s > 0.5:
        raise ConfigError(f"tail bound requires s > 1/2, got s={s}")
    y = np.asarray(y_values, dtype=np.float64)
    if y.size == 0 or not np.all(np.isfinite(y)):
        raise ConfigError("y grid must be finite and nonempty")
    if half_width < 2.0 * np.max(np.abs(y)):
        raise ConfigError("quadrature window too small for the requested y range")

    def sup_ratio(hw: float, npts: int) -> np.ndarray:
        x = np.linspace(-hw, hw, npts, endpoint=False)
        dx = x[1] - x[0]
        integrand = np.exp(-2.0 * np.abs(x[None, :] - y[:, None])) * (1.0 + x**2) ** (-s)
        g = np.sqrt(dx * integrand.sum(axis=1))
        return g * (1.0 + y**2) ** (s / 2.0)

    ratios = sup_ratio(half_width, n)
    ratios_doubled = sup_ratio(2.0 * half_width, 2 * n)
    res = LemmaCheck(
        s=float(s),
        y=y,
        ratios=ratios,
        sup_ratio=float(ratios.max()),
        sup_ratio_doubled=float(ratios_doubled.max()),
    )
    ratios.flags.writeable = False
    return res
