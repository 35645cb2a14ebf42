"""Time evolution of  i u_t = -1/2 u_xx + V u - |u|^2 u  by Strang splitting.

One step of size dt is the composition

    half kinetic   : multiply Fourier coefficients by exp(-i (dt/2) k^2 / 2)
    potential+cubic: multiply samples by exp(-i dt (V - |u|^2))
    half kinetic   : as above

Both substeps are exact flows of their own Hamiltonians (|u| is invariant
under the pointwise phase), so discrete mass is conserved to roundoff and
the scheme is second order in dt. Consecutive steps between observer
samples fuse their adjacent half-kinetic factors, halving the transform
count.

Resolution rules for a boosted soliton with carrier velocity v and width
parameter mu:

    k_max >= 4 (v + 3 mu)                  (carrier at k = v, width ~ mu)
    dt    <= 0.1 / (v^2/2 + max|V| + mu^2) (<= 0.1 rad pointwise phase per substep)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidRunError, NumericalBreakdownError
from .grid import Field, Grid, edge_mass_fraction, l2_norm
from .potentials import SampledPotential
from .scattering import BoundState

#: pointwise phase cap per substep (radians)
PHASE_CAP = 0.1


@dataclass(frozen=True)
class SolitonParams:
    """Traveling-wave solution  mu e^{i(x v + mu^2 t/2 - t v^2/2)} sech(mu (x - x0 - v t))."""

    v: float
    x0: float
    mu: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.v) and math.isfinite(self.x0)):
            raise ConfigError("soliton velocity and center must be finite")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ConfigError("soliton width parameter mu must be positive")

    def center(self, t: float) -> float:
        return self.x0 + self.v * t


def _sech(z: np.ndarray) -> np.ndarray:
    a = np.exp(-np.abs(z))
    return 2.0 * a / (1.0 + a * a)


def soliton(
    params: SolitonParams,
    t: float,
    grid: Grid,
    tail_tol: float = 1e-12,
    check_support: bool = True,
) -> Field:
    """Exact soliton samples at time t. With ``check_support`` the envelope
    must be below ``tail_tol`` at both domain edges."""
    p = params
    if check_support:
        worst = max(
            _sech(np.array([p.mu * (grid.x_min - p.center(t))]))[0],
            _sech(np.array([p.mu * (grid.x[-1] - p.center(t))]))[0],
        )
        if p.mu * worst > tail_tol:
            raise InvalidRunError(
                f"soliton tail {p.mu * worst:.3g} exceeds {tail_tol:g} at the domain edge "
                f"(center {p.center(t):.3g} at t={t:g})"
            )
    phase = p.v * grid.x + 0.5 * p.mu**2 * t - 0.5 * p.v**2 * t
    return Field(grid, p.mu * np.exp(1j * phase) * _sech(p.mu * (grid.x - p.center(t))))


def required_kmax(v: float, mu: float = 1.0) -> float:
    return 4.0 * (abs(v) + 3.0 * mu)


def suggested_dt(v: float, sup_v: float = 0.0, mu: float = 1.0, safety: float = 1.0) -> float:
    return PHASE_CAP / (0.5 * v * v + sup_v + mu * mu) / safety


def validate_step_rules(grid: Grid, dt: float, v: float, sup_v: float, mu: float = 1.0) -> None:
    """Raise ConfigError when dt or the grid violate the resolution rules."""
    if dt <= 0 or not math.isfinite(dt):
        raise ConfigError("dt must be positive")
    budget = 0.5 * v * v + sup_v + mu * mu
    if dt * budget > PHASE_CAP * (1 + 1e-9):
        raise ConfigError(
            f"dt={dt:g} exceeds the phase-resolution cap {PHASE_CAP}/(v^2/2+max|V|+mu^2)"
            f" = {PHASE_CAP / budget:g}"
        )
    if grid.k_max < required_kmax(v, mu):
        raise ConfigError(
            f"grid k_max={grid.k_max:.3g} below the resolution rule "
            f"4(v+3mu)={required_kmax(v, mu):.3g}; refine dx"
        )


@dataclass(frozen=True)
class StepperConfig:
    """Time step, observer cadence and validity thresholds for one evolution."""

    dt: float
    obs_cadence: float
    edge_mass_tol: float = 1e-8
    edge_fraction: float = 0.05
    snapshot_every: int | None = None  # snapshots every k-th observation

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError("dt must be positive and finite")
        if not (self.obs_cadence > 0 and math.isfinite(self.obs_cadence)):
            raise ConfigError("observer cadence must be positive")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")


@dataclass(frozen=True)
class ObserverSeries:
    """Per-observation time series written as CSV columns
    t, err_l2, mass, energy, a_abs, edge_mass."""

    times: np.ndarray
    err_l2: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    a_abs: np.ndarray
    edge_mass: np.ndarray

    def __post_init__(self):
        for name in ("times", "err_l2", "mass", "energy", "a_abs", "edge_mass"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.any(np.diff(self.times) <= 0):
            raise ConfigError("observer times must be strictly increasing")
        for name in ("err_l2", "mass", "energy", "a_abs", "edge_mass"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise NumericalBreakdownError(f"observer series {name} contains non-finite entries")

    def to_csv(self, path) -> None:
        header = "t,err_l2,mass,energy,a_abs,edge_mass"
        data = np.column_stack(
            [self.times, self.err_l2, self.mass, self.energy, self.a_abs, self.edge_mass]
        )
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


@dataclass(frozen=True)
class EvolveResult:
    final: Field
    series: ObserverSeries
    valid: bool
    invalid_reason: str | None = None
    snapshot_times: tuple[float, ...] = ()
    snapshots: tuple[Field, ...] = field(default=(), repr=False)


def _kinetic_phase(grid: Grid, dt: float) -> np.ndarray:
    return np.exp(-0.25j * dt * grid.k**2)


def step(u: Field, potential: SampledPotential | None, dt: float) -> Field:
    """One Strang step. Mass-preserving to roundoff; local error O(dt^3)."""
    if potential is not None and potential.grid != u.grid:
        raise ConfigError("field and potential live on different grids")
    v = potential.values if potential is not None else 0.0
    kin = _kinetic_phase(u.grid, dt)
    w = np.fft.ifft(np.fft.fft(u.values) * kin)
    w *= np.exp(-1j * dt * (v - np.abs(w) ** 2))
    w = np.fft.ifft(np.fft.fft(w) * kin)
    if not np.all(np.isfinite(w.view(np.float64))):
        raise NumericalBreakdownError("non-finite field after step")
    return Field(u.grid, w)


def energy(u: Field, potential: SampledPotential | None = None) -> float:
    """Conserved functional  integral 1/4|u_x|^2 + 1/2 V |u|^2 - 1/4 |u|^4 dx
    with the derivative taken spectrally."""
    grid = u.grid
    ux = np.fft.ifft(1j * grid.k * np.fft.fft(u.values))
    dens = 0.25 * np.abs(ux) ** 2 - 0.25 * np.abs(u.values) ** 4
    if potential is not None:
        if potential.grid != grid:
            raise ConfigError("field and potential live on different grids")
        dens = dens + 0.5 * potential.values * np.abs(u.values) ** 2
    return float(grid.dx * np.sum(dens))


def evolve(
    u0: Field,
    potential: SampledPotential | None,
    t_span: tuple[float, float],
    config: StepperConfig,
    reference: SolitonParams | None = None,
    bound_state: BoundState | None = None,
) -> EvolveResult:
    """Iterate Strang steps over ``t_span`` with observer sampling.

    The step count is rounded so observations fall on a uniform time grid
    with spacing <= obs_cadence and the step never exceeds config.dt.
    err_l2 tracks the exact soliton when ``reference`` is given (else 0);
    a_abs tracks |<u, phi>| when ``bound_state`` is given.
    """
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ConfigError("t_span must satisfy t1 > t0")
    grid = u0.grid
    if potential is not None and potential.grid != grid:
        raise ConfigError("field and potential live on different grids")
    if bound_state is not None and bound_state.field.grid != grid:
        raise ConfigError("bound state lives on a different grid")
    span = t1 - t0
    k_obs = max(1, int(math.floor(config.obs_cadence / config.dt + 1e-12)))
    n_seg = max(1, int(math.ceil(span / (k_obs * config.dt) - 1e-12)))
    dt = span / (n_seg * k_obs)
    vpot = potential.values if potential is not None else None
    kin_half = _kinetic_phase(grid, dt)
    kin_full = kin_half * kin_half
    phi = bound_state.field.values if bound_state is not None else None

    times = np.empty(n_seg + 1)
    err = np.zeros(n_seg + 1)
    mass = np.empty(n_seg + 1)
    en = np.empty(n_seg + 1)
    a_abs = np.zeros(n_seg + 1)
    edge = np.empty(n_seg + 1)
    snap_times: list[float] = []
    snaps: list[Field] = []
    valid = True
    reason = None

    def observe(i_obs: int, t: float, u: np.ndarray) -> None:
        nonlocal valid, reason
        if not np.all(np.isfinite(u.view(np.float64))):
            raise NumericalBreakdownError("non-finite field", step=i_obs * k_obs)
        fld = Field(grid, u)
        times[i_obs] = t
        mass[i_obs] = grid.dx * float(np.sum(np.abs(u) ** 2))
        en[i_obs] = energy(fld, potential)
        if reference is not None:
            ref = soliton(reference, t, grid, check_support=False)
            err[i_obs] = l2_norm(Field(grid, u - ref.values))
        if phi is not None:
            a_abs[i_obs] = abs(grid.dx * np.sum(u * np.conj(phi)))
        edge[i_obs] = edge_mass_fraction(fld, config.edge_fraction)
        if valid and edge[i_obs] > config.edge_mass_tol:
            valid = False
            reason = (
                f"edge mass fraction {edge[i_obs]:.3g} exceeded {config.edge_mass_tol:g} "
                f"at t={t:g}"
            )
        if config.snapshot_every is not None and i_obs % config.snapshot_every == 0:
            snap_times.append(t)
            snaps.append(fld)

    u = u0.values.copy()
    observe(0, t0, u)
    for seg in range(n_seg):
        # fused segment: K_half (P K_full)^{k-1} P K_half
        u = np.fft.ifft(np.fft.fft(u) * kin_half)
        for j in range(k_obs):
            absu2 = u.real * u.real + u.imag * u.imag
            u *= np.exp(-1j * dt * (vpot - absu2)) if vpot is not None else np.exp(1j * dt * absu2)
            if not (np.isfinite(u[0].real) and np.isfinite(u[0].imag)):
                raise NumericalBreakdownError("non-finite field", step=seg * k_obs + j)
            if j < k_obs - 1:
                u = np.fft.ifft(np.fft.fft(u) * kin_full)
        u = np.fft.ifft(np.fft.fft(u) * kin_half)
        observe(seg + 1, t0 + (seg + 1) * k_obs * dt, u)

    series = ObserverSeries(times, err, mass, en, a_abs, edge)
    return EvolveResult(
        final=Field(grid, u),
        series=series,
        valid=valid,
        invalid_reason=reason,
        snapshot_times=tuple(snap_times),
        snapshots=tuple(snaps),
    )


@dataclass(frozen=True)
class BoundModeResidual:
    """Consistency of the bound-mode amplitude with its projected equation
    i a' = -lam a - <|u|^2 u, phi>  (lam = -energy > 0)."""

    max_residual: float
    floor: float
    ratio: float
    max_amplitude: float


def bound_mode_residual(
    times,
    snapshots,
    bound_state: BoundState,
) -> BoundModeResidual:
    """Evaluate the amplitude-equation residual along uniformly sampled
    snapshots, with a' from central differences.

    The returned ``floor`` is the intrinsic O(cadence^2) error of the central
    difference, (tau^2/6) max|a'''| with a''' estimated from third
    differences of the data; ``ratio`` is max_residual / floor.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size < 3 or len(snapshots) != times.size:
        raise ConfigError("need at least 3 uniformly spaced snapshots")
    taus = np.diff(times)
    tau = float(taus[0])
    if tau <= 0 or not np.allclose(taus, tau, rtol=1e-9, atol=1e-12):
        raise ConfigError("snapshots must be at uniform cadence")
    grid = snapshots[0].grid
    phi = bound_state.field.values
    lam = -bound_state.energy
    a = np.empty(times.size, dtype=np.complex128)
    cubic = np.empty_like(a)
    for i, snap in enumerate(snapshots):
        u = snap.values
        a[i] = grid.dx * np.sum(u * np.conj(phi))
        cubic[i] = grid.dx * np.sum(np.abs(u) ** 2 * u * np.conj(phi))
    a_dot = (a[2:] - a[:-2]) / (2.0 * tau)
    resid = np.abs(1j * a_dot + lam * a[1:-1] + cubic[1:-1])
    max_res = float(resid.max()) if resid.size else 0.0
    max_amp = float(np.max(np.abs(a)))
    if times.size >= 5:
        a3 = (a[4:] - 2.0 * a[3:-1] + 2.0 * a[1:-3] - a[:-4]) / (2.0 * tau**3)
        a3_max = float(np.max(np.abs(a3)))
    else:
        a3_max = lam**3 * max_amp
    floor = tau**2 / 6.0 * a3_max
    if max_res == 0.0:
        ratio = 0.0
    elif floor == 0.0:
        ratio = math.inf
    else:
        ratio = max_res / floor
    return BoundModeResidual(max_res, floor, ratio, max_amp)
