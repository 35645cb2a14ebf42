"""Stationary scattering theory for H = -1/2 d^2/dx^2 + V.

Frequency-domain solutions f(lam, x) of

    -1/2 f'' + V f = 1/2 lam^2 f        (equivalently f'' = (2V - lam^2) f)

with plane-wave behaviour e^{+i lam x} at the right edge (sign +1) or
e^{-i lam x} at the left edge (sign -1) are integrated inward across the
grid. Because the initial data asserts exact plane waves at the starting
node, every quantity computed here is *exactly* the scattering data of the
edge-truncated potential; the difference to the infinite-line potential is
the reported truncation estimate.

Integrator: one real 2x2 transfer matrix per substep, built from the
fourth-order two-point Gauss-Magnus exponential for the linear system
y' = [[0,1],[Q,0]] y. The matrix is the exact propagator for locally
constant Q, so free regions are integrated exactly and the step error is
governed by the variation of V alone. Cells of width dx are subdivided so
that (local wave number) * (substep) stays below SUBSTEP_PHASE radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import AccuracyError, ConfigError
from .grid import Field, Grid, inner_product, l2_norm, make_grid
from .potentials import (
    DEFAULT_EDGE_TOL,
    DEFAULT_NEGATIVE_EPS,
    DEFAULT_RESONANCE_EPS,
    PotentialSpec,
    SampledPotential,
    sample_potential,
)

#: target phase advance per integrator substep (radians)
SUBSTEP_PHASE = 0.02

_GAUSS_OFFSETS = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)


@dataclass(frozen=True)
class JostSolution:
    """Frequency-lam solution with plane-wave data at one edge."""

    lam: float
    sign: int
    grid: Grid
    f: np.ndarray = field(repr=False)
    fprime: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("f", "fprime"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.complex128)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class WronskianResult:
    value: complex
    std: float
    scale: float


@dataclass(frozen=True)
class ScatteringCoefficients:
    lam: float
    T: complex
    R: complex
    wronskian: complex
    t_matching: complex
    unitarity_defect: float
    t_agreement: float
    wronskian_std: float


@dataclass(frozen=True)
class BoundState:
    """Normalized eigenfunction of H at negative energy (sign fixed positive
    at the peak, l2_norm == 1 to roundoff)."""

    energy: float
    field: Field


@dataclass(frozen=True)
class ResonanceProbe:
    detected: bool
    w0_abs: float
    w0_abs_doubled: float
    stable: bool


def _substeps(grid: Grid, lam_max: float, sup_v: float) -> int:
    rate = math.sqrt(lam_max * lam_max + 2.0 * sup_v)
    return max(1, math.ceil(grid.dx * rate / SUBSTEP_PHASE))


def _check_edge(spec: PotentialSpec, x_edge: float, edge_tol: float) -> None:
    v_edge = abs(float(spec(np.array([x_edge]))[0]))
    if v_edge >= edge_tol:
        raise ConfigError(
            f"|V({x_edge:g})| = {v_edge:.3g} exceeds edge tolerance {edge_tol:g}; "
            "plane-wave asymptotics invalid, enlarge the domain"
        )


def _propagate_batch(
    spec: PotentialSpec, grid: Grid, lams: np.ndarray, sign: int
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the frequency ODE inward from one edge for a batch of lam.

    Returns (f, fprime), each of shape (len(lams), n), sampled on grid nodes.
    """
    n = grid.n
    dx = grid.dx
    lams = np.asarray(lams, dtype=np.float64)
    m = _substeps(grid, float(np.max(np.abs(lams))), spec.sup_norm)
    h = -dx / m if sign > 0 else dx / m

    # starting node and node sequence in integration order
    if sign > 0:
        starts = grid.x[n - 1 : 0 : -1]  # cell i propagates node n-1-i -> n-2-i
    else:
        starts = grid.x[0 : n - 1]
    offsets = h * (np.arange(m)[:, None] + np.asarray(_GAUSS_OFFSETS)[None, :])
    v_gauss = spec(starts[:, None, None] + offsets[None, :, :])  # (n-1, m, 2)

    # accumulate the per-cell transfer matrix as a product of substep exponentials
    lam2 = lams * lams  # (K,)
    c00 = np.ones((n - 1, lams.size))
    c01 = np.zeros_like(c00)
    c10 = np.zeros_like(c00)
    c11 = np.ones_like(c00)
    sqrt3_h2_12 = math.sqrt(3.0) * h * h / 12.0
    for step in range(m):
        q1 = 2.0 * v_gauss[:, step, 0][:, None] - lam2[None, :]
        q2 = 2.0 * v_gauss[:, step, 1][:, None] - lam2[None, :]
        qbar = 0.5 * (q1 + q2)
        c = sqrt3_h2_12 * (q1 - q2)
        musq = c * c + h * h * qbar
        omega = np.sqrt(np.abs(musq))
        positive = musq >= 0.0
        cosm = np.where(positive, np.cosh(omega), np.cos(omega))
        small = omega < 1e-8
        den = np.where(small, 1.0, omega)
        sinhc = np.where(
            small,
            1.0 + musq / 6.0,
            np.where(positive, np.sinh(den) / den, np.sin(den) / den),
        )
        m00 = cosm + sinhc * c
        m01 = sinhc * h
        m10 = sinhc * h * qbar
        m11 = cosm - sinhc * c
        c00, c01, c10, c11 = (
            m00 * c00 + m01 * c10,
            m00 * c01 + m01 * c11,
            m10 * c00 + m11 * c10,
            m10 * c01 + m11 * c11,
        )

    f = np.empty((lams.size, n), dtype=np.complex128)
    fp = np.empty_like(f)
    start_idx = n - 1 if sign > 0 else 0
    y_f = np.exp(1j * sign * lams * grid.x[start_idx])
    y_g = 1j * sign * lams * y_f
    f[:, start_idx] = y_f
    fp[:, start_idx] = y_g
    idx = start_idx
    stride = -1 if sign > 0 else 1
    for i in range(n - 1):
        y_f, y_g = c00[i] * y_f + c01[i] * y_g, c10[i] * y_f + c11[i] * y_g
        idx += stride
        f[:, idx] = y_f
        fp[:, idx] = y_g
    return f, fp


def jost(
    potential: SampledPotential,
    lam: float,
    sign: int,
    edge_tol: float = DEFAULT_EDGE_TOL,
) -> JostSolution:
    """Solution asymptotic to e^{i*sign*lam*x} at the sign-side edge.

    lam = 0 is allowed (plane-wave data degenerates to (1, 0)) and is what
    resonance detection uses; scattering coefficients need lam > 0.
    """
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    if not math.isfinite(lam):
        raise ConfigError("lam must be finite")
    grid = potential.grid
    edge_x = grid.x[-1] if sign > 0 else grid.x[0]
    _check_edge(potential.spec, edge_x, edge_tol)
    f, fp = _propagate_batch(potential.spec, grid, np.array([lam]), sign)
    if not (np.all(np.isfinite(f.view(np.float64))) and np.all(np.isfinite(fp.view(np.float64)))):
        raise AccuracyError(f"non-finite values while integrating lam={lam}")
    return JostSolution(float(lam), sign, grid, f[0], fp[0])


def _interior(n: int) -> slice:
    return slice(n // 8, n - n // 8)


def wronskian(
    f_plus: JostSolution,
    f_minus: JostSolution,
    rel_tol: float = 1e-4,
) -> WronskianResult:
    """Spatial median of  f_+ f_-' - f_- f_+'  over the interior.

    The pointwise values agree up to integration error; a spatial standard
    deviation beyond ``rel_tol`` (relative to the value, with a floor on the
    natural scale of the product) raises AccuracyError.
    """
    if f_plus.grid != f_minus.grid:
        raise ConfigError("Jost solutions live on different grids")
    if f_plus.lam != f_minus.lam:
        raise ConfigError("Jost solutions have different frequencies")
    sl = _interior(f_plus.grid.n)
    w = f_plus.f[sl] * f_minus.fprime[sl] - f_minus.f[sl] * f_plus.fprime[sl]
    value = complex(np.median(w.real), np.median(w.imag))
    std = float(np.sqrt(np.mean(np.abs(w - value) ** 2)))
    scale = float(
        np.median(
            np.abs(f_plus.f[sl]) * np.abs(f_minus.fprime[sl])
            + np.abs(f_minus.f[sl]) * np.abs(f_plus.fprime[sl])
        )
    )
    if std > rel_tol * (abs(value) + 1e-3 * scale):
        raise AccuracyError(
            f"Wronskian varies across the domain (std {std:.3g} vs |W| {abs(value):.3g}); "
            "integration accuracy insufficient"
        )
    return WronskianResult(value, std, scale)


def detect_resonance(
    spec: PotentialSpec,
    grid: Grid,
    resonance_eps: float = DEFAULT_RESONANCE_EPS,
    edge_tol: float = DEFAULT_EDGE_TOL,
) -> ResonanceProbe:
    """Zero-energy resonance test: |W(0)| < resonance_eps, cross-checked on a
    domain twice as large (same spacing). Disagreement marks the probe
    unstable (inconclusive)."""

    def w0_abs(g: Grid) -> float:
        pot = sample_potential(spec, g)
        fp = jost(pot, 0.0, +1, edge_tol=edge_tol)
        fm = jost(pot, 0.0, -1, edge_tol=edge_tol)
        return abs(wronskian(fp, fm).value)

    w0 = w0_abs(grid)
    doubled = make_grid(
        grid.x_min - grid.length / 2.0, grid.x_max + grid.length / 2.0, 2 * grid.n
    )
    w0d = w0_abs(doubled)
    detected = w0 < resonance_eps
    stable = detected == (w0d < resonance_eps)
    return ResonanceProbe(bool(detected), w0, w0d, bool(stable))


def _coeffs_from_batch(
    grid: Grid,
    lams: np.ndarray,
    fp_f: np.ndarray,
    fp_g: np.ndarray,
    fm_f: np.ndarray,
    fm_g: np.ndarray,
) -> list[ScatteringCoefficients]:
    sl = _interior(grid.n)
    out = []
    x_left = grid.x[0]
    for i, lam in enumerate(lams):
        w = fp_f[i, sl] * fm_g[i, sl] - fm_f[i, sl] * fp_g[i, sl]
        w_med = complex(np.median(w.real), np.median(w.imag))
        w_std = float(np.sqrt(np.mean(np.abs(w - w_med) ** 2)))
        if abs(w_med) < 1e-12:
            raise AccuracyError(f"degenerate Wronskian at lam={lam}")
        t_w = -2j * lam / w_med
        # decompose f_+ = a e^{i lam x} + b e^{-i lam x} at the far (left) edge
        phase = np.exp(1j * lam * x_left)
        a = 0.5 * (fp_f[i, 0] + fp_g[i, 0] / (1j * lam)) / phase
        b = 0.5 * (fp_f[i, 0] - fp_g[i, 0] / (1j * lam)) * phase
        t_m = 1.0 / a
        r = b / a
        out.append(
            ScatteringCoefficients(
                lam=float(lam),
                T=t_w,
                R=complex(r),
                wronskian=w_med,
                t_matching=complex(t_m),
                unitarity_defect=float(abs(abs(t_w) ** 2 + abs(r) ** 2 - 1.0)),
                t_agreement=float(abs(t_w - t_m)),
                wronskian_std=w_std,
            )
        )
    return out


def scattering_table(
    potential: SampledPotential,
    lams,
    edge_tol: float = DEFAULT_EDGE_TOL,
) -> list[ScatteringCoefficients]:
    """Transmission/reflection coefficients for a batch of lam > 0.

    T comes from the Wronskian (-2 i lam / W); R and the cross-check T come
    from plane-wave matching of f_+ at the far edge.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=np.float64))
    if np.any(lams <= 0.0) or not np.all(np.isfinite(lams)):
        raise ConfigError("scattering coefficients need lam > 0")
    grid = potential.grid
    _check_edge(potential.spec, grid.x[0], edge_tol)
    _check_edge(potential.spec, grid.x[-1], edge_tol)
    fp_f, fp_g = _propagate_batch(potential.spec, grid, lams, +1)
    fm_f, fm_g = _propagate_batch(potential.spec, grid, lams, -1)
    return _coeffs_from_batch(grid, lams, fp_f, fp_g, fm_f, fm_g)


def scattering_coefficients(
    potential: SampledPotential, lam: float, edge_tol: float = DEFAULT_EDGE_TOL
) -> ScatteringCoefficients:
    return scattering_table(potential, [lam], edge_tol=edge_tol)[0]


def bound_states(
    potential: SampledPotential,
    negative_eps: float = DEFAULT_NEGATIVE_EPS,
    refine_tol: float | None = None,
) -> list[BoundState]:
    """All eigenvalues of H below -negative_eps with normalized eigenvectors.

    Second-order central differences with Dirichlet walls at the domain edges
    (exponentially localized eigenfunctions make the wall placement
    irrelevant on adequate domains). With ``refine_tol`` set, the energies
    are recomputed on a doubled grid and a shift beyond the tolerance raises
    AccuracyError.
    """
    grid = potential.grid
    energies, vectors = _tridiag_eig(potential.values, grid.dx, negative_eps)
    if refine_tol is not None:
        fine_grid = make_grid(grid.x_min, grid.x_max, 2 * grid.n)
        fine = sample_potential(potential.spec, fine_grid)
        fine_energies, _ = _tridiag_eig(fine.values, fine_grid.dx, negative_eps)
        if len(fine_energies) != len(energies):
            raise AccuracyError("bound-state count changed under grid doubling")
        if energies.size and np.max(np.abs(fine_energies - energies)) > refine_tol:
            raise AccuracyError(
                f"bound-state energies shift by {np.max(np.abs(fine_energies - energies)):.3g} "
                f"under grid doubling (tol {refine_tol:g}); grid too coarse"
            )
    states = []
    for j, energy in enumerate(energies):
        phi = vectors[:, j] / math.sqrt(grid.dx)
        if phi[int(np.argmax(np.abs(phi)))] < 0:
            phi = -phi
        states.append(BoundState(float(energy), Field(grid, phi.astype(np.complex128))))
    return states


def _tridiag_eig(v: np.ndarray, dx: float, negative_eps: float):
    diag = 1.0 / dx**2 + v
    off = np.full(v.size - 1, -0.5 / dx**2)
    lower = float(np.min(v)) - 1.0
    upper = -abs(negative_eps)
    if lower >= upper:
        return np.empty(0), np.empty((v.size, 0))
    energies, vectors = scipy.linalg.eigh_tridiagonal(
        diag, off, select="v", select_range=(lower, upper)
    )
    order = np.argsort(energies)
    return energies[order], vectors[:, order]


def eigen_residual(potential: SampledPotential, state: BoundState) -> float:
    """l2 norm of (H phi - E phi) under the defining finite-difference H."""
    grid = potential.grid
    phi = state.field.values.real
    hphi = np.empty_like(phi)
    inv = 0.5 / grid.dx**2
    hphi[1:-1] = -inv * (phi[2:] - 2 * phi[1:-1] + phi[:-2])
    hphi[0] = -inv * (phi[1] - 2 * phi[0])
    hphi[-1] = -inv * (phi[-2] - 2 * phi[-1])
    hphi += potential.values * phi
    return float(np.sqrt(grid.dx * np.sum((hphi - state.energy * phi) ** 2)))


def project(f: Field, bound_state: BoundState | None) -> tuple[complex, Field]:
    """Split f into its bound-mode amplitude and the rest:
    a = <f, phi>, continuum = f - a*phi. Without a bound state a = 0."""
    if bound_state is None:
        return 0.0 + 0.0j, f
    if f.grid != bound_state.field.grid:
        raise ConfigError("field and bound state live on different grids")
    a = inner_product(f, bound_state.field)
    return a, Field(f.grid, f.values - a * bound_state.field.values)


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    floor: float


def ode_residual(sol: JostSolution, potential: SampledPotential) -> ResidualReport:
    """Central-difference residual of the frequency ODE over the interior,
    together with the finite-difference truncation floor it must be judged
    against (the second difference of an oscillatory f carries an intrinsic
    dx^2 * f'''' error that is not an integration defect)."""
    grid = potential.grid
    if grid != sol.grid:
        raise ConfigError("solution and potential live on different grids")
    dx = grid.dx
    f = sol.f
    fxx = (f[2:] - 2 * f[1:-1] + f[:-2]) / dx**2
    r = -0.5 * fxx + (potential.values[1:-1] - 0.5 * sol.lam**2) * f[1:-1]
    sl = _interior(grid.n)
    res = float(np.sqrt(np.mean(np.abs(r[sl]) ** 2)))
    fnorm = float(np.sqrt(np.mean(np.abs(f[sl]) ** 2))) or 1.0
    gnorm = float(np.sqrt(np.mean(np.abs(sol.fprime[sl]) ** 2)))
    q = 2.0 * potential.values - sol.lam**2
    dq = np.diff(q) / dx
    d2q = np.diff(q, 2) / dx**2
    f4 = (
        float(np.max(np.abs(d2q), initial=0.0)) * fnorm
        + 2.0 * float(np.max(np.abs(dq), initial=0.0)) * gnorm
        + float(np.max(np.abs(q)) ** 2) * fnorm
    )
    return ResidualReport(residual=res, floor=dx**2 / 24.0 * f4)


@dataclass(frozen=True)
class SpectralReport:
    """Bound states, resonance verdict and the T/R table for one potential."""

    potential: PotentialSpec
    lams: tuple[float, ...]
    coefficients: tuple[ScatteringCoefficients, ...]
    bound_state_energies: tuple[float, ...]
    resonance: ResonanceProbe
    truncation_estimate: float

    @property
    def max_unitarity_defect(self) -> float:
        return max((c.unitarity_defect for c in self.coefficients), default=0.0)

    @property
    def max_t_agreement(self) -> float:
        return max((c.t_agreement for c in self.coefficients), default=0.0)

    @property
    def sup_reflection_times_lam(self) -> float:
        """Measured sup of |R(lam)| * lam over the table; the asymptotic
        constant is reported, never asserted."""
        return max((abs(c.R) * c.lam for c in self.coefficients), default=0.0)

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.to_dict(),
            "bound_state_energies": list(self.bound_state_energies),
            "resonance": {
                "detected": self.resonance.detected,
                "w0_abs": self.resonance.w0_abs,
                "w0_abs_doubled": self.resonance.w0_abs_doubled,
                "stable": self.resonance.stable,
            },
            "max_unitarity_defect": self.max_unitarity_defect,
            "max_t_agreement": self.max_t_agreement,
            "sup_reflection_times_lam": self.sup_reflection_times_lam,
            "truncation_estimate": self.truncation_estimate,
            "table": [
                {
                    "lambda": c.lam,
                    "re_T": c.T.real,
                    "im_T": c.T.imag,
                    "re_R": c.R.real,
                    "im_R": c.R.imag,
                    "unitarity_defect": c.unitarity_defect,
                }
                for c in self.coefficients
            ],
        }


def build_spectral_report(
    spec: PotentialSpec,
    grid: Grid,
    lams,
    edge_tol: float = DEFAULT_EDGE_TOL,
    resonance_eps: float = DEFAULT_RESONANCE_EPS,
) -> SpectralReport:
    pot = sample_potential(spec, grid)
    coeffs = scattering_table(pot, lams, edge_tol=edge_tol)
    states = bound_states(pot)
    probe = detect_resonance(spec, grid, resonance_eps=resonance_eps, edge_tol=edge_tol)
    half = min(abs(grid.x_min - spec.center), abs(grid.x[-1] - spec.center))
    lam_min = min(c.lam for c in coeffs)
    truncation = spec.tail_integral(half) / max(lam_min, 1.0)
    return SpectralReport(
        potential=spec,
        lams=tuple(float(c.lam) for c in coeffs),
        coefficients=tuple(coeffs),
        bound_state_energies=tuple(s.energy for s in states),
        resonance=probe,
        truncation_estimate=float(truncation),
    )
