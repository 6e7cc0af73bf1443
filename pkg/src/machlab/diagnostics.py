"""Monitored scalar quantities: Lorentz norms, energy, vorticity structure, geometry.

Everything here is a pure computation over a state snapshot; time
accumulation (the V integral, L^1-in-time aggregates) is owned by the run
loop.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .axisym import cyl_coords
from .field import SpectralField, VecField
from .lp import BesovSpec, DyadicFilterBank, besov_norm, get_filter_bank
from .operators import curl, div, grad, helmholtz
from .state import PreconditionError, State
from .symmetry import sampled_rotation_residual, vector_rotation_residual


# -- rearrangement and Lorentz norms ------------------------------------------


class Rearrangement:
    """Nonincreasing rearrangement of grid values with uniform cell measure."""

    def __init__(self, values: np.ndarray, cell_volume: float):
        flat = np.abs(np.asarray(values, dtype=float)).ravel()
        if flat.size == 0:
            raise ValueError("rearrangement of an empty value set")
        self.sorted_desc = np.sort(flat)[::-1]
        self.cell_volume = float(cell_volume)
        self.total_measure = self.cell_volume * flat.size

    @classmethod
    def from_field(cls, f: SpectralField) -> "Rearrangement":
        return cls(f.values, f.grid.cell_volume)

    def lp_norm(self, p: float) -> float:
        if p == np.inf:
            return float(self.sorted_desc[0])
        return float((self.sorted_desc**p).sum() * self.cell_volume) ** (1.0 / p)

    def lorentz_norm(self, p: float, q: float) -> float:
        """Exact quadrature of the piecewise-constant rearrangement.

        For q < inf this is (sum_j f*_j^q (p/q)(t_{j+1}^{q/p} - t_j^{q/p}))^{1/q}
        with t_j = j * cell_volume; for q = inf the sup is attained at the
        right endpoint of each cell.
        """
        if p <= 0.0:
            raise ValueError(f"Lorentz exponent p must be positive, got {p}")
        if q < 1.0:
            raise ValueError(f"Lorentz exponent q must be >= 1, got {q}")
        if p <= 1.0 and q != p:
            warnings.warn(
                "Lorentz quadrature with p <= 1 is only meaningful for bounded "
                "grid data; treat the value with care",
                stacklevel=2,
            )
        n = self.sorted_desc.size
        t = np.arange(n + 1, dtype=float) * self.cell_volume
        if q == np.inf:
            return float((t[1:] ** (1.0 / p) * self.sorted_desc).max())
        qp = q / p
        increments = t[1:] ** qp - t[:-1] ** qp
        total = float((self.sorted_desc**q * increments).sum() * (p / q))
        return total ** (1.0 / q)


def lorentz_norm(f: SpectralField, p: float, q: float) -> float:
    return Rearrangement.from_field(f).lorentz_norm(p, q)


# -- energy --------------------------------------------------------------------


def energy(state: State) -> float:
    """Quadratic energy ||v||_{L^2}^2 + ||c||_{L^2}^2 (mean of c included)."""
    c_sq = state.c.l2_norm() ** 2 + state.grid.volume * state.c_mean**2
    return state.v.l2_norm() ** 2 + c_sq


@dataclass
class EnergyInequalityReport:
    c_e: float
    worst_ratio: float
    margin: float
    max_drift_rel: float
    passed: bool


def energy_ineq_check(
    times: np.ndarray,
    energies: np.ndarray,
    div_infs: np.ndarray,
    gamma_bar: float,
    margin: float = 1.1,
) -> EnergyInequalityReport:
    """Check dE/dt <= C_e ||div v||_inf E between consecutive samples.

    C_e = 2 max(1, |1 - gamma_bar|).  The discrete form is the interval
    Gronwall bound E_{i+1} <= E_i exp(margin * C_e * avg(d) * dt); the worst
    ratio log(E_{i+1}/E_i) / (C_e avg(d) dt) over growing intervals is
    reported.  Intervals where the bound's exponent is below rounding only
    contribute to the drift figure.
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    div_infs = np.asarray(div_infs, dtype=float)
    c_e = 2.0 * max(1.0, abs(1.0 - gamma_bar))
    worst = 0.0
    e0 = energies[0]
    drift = float(np.abs(energies - e0).max() / e0) if e0 > 0 else 0.0
    for i in range(len(times) - 1):
        dt = times[i + 1] - times[i]
        if dt <= 0 or energies[i] <= 0.0:
            continue
        growth = np.log(energies[i + 1] / energies[i])
        bound = c_e * 0.5 * (div_infs[i] + div_infs[i + 1]) * dt
        if bound > 1e-13:
            if growth > 0.0:
                worst = max(worst, growth / bound)
        elif growth > 1e-10:
            worst = np.inf
    return EnergyInequalityReport(
        c_e=c_e,
        worst_ratio=worst,
        margin=margin,
        max_drift_rel=drift,
        passed=bool(worst <= margin),
    )


# -- vorticity structure ---------------------------------------------------------


def _refined_peak(values: np.ndarray, mask: np.ndarray) -> float:
    """Masked sup with a separable three-point parabola correction.

    The grid max of a smooth field lags the continuum sup by O(h^2) as the
    peak drifts between grid planes; the vertex correction removes that
    phase jitter (exact for locally quadratic peaks).
    """
    masked = np.where(mask, np.abs(values), 0.0)
    peak = float(masked.max())
    idx = np.unravel_index(int(masked.argmax()), masked.shape)
    n = values.shape
    correction = 0.0
    for axis in range(3):
        lo = list(idx)
        hi = list(idx)
        lo[axis] = (idx[axis] - 1) % n[axis]
        hi[axis] = (idx[axis] + 1) % n[axis]
        if not (mask[tuple(lo)] and mask[tuple(hi)]):
            continue
        f_lo = masked[tuple(lo)]
        f_hi = masked[tuple(hi)]
        curv = 2.0 * peak - f_lo - f_hi
        if curv > 0.0:
            correction += (f_hi - f_lo) ** 2 / (8.0 * curv)
    return peak + correction


@dataclass
class ZetaDiagnostics:
    """Masked Omega^theta / r with its quadrature norms.

    The sup norm is evaluated on a 2x zero-padded grid with a quadratic
    vertex refinement; integral norms use plain cell quadrature.
    """

    values: np.ndarray
    mask: np.ndarray
    cell_volume: float
    r_min: float
    fine_values: np.ndarray | None = None
    fine_mask: np.ndarray | None = None

    def lp_norm(self, p: float) -> float:
        if p == np.inf:
            if self.fine_values is not None:
                return _refined_peak(self.fine_values, self.fine_mask)
            return _refined_peak(self.values, self.mask)
        vals = np.abs(self.values[self.mask])
        return float((vals**p).sum() * self.cell_volume) ** (1.0 / p)

    def lorentz_norm(self, p: float, q: float) -> float:
        return Rearrangement(self.values[self.mask], self.cell_volume).lorentz_norm(p, q)


def zeta(state_or_v: State | VecField, r_min: float | None = None, geom_tol: float = 1e-3) -> ZetaDiagnostics:
    """zeta = (s1 Omega^2 - s2 Omega^1) / r^2 on grid points with r >= r_min.

    The state must be approximately axisymmetric without swirl; the cheap
    lattice-rotation residual gates the computation.
    """
    v = state_or_v.v if isinstance(state_or_v, State) else state_or_v
    grid = v.grid
    if r_min is None:
        r_min = 2.0 * grid.h
    residual = vector_rotation_residual(v)
    if residual > geom_tol:
        raise PreconditionError(
            f"state is not axisymmetric enough for zeta (residual {residual:.2e} > {geom_tol:.0e})"
        )
    s1, s2, r, _ = cyl_coords(grid)
    mask = (r >= r_min) * np.ones(grid.shape, dtype=bool)
    if not mask.any():
        raise ValueError("zeta mask is empty; reduce r_min")
    omega = curl(v)
    r_sq = np.where(r > 0.0, r**2, 1.0)
    vals = (s1 * omega[1].values - s2 * omega[0].values) / r_sq
    vals = np.where(mask, vals, 0.0)

    # sup norm support: the quotient on the 2x oversampled lattice
    m = 2 * grid.n
    hf = grid.h / 2.0
    xf = (np.arange(m) * hf).reshape(m, 1, 1)
    s1f = xf - np.pi
    s2f = s1f.reshape(1, m, 1)
    rf = np.sqrt(s1f**2 + s2f**2)
    fine_mask = (rf >= r_min) * np.ones((m, m, m), dtype=bool)
    o1f = grid.oversampled_values(omega[0].hat)
    o2f = grid.oversampled_values(omega[1].hat)
    rf_sq = np.where(rf > 0.0, rf**2, 1.0)
    fine_vals = np.where(fine_mask, (s1f * o2f - s2f * o1f) / rf_sq, 0.0)

    return ZetaDiagnostics(
        values=vals,
        mask=mask,
        cell_volume=grid.cell_volume,
        r_min=r_min,
        fine_values=fine_vals,
        fine_mask=fine_mask,
    )


@dataclass
class GeometryResiduals:
    swirl: float
    axisym_residual: float
    omega_cross_etheta: float

    def max(self) -> float:
        return max(self.swirl, self.axisym_residual, self.omega_cross_etheta)


def geometry_residuals(
    state_or_v: State | VecField,
    rng: np.random.Generator | None = None,
    n_random_alpha: int = 4,
    n_sample_points: int = 1000,
) -> GeometryResiduals:
    """Swirl fraction, rotation residual, and vorticity alignment defect.

    Exact quarter-turn lattice rotations are always used; when
    ``n_random_alpha`` > 0 the residual also covers that many random angles
    measured by direct Fourier evaluation at ``n_sample_points`` points.
    """
    v = state_or_v.v if isinstance(state_or_v, State) else state_or_v
    grid = v.grid
    s1, s2, r, _ = cyl_coords(grid)
    r_safe = np.where(r > 0.0, r, 1.0)
    on_axis = (r == 0.0) * np.ones(grid.shape, dtype=bool)

    v1, v2, v3 = v.values()
    v_norm = v.l2_norm()
    if v_norm == 0.0:
        return GeometryResiduals(0.0, 0.0, 0.0)

    vtheta = np.where(on_axis, 0.0, (s1 * v2 - s2 * v1) / r_safe)
    swirl = float(np.sqrt((vtheta**2).sum() * grid.cell_volume)) / v_norm

    axisym = vector_rotation_residual(v)
    if n_random_alpha > 0:
        rng = rng or np.random.default_rng(0)
        alphas = rng.uniform(0.0, 2.0 * np.pi, size=n_random_alpha)
        # sample inside the inscribed cylinder: rotations of points with
        # r > pi leave the fundamental domain and wrap, which would measure
        # box periodicity instead of the data's symmetry
        radius = 0.95 * np.pi * np.sqrt(rng.uniform(0.0, 1.0, size=n_sample_points))
        angle = rng.uniform(0.0, 2.0 * np.pi, size=n_sample_points)
        points = np.stack(
            [
                np.pi + radius * np.cos(angle),
                np.pi + radius * np.sin(angle),
                rng.uniform(0.0, 2.0 * np.pi, size=n_sample_points),
            ],
            axis=1,
        )
        axisym = max(axisym, sampled_rotation_residual(v, alphas, points))

    omega = curl(v)
    o1, o2, o3 = omega.values()
    # Omega x e_theta = (-O3 s1 / r, -O3 s2 / r, (O1 s1 + O2 s2)/r)
    c1 = np.where(on_axis, 0.0, -o3 * s1 / r_safe)
    c2 = np.where(on_axis, 0.0, -o3 * s2 / r_safe)
    c3 = np.where(on_axis, 0.0, (o1 * s1 + o2 * s2) / r_safe)
    omega_sq = float((o1**2 + o2**2 + o3**2).sum())
    if omega_sq == 0.0:
        cross = 0.0
    else:
        cross = float(np.sqrt((c1**2 + c2**2 + c3**2).sum() / omega_sq))
    return GeometryResiduals(swirl=swirl, axisym_residual=axisym, omega_cross_etheta=cross)


# -- Lipschitz / logarithmic-bound monitor --------------------------------------


@dataclass
class LipschitzReport:
    grad_v_inf: float
    grad_c_inf: float
    omega_inf: float
    omega_b0: float
    div_b0: float
    v_l2: float
    log_ratio: float


def lipschitz_monitor(state: State, bank: DyadicFilterBank | None = None) -> LipschitzReport:
    """Instantaneous Lipschitz norms and the logarithmic-estimate ratio.

    The reported ratio ||grad v||_inf / (||v||_2 + ||div v||_{B^0_inf1} +
    ||Omega||_{B^0_inf1}) tracks the critical logarithmic bound; the run
    harness asserts it stays below 10.
    """
    bank = bank or get_filter_bank(state.grid)
    spec = BesovSpec(s=0.0, p=np.inf, r=1.0)

    grad_v_inf = max(g.lp_norm(np.inf) for comp in state.v for g in grad(comp))
    grad_c_inf = max(g.lp_norm(np.inf) for g in grad(state.c))
    omega = curl(state.v)
    omega_inf = omega.linf_norm()
    omega_b0 = sum(besov_norm(comp, spec, bank) for comp in omega)
    div_b0 = besov_norm(div(state.v), spec, bank)
    v_l2 = state.v.l2_norm()
    denom = v_l2 + div_b0 + omega_b0
    ratio = grad_v_inf / denom if denom > 0 else 0.0
    return LipschitzReport(
        grad_v_inf=grad_v_inf,
        grad_c_inf=grad_c_inf,
        omega_inf=omega_inf,
        omega_b0=omega_b0,
        div_b0=div_b0,
        v_l2=v_l2,
        log_ratio=ratio,
    )


def q_part_linf(v: VecField) -> float:
    return helmholtz(v)[1].linf_norm()
