"""Time integration: exact acoustic propagation + RK4 on the filtered variables.

The penalized operator is diagonalized per mode.  With sigma = (k . v_hat)/|k|
the acoustic pair

    a = sigma + c_hat   (phase exp(-i dt |k| / eps))
    b = sigma - c_hat   (phase exp(+i dt |k| / eps))

carries the same information as the pair (Q v - i grad |D|^-1 c,
|D|^-1 div v + i c): both are linear combinations of sigma and c_hat, and
both satisfy free wave equations with frequency |k|/eps.  The incompressible
part P v and the mean of c are untouched by the propagator.

Stepping is Lawson's integrating-factor RK4: stages see the nonlinearity in
filtered coordinates with the acoustic phases applied at the stage times, so
the linear penalized system is solved exactly for any step size and the
nonlinear order is four.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import SpectralField, VecField
from .grid import Grid
from .state import State, StepControl

__all__ = [
    "FilteredState",
    "StageDiagnostics",
    "StepInfo",
    "acoustic_propagate",
    "nonlinear_rhs",
    "step_compressible",
    "step_incompressible",
    "phase_integral",
]


def _unit_k(grid: Grid):
    cached = getattr(grid, "_unit_k", None)
    if cached is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(grid.k_abs > 0.0, 1.0 / np.where(grid.k_abs > 0, grid.k_abs, 1.0), 0.0)
        cached = (grid.k1 * inv, grid.k2 * inv, grid.k3 * inv, inv)
        grid._unit_k = cached
    return cached


@dataclass
class FilteredState:
    """Per-mode diagonal variables of the penalized system.

    Reconstruction back to a State is the exact inverse of the filtering
    (round trip at rounding level).
    """

    grid: Grid
    pv: tuple[np.ndarray, np.ndarray, np.ndarray]
    a: np.ndarray
    b: np.ndarray
    c_mean: float
    eps: float
    gamma_bar: float
    t: float

    @classmethod
    def from_state(cls, state: State) -> "FilteredState":
        grid = state.grid
        u1, u2, u3, _ = _unit_k(grid)
        h1, h2, h3 = state.v.hats()
        sigma = u1 * h1 + u2 * h2 + u3 * h3
        c_hat = state.c.hat
        pv = (h1 - u1 * sigma, h2 - u2 * sigma, h3 - u3 * sigma)
        return cls(
            grid=grid,
            pv=pv,
            a=sigma + c_hat,
            b=sigma - c_hat,
            c_mean=state.c_mean,
            eps=state.eps,
            gamma_bar=state.gamma_bar,
            t=state.t,
        )

    def to_state(self) -> State:
        grid = self.grid
        u1, u2, u3, _ = _unit_k(grid)
        sigma = 0.5 * (self.a + self.b)
        c_hat = 0.5 * (self.a - self.b)
        c_hat = c_hat.copy()
        c_hat[0, 0, 0] = 0.0
        v = VecField.from_hat(
            grid,
            (self.pv[0] + u1 * sigma, self.pv[1] + u2 * sigma, self.pv[2] + u3 * sigma),
        )
        c = SpectralField.from_hat(grid, c_hat)
        return State(
            v=v, c=c, c_mean=self.c_mean, eps=self.eps, gamma_bar=self.gamma_bar, t=self.t
        )

    # -- linear algebra used by the RK stages --------------------------------

    def phase(self, dt: float) -> "FilteredState":
        """Exact free-wave flow over dt: unitary per mode, P v untouched."""
        factor = np.exp(-1j * (dt / self.eps) * self.grid.k_abs)
        return FilteredState(
            grid=self.grid,
            pv=self.pv,
            a=self.a * factor,
            b=self.b * np.conj(factor),
            c_mean=self.c_mean,
            eps=self.eps,
            gamma_bar=self.gamma_bar,
            t=self.t,
        )

    def add_scaled(self, other: "FilteredState", coef: float) -> "FilteredState":
        return FilteredState(
            grid=self.grid,
            pv=tuple(p + coef * q for p, q in zip(self.pv, other.pv)),
            a=self.a + coef * other.a,
            b=self.b + coef * other.b,
            c_mean=self.c_mean + coef * other.c_mean,
            eps=self.eps,
            gamma_bar=self.gamma_bar,
            t=self.t,
        )

    def acoustic_l2_sq(self) -> float:
        """Parseval sum of |a|^2 + |b|^2 over the full lattice."""
        w = self.grid.mode_multiplicity
        return float((w * (np.abs(self.a) ** 2 + np.abs(self.b) ** 2)).sum())


def acoustic_propagate(fs: FilteredState, dt: float) -> FilteredState:
    """Free acoustic flow: each branch mode picks up exp(-+ i dt |k|/eps)."""
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    out = fs.phase(dt)
    out.t = fs.t + dt
    return out


def phase_integral(grid: Grid, eps: float, dt: float) -> np.ndarray:
    """Per-mode integral of the decaying branch phase over one step.

    rho(dt) = (1 - exp(-i dt |k|/eps)) / (i |k|/eps); the growing branch uses
    the conjugate.  The k = 0 entry is the dt limit.
    """
    omega = grid.k_abs / eps
    num = 1.0 - np.exp(-1j * dt * omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(omega > 0.0, num / (1j * np.where(omega > 0, omega, 1.0)), dt)
    return rho


# -- nonlinearity ---------------------------------------------------------------


@dataclass
class StageDiagnostics:
    """Grid maxima of the fields seen by the first RK stage."""

    v_inf: float = 0.0
    c_inf: float = 0.0
    grad_v_inf: float = 0.0
    grad_c_inf: float = 0.0
    div_inf: float = 0.0


def nonlinear_rhs(state: State, diag: StageDiagnostics | None = None):
    """Tendency (dv, dc, dc_mean) of the non-penalized quadratic terms.

    dv = -(v . grad) v - gamma_bar c grad c,
    dc = -v . grad c - gamma_bar c div v,
    with c including its mean; all products 2/3-dealiased.  ``diag`` is
    filled with the grid maxima already materialized along the way.
    """
    grid = state.grid
    gb = state.gamma_bar
    k1, k2, k3 = grid.k1, grid.k2, grid.k3
    mask = grid.dealias_mask

    v_vals = state.v.values()
    c_vals = state.c.values + state.c_mean
    v_hats = state.v.hats()
    c_hat = state.c.hat

    grads = [
        [grid.ifft(1j * k * h) for k in (k1, k2, k3)]
        for h in v_hats
    ]
    grad_c = [grid.ifft(1j * k * c_hat) for k in (k1, k2, k3)]
    div_v = grads[0][0] + grads[1][1] + grads[2][2]

    dv_hats = []
    for i in range(3):
        adv = v_vals[0] * grads[i][0] + v_vals[1] * grads[i][1] + v_vals[2] * grads[i][2]
        dv_hats.append(grid.fft(-adv - gb * c_vals * grad_c[i]) * mask)
    dc_vals = -(v_vals[0] * grad_c[0] + v_vals[1] * grad_c[1] + v_vals[2] * grad_c[2])
    dc_vals -= gb * c_vals * div_v
    dc_hat = grid.fft(dc_vals) * mask
    dc_mean = float(dc_hat[0, 0, 0].real) / grid.n**3
    dc_hat = dc_hat.copy()
    dc_hat[0, 0, 0] = 0.0

    if diag is not None:
        diag.v_inf = max(float(np.abs(a).max()) for a in v_vals)
        diag.c_inf = float(np.abs(c_vals).max())
        diag.grad_v_inf = max(float(np.abs(g).max()) for row in grads for g in row)
        diag.grad_c_inf = max(float(np.abs(g).max()) for g in grad_c)
        diag.div_inf = float(np.abs(div_v).max())
    return dv_hats, dc_hat, dc_mean


def _filter_tendency(fs: FilteredState, dv_hats, dc_hat, dc_mean) -> FilteredState:
    grid = fs.grid
    u1, u2, u3, _ = _unit_k(grid)
    sigma = u1 * dv_hats[0] + u2 * dv_hats[1] + u3 * dv_hats[2]
    return FilteredState(
        grid=grid,
        pv=(dv_hats[0] - u1 * sigma, dv_hats[1] - u2 * sigma, dv_hats[2] - u3 * sigma),
        a=sigma + dc_hat,
        b=sigma - dc_hat,
        c_mean=dc_mean,
        eps=fs.eps,
        gamma_bar=fs.gamma_bar,
        t=fs.t,
    )


def _filtered_rhs(fs: FilteredState, diag: StageDiagnostics | None = None) -> FilteredState:
    dv, dc, dcm = nonlinear_rhs(fs.to_state(), diag)
    return _filter_tendency(fs, dv, dc, dcm)


def _zero_rhs(fs: FilteredState, diag: StageDiagnostics | None = None) -> FilteredState:
    if diag is not None:
        state = fs.to_state()
        diag.v_inf = max(float(np.abs(a).max()) for a in state.v.values())
        diag.c_inf = float(np.abs(state.c.values + state.c_mean).max())
        div_hat = 1j * (
            fs.grid.k1 * state.v[0].hat + fs.grid.k2 * state.v[1].hat + fs.grid.k3 * state.v[2].hat
        )
        diag.div_inf = float(np.abs(fs.grid.ifft(div_hat)).max())
    zeros = lambda: np.zeros(fs.grid.spectral_shape, dtype=complex)
    return FilteredState(
        grid=fs.grid, pv=(zeros(), zeros(), zeros()), a=zeros(), b=zeros(),
        c_mean=0.0, eps=fs.eps, gamma_bar=fs.gamma_bar, t=fs.t,
    )


# -- stepping -------------------------------------------------------------------


@dataclass
class StepInfo:
    dt: float
    diag: StageDiagnostics
    acoustic_integral_a: np.ndarray | None = None
    acoustic_integral_b: np.ndarray | None = None


def choose_dt(state: State, ctrl: StepControl) -> float:
    if ctrl.fixed_dt is not None:
        return float(ctrl.fixed_dt)
    v_inf = max(float(np.abs(a).max()) for a in state.v.values())
    c_inf = float(np.abs(state.c.values + state.c_mean).max())
    advective = ctrl.cfl * state.grid.h / (v_inf + state.gamma_bar * c_inf + 1e-12)
    return min(advective, ctrl.dt_eps_factor * state.eps)


def step_compressible(
    state: State,
    ctrl: StepControl,
    dt: float | None = None,
    linear_only: bool = False,
    track_acoustic_integral: bool = False,
) -> tuple[State, StepInfo]:
    """One Lawson-RK4 step of the penalized system.

    Returns the advanced state plus per-step diagnostics.  When
    ``track_acoustic_integral`` is set the per-mode integral of (a, b) over
    the step is returned as well, evaluated with the exact free phase and a
    trapezoid in the slow (filtered) amplitude; for a linear run this makes
    the accumulated time integral exact.
    """
    diag = StageDiagnostics()
    rhs = _zero_rhs if linear_only else _filtered_rhs
    if dt is None:
        dt = choose_dt(state, ctrl)
    h = float(dt)
    fs = FilteredState.from_state(state)

    k1 = rhs(fs, diag)
    s2 = fs.add_scaled(k1, h / 2.0).phase(h / 2.0)
    k2 = rhs(s2).phase(-h / 2.0)
    s3 = fs.add_scaled(k2, h / 2.0).phase(h / 2.0)
    k3 = rhs(s3).phase(-h / 2.0)
    s4 = fs.add_scaled(k3, h).phase(h)
    k4 = rhs(s4).phase(-h)

    combo = k1.add_scaled(k2, 2.0).add_scaled(k3, 2.0).add_scaled(k4, 1.0)
    out = fs.add_scaled(combo, h / 6.0).phase(h)
    out.t = state.t + h

    info = StepInfo(dt=h, diag=diag)
    if track_acoustic_integral:
        rho = phase_integral(state.grid, state.eps, h)
        inv_phase = np.exp(1j * (h / state.eps) * state.grid.k_abs)
        slow_a = 0.5 * (fs.a + inv_phase * out.a)
        slow_b = 0.5 * (fs.b + np.conj(inv_phase) * out.b)
        info.acoustic_integral_a = rho * slow_a
        info.acoustic_integral_b = np.conj(rho) * slow_b
    return out.to_state(), info


def _project(grid: Grid, hats):
    u1, u2, u3, _ = _unit_k(grid)
    sigma = u1 * hats[0] + u2 * hats[1] + u3 * hats[2]
    return (hats[0] - u1 * sigma, hats[1] - u2 * sigma, hats[2] - u3 * sigma)


def _incompressible_rhs(grid: Grid, hats, diag: StageDiagnostics | None = None):
    mask = grid.dealias_mask
    vals = [grid.ifft(h) for h in hats]
    grads = [[grid.ifft(1j * k * h) for k in (grid.k1, grid.k2, grid.k3)] for h in hats]
    out = []
    for i in range(3):
        adv = vals[0] * grads[i][0] + vals[1] * grads[i][1] + vals[2] * grads[i][2]
        out.append(grid.fft(-adv) * mask)
    if diag is not None:
        diag.v_inf = max(float(np.abs(a).max()) for a in vals)
        diag.grad_v_inf = max(float(np.abs(g).max()) for row in grads for g in row)
        diag.div_inf = float(np.abs(grads[0][0] + grads[1][1] + grads[2][2]).max())
    return _project(grid, out)


def step_incompressible(
    v: VecField, ctrl: StepControl, dt: float | None = None
) -> tuple[VecField, StepInfo]:
    """RK4 step of dv = -P[(v . grad) v], re-projecting every stage."""
    grid = v.grid
    diag = StageDiagnostics()
    if dt is None:
        if ctrl.fixed_dt is not None:
            dt = float(ctrl.fixed_dt)
        else:
            v_inf = max(float(np.abs(a).max()) for a in v.values())
            dt = ctrl.cfl * grid.h / (v_inf + 1e-12)
    h = float(dt)
    y0 = v.hats()

    k1 = _incompressible_rhs(grid, y0, diag)
    y1 = tuple(a + 0.5 * h * b for a, b in zip(y0, k1))
    k2 = _incompressible_rhs(grid, y1)
    y2 = tuple(a + 0.5 * h * b for a, b in zip(y0, k2))
    k3 = _incompressible_rhs(grid, y2)
    y3 = tuple(a + h * b for a, b in zip(y0, k3))
    k4 = _incompressible_rhs(grid, y3)

    new = tuple(
        a + (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y0, k1, k2, k3, k4)
    )
    new = _project(grid, new)
    return VecField.from_hat(grid, new), StepInfo(dt=h, diag=diag)


def spectral_tail_fraction(state: State) -> float:
    """Energy fraction in the top octave of the retained band (blow-up proxy)."""
    grid = state.grid
    kd = grid.n / 3.0
    tail = (grid.k_abs > (2.0 / 3.0) * kd) & grid.dealias_mask
    w = grid.mode_multiplicity
    total = 0.0
    tail_e = 0.0
    for h in (*state.v.hats(), state.c.hat):
        e = w * np.abs(h) ** 2
        total += float(e.sum())
        tail_e += float(e[tail].sum())
    return tail_e / total if total > 0.0 else 0.0
