"""Single-run driver: stepping, per-step accumulation, sampling, checkpoints.

Time-integral aggregates use the trapezoid rule over every accepted step; the
acoustic branch amplitudes are additionally integrated mode-wise with the
exact free phase over each step (exact for linear runs, second order in the
slow envelope otherwise), which is the time-averaged counterpart of the raw
sup-norm aggregates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .axisym import make_ill_prepared
from .checkpoint import write_checkpoint
from .config import RunConfig
from .diagnostics import (
    energy,
    energy_ineq_check,
    geometry_residuals,
    lipschitz_monitor,
    zeta,
)
from .field import SpectralField
from .grid import Grid
from .lp import get_filter_bank
from .operators import div, helmholtz
from .report import RunReport
from .runner_support import ReferenceSeries  # noqa: F401  (re-export)
from .solver import (
    FilteredState,
    spectral_tail_fraction,
    step_compressible,
    step_incompressible,
)
from .state import PreconditionError, State


def _sample_times(t_final: float, sample_dt: float) -> list[float]:
    times = [0.0]
    k = 1
    while k * sample_dt < t_final - 1e-12:
        times.append(k * sample_dt)
        k += 1
    if t_final > 0.0:
        times.append(t_final)
    return times


def initial_state(config: RunConfig, grid: Grid | None = None) -> State:
    grid = grid or Grid(config.n)
    recipe = config.recipe.to_recipe()
    state = make_ill_prepared(
        grid, recipe, eps=config.eps, gamma_bar=config.gamma_bar, prepared=config.recipe.prepared
    )
    if config.mode == "incompressible":
        pv = helmholtz(state.v)[0]
        state = State(
            v=pv,
            c=SpectralField.zeros(grid),
            c_mean=0.0,
            eps=config.eps,
            gamma_bar=config.gamma_bar,
            t=0.0,
        )
    return state


@dataclass
class _Accumulators:
    v_eps: float = 0.0
    div_l1: float = 0.0
    grad_c_l1: float = 0.0
    qv_l1: float = 0.0
    qv_l4_pow: float = 0.0

    def close_interval(self, dt: float, left: dict, right: dict):
        self.v_eps += 0.5 * dt * (
            left["grad_v_inf"] + right["grad_v_inf"] + left["grad_c_inf"] + right["grad_c_inf"]
        )
        self.div_l1 += 0.5 * dt * (left["div_inf"] + right["div_inf"])
        self.grad_c_l1 += 0.5 * dt * (left["grad_c_inf"] + right["grad_c_inf"])
        self.qv_l1 += 0.5 * dt * (left["qv_inf"] + right["qv_inf"])
        self.qv_l4_pow += 0.5 * dt * (left["qv_inf"] ** 4 + right["qv_inf"] ** 4)


def _point_eval(state: State) -> dict:
    """Cheap per-step maxima at the current time (shares cached transforms)."""
    from .operators import grad

    grid = state.grid
    gv = max(g.lp_norm(np.inf) for comp in state.v for g in grad(comp))
    gc = max(g.lp_norm(np.inf) for g in grad(state.c))
    dv = div(state.v).lp_norm(np.inf)
    qv = helmholtz(state.v)[1].linf_norm()
    v_inf = max(float(np.abs(a).max()) for a in state.v.values())
    c_inf = float(np.abs(state.c.values + state.c_mean).max())
    return {
        "t": state.t,
        "grad_v_inf": gv,
        "grad_c_inf": gc,
        "div_inf": dv,
        "qv_inf": qv,
        "v_inf": v_inf,
        "c_inf": c_inf,
    }


def _full_lattice_abs_sum(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """sum over the full lattice of |integral of the branch amplitude|.

    Stored modes with k3 > 0 stand for themselves and their conjugates (the
    b branch carries the mirror); the k3 = 0 plane already contains both
    halves of each pair.
    """
    interior = np.zeros(grid.spectral_shape, dtype=bool)
    interior[:, :, 1:] = True
    total = float((np.abs(a[interior]) + np.abs(b[interior])).sum())
    total += float(np.abs(a[:, :, 0]).sum())
    return total / grid.n**3


def acoustic_oracle_l1(state: State, t_final: float) -> float:
    """Closed-form mode average: sum_k |a0(k)| 2 eps |sin(T |k| / 2 eps)| / |k|."""
    grid = state.grid
    fs = FilteredState.from_state(state)
    omega = grid.k_abs / state.eps
    with np.errstate(invalid="ignore", divide="ignore"):
        amp = np.where(
            omega > 0.0,
            2.0 * np.abs(np.sin(0.5 * t_final * omega)) / np.where(omega > 0, omega, 1.0),
            t_final,
        )
    return _full_lattice_abs_sum(grid, fs.a * amp, fs.b * amp)


def run(
    config: RunConfig,
    out_dir: str | Path | None = None,
    reference: "ReferenceSeries | None" = None,
    state: State | None = None,
) -> RunReport:
    """Integrate to t_final (or the lifespan proxy) logging all diagnostics."""
    grid = Grid(config.n)
    bank = get_filter_bank(grid)
    ctrl = config.step_control()
    rng = np.random.default_rng(config.seed)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    if state is None:
        state = initial_state(config, grid)

    report = RunReport(
        n=config.n,
        eps=config.eps,
        gamma_bar=config.gamma_bar,
        mode=config.mode,
        seed=config.seed,
        config_echo=config.echo(),
    )
    track_acoustic = config.mode in ("compressible", "linear")

    sample_times = _sample_times(config.t_final, config.sample_dt)
    checkpoint_times = []
    if config.checkpoint_dt > 0.0 and out_dir is not None:
        k = 0
        while k * config.checkpoint_dt <= config.t_final + 1e-12:
            checkpoint_times.append(k * config.checkpoint_dt)
            k += 1
    boundaries = sorted(set(sample_times) | set(checkpoint_times))

    acc = _Accumulators()
    ia = np.zeros(grid.spectral_shape, dtype=complex)
    ib = np.zeros(grid.spectral_shape, dtype=complex)
    zeta0: dict[float, float] = {}
    zeta_env_margin = {2.0: 0.0, 3.0: 0.0, np.inf: 0.0}
    zeta_drift = 0.0
    sup_ref = float("nan") if reference is None else 0.0
    log_ratio_max = 0.0
    ckpt_index = 0

    def heavy_row(st: State, first_or_last: bool) -> dict:
        row = _point_eval(st)
        mon = lipschitz_monitor(st, bank)
        row["grad_v_inf"] = mon.grad_v_inf
        row["grad_c_inf"] = mon.grad_c_inf
        row["omega_inf"] = mon.omega_inf
        row["omega_B0"] = mon.omega_b0
        row["div_B0"] = mon.div_b0
        row["log_ratio"] = mon.log_ratio
        row["energy"] = energy(st)
        row["c_fluct_inf"] = st.c.lp_norm(np.inf)
        geo = geometry_residuals(
            st, rng=rng, n_random_alpha=4 if first_or_last else 0, n_sample_points=1000
        )
        row["swirl"] = geo.swirl
        row["axisym_res"] = geo.axisym_residual
        row["omega_cross"] = geo.omega_cross_etheta
        if config.axisym_diagnostics:
            try:
                zd = zeta(st.v)
                row["zeta_inf"] = zd.lp_norm(np.inf)
                row["zeta_L2"] = zd.lp_norm(2.0)
                row["zeta_L3"] = zd.lp_norm(3.0)
                row["zeta_L3_1"] = zd.lorentz_norm(3.0, 1.0)
            except PreconditionError:
                warnings.warn("state lost axisymmetry; zeta diagnostics suspended", stacklevel=2)
                for key in ("zeta_inf", "zeta_L2", "zeta_L3", "zeta_L3_1"):
                    row[key] = float("nan")
        else:
            for key in ("zeta_inf", "zeta_L2", "zeta_L3", "zeta_L3_1"):
                row[key] = float("nan")
        if reference is not None:
            ref_v = reference.velocity_at(st.t)
            pv = helmholtz(st.v)[0]
            diff = 0.0
            for comp, ref_vals in zip(pv, ref_v):
                diff += float(((comp.values - ref_vals) ** 2).sum())
            row["pv_minus_ref_l2"] = float(np.sqrt(diff * grid.cell_volume))
        else:
            row["pv_minus_ref_l2"] = float("nan")
        return row

    # t = 0 sample
    prev_eval = None
    row0 = heavy_row(state, True)
    row0["V_eps"] = 0.0
    report.sample_rows.append(row0)
    prev_eval = {k: row0[k] for k in ("t", "grad_v_inf", "grad_c_inf", "div_inf", "qv_inf")}
    prev_eval.update({"v_inf": row0["v_inf"], "c_inf": row0["c_inf"]})
    report.step_rows.append(dict(prev_eval, dt=0.0))
    grad0 = max(row0["grad_v_inf"], 1e-12)
    for p in zeta_env_margin:
        zeta0[p] = row0["zeta_L2" if p == 2.0 else "zeta_L3" if p == 3.0 else "zeta_inf"]
    zeta_inf0 = row0["zeta_inf"]
    log_ratio_max = row0["log_ratio"]
    if not np.isnan(row0["pv_minus_ref_l2"]):
        sup_ref = row0["pv_minus_ref_l2"]

    if out_dir is not None and checkpoint_times and abs(checkpoint_times[0]) < 1e-12:
        write_checkpoint(
            Path(out_dir) / f"chk_{ckpt_index:05d}.ckpt",
            [*state.v.components, state.c_total()],
            state.t,
            state.eps,
        )
        ckpt_index += 1

    status = "completed"
    t_proxy = float("nan")
    next_boundary_idx = 1

    while state.t < config.t_final - 1e-12:
        # choose dt, clipped to the next sampling/checkpoint boundary
        while (
            next_boundary_idx < len(boundaries)
            and boundaries[next_boundary_idx] <= state.t + 1e-12
        ):
            next_boundary_idx += 1
        target = (
            boundaries[next_boundary_idx] if next_boundary_idx < len(boundaries) else config.t_final
        )
        if config.mode == "incompressible":
            if ctrl.fixed_dt is not None:
                dt_raw = ctrl.fixed_dt
            else:
                v_inf = max(float(np.abs(a).max()) for a in state.v.values())
                dt_raw = ctrl.cfl * grid.h / (v_inf + 1e-12)
            dt = min(dt_raw, target - state.t)
            v_new, info = step_incompressible(state.v, ctrl, dt=dt)
            new_state = State(
                v=v_new, c=state.c, c_mean=state.c_mean,
                eps=state.eps, gamma_bar=state.gamma_bar, t=state.t + info.dt,
            )
        else:
            from .solver import choose_dt

            dt = min(choose_dt(state, ctrl), target - state.t)
            new_state, info = step_compressible(
                state,
                ctrl,
                dt=dt,
                linear_only=(config.mode == "linear"),
                track_acoustic_integral=track_acoustic,
            )
            if track_acoustic:
                ia += info.acoustic_integral_a
                ib += info.acoustic_integral_b

        if not np.isfinite(info.diag.v_inf) or not np.isfinite(info.diag.div_inf):
            status = "numerical_failure"
            break

        at_boundary = (
            next_boundary_idx < len(boundaries)
            and abs(new_state.t - boundaries[next_boundary_idx]) < 1e-10
        ) or abs(new_state.t - config.t_final) < 1e-12
        is_sample = any(abs(new_state.t - ts) < 1e-10 for ts in sample_times)

        if is_sample:
            is_last = abs(new_state.t - config.t_final) < 1e-12
            row = heavy_row(new_state, is_last)
            cur_eval = {
                k: row[k]
                for k in ("t", "grad_v_inf", "grad_c_inf", "div_inf", "qv_inf", "v_inf", "c_inf")
            }
        else:
            cur_eval = _point_eval(new_state)
            row = None

        acc.close_interval(cur_eval["t"] - prev_eval["t"], prev_eval, cur_eval)
        report.step_rows.append(dict(cur_eval, dt=info.dt))
        prev_eval = cur_eval

        if row is not None:
            row["V_eps"] = acc.v_eps
            report.sample_rows.append(row)
            log_ratio_max = max(log_ratio_max, row["log_ratio"])
            if not np.isnan(row["pv_minus_ref_l2"]):
                sup_ref = max(sup_ref, row["pv_minus_ref_l2"])
            # envelope margins of the transported vorticity quotient
            if config.axisym_diagnostics and not np.isnan(row["zeta_inf"]):
                for p, key in ((2.0, "zeta_L2"), (3.0, "zeta_L3"), (np.inf, "zeta_inf")):
                    base = zeta0.get(p, float("nan"))
                    if base and base > 0.0 and not np.isnan(base):
                        alpha = 0.0 if p == np.inf else (1.0 - 1.0 / p)
                        envelope = base * np.exp(alpha * acc.div_l1)
                        zeta_env_margin[p] = max(zeta_env_margin[p], row[key] / envelope)
                if zeta_inf0 and zeta_inf0 > 0.0:
                    zeta_drift = max(zeta_drift, abs(row["zeta_inf"] - zeta_inf0) / zeta_inf0)

        if out_dir is not None and any(abs(new_state.t - tc) < 1e-10 for tc in checkpoint_times):
            write_checkpoint(
                Path(out_dir) / f"chk_{ckpt_index:05d}.ckpt",
                [*new_state.v.components, new_state.c_total()],
                new_state.t,
                new_state.eps,
            )
            ckpt_index += 1

        # blow-up proxy: gradient growth or spectral tail pile-up
        tail = spectral_tail_fraction(new_state)
        if cur_eval["grad_v_inf"] > ctrl.blowup_factor * grad0 or tail > ctrl.tail_fraction_max:
            status = "lifespan"
            t_proxy = new_state.t
            state = new_state
            break

        state = new_state

    report.status = status
    report.t_end = state.t
    report.t_proxy = t_proxy

    # aggregates
    report.aggregates = {
        "V_eps_T": acc.v_eps,
        "div_l1t_linf": acc.div_l1,
        "grad_c_l1t_linf": acc.grad_c_l1,
        "qv_l1t_linf": acc.qv_l1,
        "qv_l4t_linf": acc.qv_l4_pow**0.25,
        "sup_pv_minus_ref_l2": sup_ref,
        "log_ratio_max": log_ratio_max,
        "zeta_linf_drift_rel": zeta_drift,
        "zeta_envelope_margin_p2": zeta_env_margin[2.0],
        "zeta_envelope_margin_p3": zeta_env_margin[3.0],
        "zeta_envelope_margin_pinf": zeta_env_margin[np.inf],
    }
    if track_acoustic:
        report.aggregates["acoustic_time_avg_l1"] = _full_lattice_abs_sum(grid, ia, ib)
        div_int_hat = 1j * grid.k_abs * 0.5 * (ia + ib)
        report.aggregates["div_time_avg_linf"] = float(np.abs(grid.ifft(div_int_hat)).max())
    energies = np.array([r["energy"] for r in report.sample_rows])
    div_infs = np.array([r["div_inf"] for r in report.sample_rows])
    times = np.array([r["t"] for r in report.sample_rows])
    if len(times) >= 2:
        eineq = energy_ineq_check(times, energies, div_infs, config.gamma_bar)
        report.aggregates["energy_worst_ratio"] = eineq.worst_ratio
        report.aggregates["energy_drift_rel"] = eineq.max_drift_rel
        report.aggregates["energy_c_e"] = eineq.c_e
    geo_last = report.sample_rows[-1]
    report.aggregates["final_swirl"] = geo_last["swirl"]
    report.aggregates["final_axisym_res"] = geo_last["axisym_res"]
    report.aggregates["final_omega_cross"] = geo_last["omega_cross"]

    if out_dir is not None:
        report.write(out_dir)
    return report
