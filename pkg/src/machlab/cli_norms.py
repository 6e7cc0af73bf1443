"""Norm rows recomputed from a checkpoint, mirroring the run-time series."""

from __future__ import annotations

import numpy as np

from .diagnostics import lipschitz_monitor, zeta
from .field import SpectralField, VecField
from .lp import BesovSpec, besov_norm, get_filter_bank
from .operators import div
from .state import PreconditionError, State


def norm_rows(fields: list[SpectralField], time: float) -> list[dict]:
    """Besov/Lorentz/sup norms of a checkpointed (v1, v2, v3, c) snapshot.

    The first twelve rows reproduce the quantities logged in series.csv at
    write time; the per-field Besov norms follow.
    """
    if len(fields) < 4:
        raise ValueError(f"checkpoint must hold (v1, v2, v3, c); got {len(fields)} fields")
    grid = fields[0].grid
    v = VecField(fields[:3])
    c_total = fields[3]
    c_mean = c_total.mean()
    c_hat = c_total.hat.copy()
    c_hat[0, 0, 0] = 0.0
    c = SpectralField.from_hat(grid, c_hat)
    state = State(v=v, c=c, c_mean=c_mean, eps=1.0, gamma_bar=0.5, t=time)
    bank = get_filter_bank(grid)

    def row(name, value, s="", p="", r="", psi_id="one"):
        return {
            "time": time,
            "norm_name": name,
            "s": s,
            "p": p,
            "r": r,
            "psi_id": psi_id,
            "value": float(value),
        }

    mon = lipschitz_monitor(state, bank)
    rows = [
        row("energy", state.v.l2_norm() ** 2 + c_total.l2_norm() ** 2),
        row("grad_v_inf", mon.grad_v_inf),
        row("grad_c_inf", mon.grad_c_inf),
        row("div_inf", div(v).lp_norm(np.inf)),
        row("omega_inf", mon.omega_inf),
        row("omega_B0", mon.omega_b0, s=0, p="inf", r=1),
        row("div_B0", mon.div_b0, s=0, p="inf", r=1),
        row("v_l2", mon.v_l2, p=2),
        row("c_fluct_inf", c.lp_norm(np.inf), p="inf"),
    ]
    try:
        zd = zeta(v)
        rows += [
            row("zeta_inf", zd.lp_norm(np.inf), p="inf"),
            row("zeta_L2", zd.lp_norm(2.0), p=2),
            row("zeta_L3", zd.lp_norm(3.0), p=3),
            row("zeta_L3_1", zd.lorentz_norm(3.0, 1.0), p=3, r=1),
        ]
    except PreconditionError:
        pass

    spec_high = BesovSpec(s=2.5, p=2.0, r=1.0)
    spec_flat = BesovSpec(s=0.0, p=np.inf, r=1.0)
    for name, f in zip(("v1", "v2", "v3", "c"), (*v, c)):
        rows.append(row(f"{name}_B2.5_2_1", besov_norm(f, spec_high, bank), s=2.5, p=2, r=1))
        rows.append(row(f"{name}_B0_inf_1", besov_norm(f, spec_flat, bank), s=0, p="inf", r=1))
    return rows
