"""Run reports: deterministic CSV/JSON emission and aggregate recomputation.

Two time series are written per run: ``series.csv`` at the sampling cadence
(full diagnostics) and ``steps.csv`` at every accepted step (the cheap maxima
that feed the time integrals).  All time-integral aggregates use the
trapezoid rule on the step series, so they are recomputable from the CSV;
the spectral accumulations (mode-wise acoustic time averages) are reported
alongside but live outside the CSV by nature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SERIES_COLUMNS = [
    "t",
    "energy",
    "grad_v_inf",
    "grad_c_inf",
    "V_eps",
    "div_inf",
    "zeta_inf",
    "zeta_L3_1",
    "omega_inf",
    "omega_B0",
    "swirl",
    "axisym_res",
    # extras beyond the base schema
    "zeta_L2",
    "zeta_L3",
    "omega_cross",
    "qv_inf",
    "c_fluct_inf",
    "div_B0",
    "log_ratio",
    "pv_minus_ref_l2",
]

STEP_COLUMNS = ["t", "dt", "grad_v_inf", "grad_c_inf", "div_inf", "qv_inf", "v_inf", "c_inf"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c, float("nan"))) for c in columns) + "\n")


def read_csv(path: Path) -> list[dict]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            rows.append({k: float(v) for k, v in zip(header, parts)})
    return rows


@dataclass
class RunReport:
    """Everything a single run produced, CSV-serializable."""

    n: int
    eps: float
    gamma_bar: float
    mode: str
    seed: int
    status: str = "completed"
    t_end: float = 0.0
    t_proxy: float = float("nan")
    sample_rows: list[dict] = field(default_factory=list)
    step_rows: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    config_echo: dict = field(default_factory=dict)

    def write(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "series.csv", SERIES_COLUMNS, self.sample_rows)
        write_csv(out / "steps.csv", STEP_COLUMNS, self.step_rows)
        payload = {
            "n": self.n,
            "eps": self.eps,
            "gamma_bar": self.gamma_bar,
            "mode": self.mode,
            "seed": self.seed,
            "status": self.status,
            "t_end": self.t_end,
            "t_proxy": self.t_proxy,
            "aggregates": self.aggregates,
            "config": self.config_echo,
        }
        with open(out / "run.json", "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")
        return out

    @classmethod
    def read(cls, run_dir: str | Path) -> "RunReport":
        run_dir = Path(run_dir)
        with open(run_dir / "run.json") as fh:
            payload = json.load(fh)
        report = cls(
            n=payload["n"],
            eps=payload["eps"],
            gamma_bar=payload["gamma_bar"],
            mode=payload["mode"],
            seed=payload["seed"],
            status=payload["status"],
            t_end=payload["t_end"],
            t_proxy=payload.get("t_proxy", float("nan")),
            aggregates=payload["aggregates"],
            config_echo=payload.get("config", {}),
        )
        report.sample_rows = read_csv(run_dir / "series.csv")
        report.step_rows = read_csv(run_dir / "steps.csv")
        return report

    # -- aggregate recomputation (the CSV-consistency contract) ---------------

    def recompute_aggregates(self) -> dict:
        """Time-integral aggregates recomputed from the step series."""
        t = np.array([r["t"] for r in self.step_rows])
        out: dict[str, float] = {}
        if len(t) < 2:
            for key in ("V_eps_T", "div_l1t_linf", "grad_c_l1t_linf", "qv_l1t_linf"):
                out[key] = 0.0
            out["qv_l4t_linf"] = 0.0
            out["sup_pv_minus_ref_l2"] = self.aggregates.get("sup_pv_minus_ref_l2", float("nan"))
            return out

        def trapz(key, power=1.0):
            y = np.array([r[key] for r in self.step_rows]) ** power
            return float(np.trapezoid(y, t))

        out["V_eps_T"] = trapz("grad_v_inf") + trapz("grad_c_inf")
        out["div_l1t_linf"] = trapz("div_inf")
        out["grad_c_l1t_linf"] = trapz("grad_c_inf")
        out["qv_l1t_linf"] = trapz("qv_inf")
        out["qv_l4t_linf"] = trapz("qv_inf", 4.0) ** 0.25
        vals = np.array([r.get("pv_minus_ref_l2", float("nan")) for r in self.sample_rows])
        out["sup_pv_minus_ref_l2"] = (
            float(np.nanmax(vals)) if vals.size and not np.all(np.isnan(vals)) else float("nan")
        )
        return out
