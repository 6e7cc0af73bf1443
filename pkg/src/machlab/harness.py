"""Sweep orchestration: reference run, parallel members, slope fits, summary JSON."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import SweepConfig
from .report import RunReport
from .runner import acoustic_oracle_l1, initial_state, run
from .runner_support import ReferenceSeries


@dataclass
class FitResult:
    metric: str
    slope: float
    intercept: float
    r2: float
    eps_used: list[float]
    values: list[float]

    def to_dict(self) -> dict:
        return asdict(self)


def fit_power_law(eps_values, metric_values, metric: str = "metric") -> FitResult:
    """Least squares of log2(metric) against log2(eps).

    Degenerate abscissae (repeated eps) are rejected, as are nonpositive
    metric values (no power law to fit).
    """
    eps_values = [float(e) for e in eps_values]
    metric_values = [float(v) for v in metric_values]
    if len(eps_values) != len(metric_values):
        raise ValueError("eps and metric lists differ in length")
    if len(eps_values) < 2:
        raise ValueError("need at least two points to fit a slope")
    if len(set(eps_values)) != len(eps_values):
        raise ValueError("degenerate abscissa: repeated eps values")
    if any(e <= 0 for e in eps_values):
        raise ValueError("eps values must be positive")
    if any(v <= 0 for v in metric_values):
        raise ValueError(f"nonpositive {metric} values cannot be fitted on a log scale")
    x = np.log2(eps_values)
    y = np.log2(metric_values)
    design = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = y - design @ coef
    ss_res = float((resid**2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(
        metric=metric,
        slope=slope,
        intercept=intercept,
        r2=r2,
        eps_used=eps_values,
        values=metric_values,
    )


def monotone_decreasing(values, tol: float = 0.05) -> bool:
    """True when each successive value is below the previous one + tol slack."""
    return all(b <= a * (1.0 + tol) for a, b in zip(values, values[1:]))


@dataclass
class SweepSummary:
    config: dict
    eps_list: list[float]
    eps_compared: list[float]
    per_eps: list[dict]
    fits: list[dict]
    assertions: list[dict] = field(default_factory=list)

    def write(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path: str | Path) -> "SweepSummary":
        with open(path) as fh:
            data = json.load(fh)
        return cls(**data)

    def fit_for(self, metric: str) -> dict | None:
        for f in self.fits:
            if f["metric"] == metric:
                return f
        return None


def _member_dir(root: Path, index: int, eps: float) -> Path:
    return root / f"eps_{index:02d}"


def _run_member(args) -> tuple[int, str]:
    index, config, out_dir, ref_dir = args
    reference = ReferenceSeries(ref_dir) if ref_dir else None
    report = run(config, out_dir=out_dir, reference=reference)
    return index, report.status


def sweep(config: SweepConfig, out_root: str | Path) -> SweepSummary:
    """Run the eps family (reference first), fit slopes, emit summary.json.

    Members run in parallel on a process pool; per-member outputs land in
    eps_NN/ subdirectories and are re-read for summary assembly, so the
    result is independent of completion order.
    """
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    base = config.run

    ref_dir = None
    if config.compare_reference and base.mode != "incompressible":
        ref_dir = out_root / "reference"
        ref_config = replace(
            base,
            mode="incompressible",
            checkpoint_dt=base.sample_dt,
            eps=config.eps_list[0],
        )
        run(ref_config, out_dir=ref_dir)

    jobs = []
    for i, eps in enumerate(config.eps_list):
        member = replace(base, eps=float(eps))
        jobs.append((i, member, _member_dir(out_root, i, eps), ref_dir))

    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(_run_member, jobs))
    else:
        for job in jobs:
            _run_member(job)

    reports = [RunReport.read(_member_dir(out_root, i, e)) for i, e in enumerate(config.eps_list)]

    # completed prefix: fitting only uses runs that reached t_final
    compared: list[float] = []
    for eps, rep in zip(config.eps_list, reports):
        if rep.status != "completed":
            break
        compared.append(float(eps))

    per_eps = [
        {"eps": float(e), "status": r.status, "t_end": r.t_end, "aggregates": r.aggregates}
        for e, r in zip(config.eps_list, reports)
    ]

    fits = []
    assertions = []
    for metric in config.metrics:
        values = []
        eps_used = []
        for eps, rep in zip(compared, reports):
            val = rep.aggregates.get(metric, float("nan"))
            if np.isfinite(val) and val > 0:
                values.append(val)
                eps_used.append(eps)
        if len(eps_used) >= 2:
            fits.append(fit_power_law(eps_used, values, metric).to_dict())

    def metric_values(metric):
        out = []
        for eps, rep in zip(compared, reports):
            out.append(rep.aggregates.get(metric, float("nan")))
        return out

    for metric in ("div_l1t_linf", "div_time_avg_linf", "sup_pv_minus_ref_l2"):
        vals = metric_values(metric)
        finite = [v for v in vals if np.isfinite(v)]
        if len(finite) >= 2:
            assertions.append(
                {
                    "name": f"monotone_decrease[{metric}]",
                    "passed": bool(monotone_decreasing(finite, tol=0.05)),
                    "values": finite,
                }
            )

    if base.mode == "linear":
        # closed-form mode-average oracle, one value per compared eps
        oracle_errs = []
        for eps, rep in zip(compared, reports):
            st0 = initial_state(replace(base, eps=eps))
            oracle = acoustic_oracle_l1(st0, base.t_final)
            measured = rep.aggregates.get("acoustic_time_avg_l1", float("nan"))
            oracle_errs.append(abs(measured - oracle) / oracle if oracle > 0 else float("nan"))
        assertions.append(
            {
                "name": "linear_oracle_match",
                "passed": bool(all(np.isfinite(e) and e < 1e-10 for e in oracle_errs)),
                "values": oracle_errs,
            }
        )

    summary = SweepSummary(
        config={"run": base.echo(), "eps_list": list(config.eps_list), "threads": config.threads,
                "metrics": list(config.metrics)},
        eps_list=[float(e) for e in config.eps_list],
        eps_compared=compared,
        per_eps=per_eps,
        fits=fits,
        assertions=assertions,
    )
    summary.write(out_root / "summary.json")
    return summary


@dataclass
class ConvergenceTable:
    eps: list[float]
    errors: list[float]
    slope: float
    monotone: bool


def compare_incompressible(summary: SweepSummary) -> ConvergenceTable:
    """Table of sup_t ||P v_eps - v_ref||_L2 per eps from a sweep summary."""
    eps = []
    errors = []
    for entry in summary.per_eps:
        if entry["eps"] not in summary.eps_compared:
            continue
        val = entry["aggregates"].get("sup_pv_minus_ref_l2", float("nan"))
        if not np.isfinite(val):
            raise ValueError(
                "sweep has no reference comparison; run with compare_reference enabled"
            )
        eps.append(entry["eps"])
        errors.append(val)
    if len(eps) < 2:
        raise ValueError("need at least two completed runs to compare")
    fit = fit_power_law(eps, errors, "sup_pv_minus_ref_l2")
    return ConvergenceTable(
        eps=eps, errors=errors, slope=fit.slope, monotone=monotone_decreasing(errors, 0.05)
    )
