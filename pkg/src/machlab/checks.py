"""Self-contained property suites behind the `check` CLI subcommand."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .axisym import AxisymRecipe, make_velocity, riesz_identity_check, spherical_test_source
from .diagnostics import geometry_residuals
from .field import SpectralField, VecField, l2_inner
from .grid import Grid
from .lp import construct_psi, dilate_check, get_filter_bank
from .operators import div, helmholtz


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_field(grid: Grid, rng, kmax=None) -> SpectralField:
    hat = np.zeros(grid.spectral_shape, dtype=complex)
    mask = grid.dealias_mask if kmax is None else (grid.k_abs <= kmax)
    hat[mask] = rng.standard_normal(int(mask.sum())) + 1j * rng.standard_normal(int(mask.sum()))
    f = SpectralField.from_hat(grid, hat)
    return SpectralField.from_values(grid, f.values)


def check_partition(n: int = 64) -> CheckResult:
    bank = get_filter_bank(Grid(n))
    defect = bank.partition_defect()
    overlaps = max(
        bank.support_overlap(p, q)
        for p in range(0, bank.q_max + 1)
        for q in range(p + 2, bank.q_max + 1)
    ) if bank.q_max >= 2 else 0.0
    ok = defect <= 1e-13 and overlaps == 0.0
    return CheckResult(
        "littlewood-paley partition", ok, f"defect={defect:.2e} overlap={overlaps:.2e}"
    )


def check_helmholtz(n: int = 32, seed: int = 0) -> CheckResult:
    grid = Grid(n)
    rng = np.random.default_rng(seed)
    v = VecField([_random_field(grid, rng) for _ in range(3)])
    w = VecField([_random_field(grid, rng) for _ in range(3)])
    pv, qv = helmholtz(v)
    pw, qw = helmholtz(w)
    scale = v.l2_norm()
    recon = max((pv[i] + qv[i] - v[i]).l2_norm() for i in range(3)) / scale
    pq, qq = helmholtz(qv)
    idem = max(
        max(p.l2_norm() for p in pq) / scale,
        max((qq[i] - qv[i]).l2_norm() for i in range(3)) / scale,
    )
    ortho = abs(l2_inner(pv, qw)) / (v.l2_norm() * w.l2_norm())
    ok = recon <= 1e-13 and idem <= 1e-12 and ortho <= 1e-11
    return CheckResult(
        "helmholtz split", ok, f"recon={recon:.2e} idem={idem:.2e} ortho={ortho:.2e}"
    )


def check_psi_constructor(seed: int = 0, trials: int = 100) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = True
    for _ in range(trials):
        length = int(rng.integers(3, 60))
        c = np.exp(rng.normal(size=length)) * np.exp(-rng.uniform(0.2, 2.0) * np.arange(length))
        pc = construct_psi(c)
        checks = pc.verify()
        worst = worst and all(checks.values())
    return CheckResult("tail-weight constructor", worst, f"{trials} random sequences")


def check_geometry(n: int = 64, seed: int = 0) -> CheckResult:
    grid = Grid(n)
    v = make_velocity(grid, AxisymRecipe())
    geo = geometry_residuals(v, rng=np.random.default_rng(seed))
    divergence = div(v).l2_norm() / v.l2_norm()
    ok = geo.max() <= 1e-10 and divergence <= 1e-10
    return CheckResult(
        "axisymmetric data geometry",
        ok,
        f"swirl={geo.swirl:.2e} axisym={geo.axisym_residual:.2e} "
        f"cross={geo.omega_cross_etheta:.2e} div={divergence:.2e}",
    )


def check_riesz_identity(n: int = 64) -> CheckResult:
    grid = Grid(n)
    err = riesz_identity_check(spherical_test_source(grid))
    return CheckResult("axisymmetric riesz identity", err <= 1e-6, f"max rel err={err:.2e}")


def check_dilatation(n: int = 64, seed: int = 0) -> CheckResult:
    grid = Grid(n)
    rng = np.random.default_rng(seed)
    hat = np.zeros(grid.spectral_shape, dtype=complex)
    k1 = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    rows = np.nonzero(k1 % 16 == 0)[0]
    sub = np.zeros(grid.spectral_shape, dtype=bool)
    sub[rows, :, :] = True
    sub &= grid.dealias_mask
    hat[sub] = rng.standard_normal(int(sub.sum())) + 1j * rng.standard_normal(int(sub.sum()))
    f = SpectralField.from_hat(grid, hat)
    f = SpectralField.from_values(grid, f.values)
    rep = dilate_check(f, 0.5, [0.5, 0.25, 0.125, 0.0625])
    ok = rep.max_ratio <= 16.0 and rep.spread <= 8.0
    return CheckResult(
        "anisotropic dilatation", ok, f"max={rep.max_ratio:.3f} spread={rep.spread:.3f}"
    )


def run_all(seed: int = 0) -> list[CheckResult]:
    return [
        check_partition(),
        check_helmholtz(seed=seed),
        check_psi_constructor(seed=seed),
        check_geometry(seed=seed),
        check_riesz_identity(),
        check_dilatation(seed=seed),
    ]
