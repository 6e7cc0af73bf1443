"""Dyadic frequency decomposition, Besov norms, paraproducts, and checkers.

The cutoff pair (chi, phi) is built from an explicit smoothed step so the
partition-of-unity and support-separation properties hold exactly on the
lattice (up to rounding):

    theta = 1 on [0, 3/4],  theta = 0 on [4/3, inf),
    theta(t) = m(4/3 - t) / (m(4/3 - t) + m(t - 3/4)) in between,

with m(x) = exp(-1/x) for x > 0.  Then chi(k) = theta(|k|) and
phi(2^-q k) = theta(|k| / 2^(q+1)) - theta(|k| / 2^q).

Blocks run over q = -1 .. q_max with q_max = floor(log2(n/3)) - 1; the
telescoping sum chi + sum_q phi equals 1 exactly for |k| <= (3/4) 2^(q_max+1)
("resolved" lattice points).  Homogeneous norms are the inhomogeneous ones
with the k = 0 mode excluded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Sequence

import numpy as np

from .field import SpectralField, VecField
from .grid import Grid, check_same_grid
from .operators import advect_scalar, grad

__all__ = [
    "DyadicFilterBank",
    "BesovSpec",
    "PsiConstruction",
    "get_filter_bank",
    "besov_norm",
    "construct_psi",
    "bony",
    "bernstein_report",
    "dilate_check",
    "commutator",
    "commutator_report",
]


def _bump(x: np.ndarray) -> np.ndarray:
    """The standard C-infinity bump m(x) = exp(-1/x) for x > 0, else 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smoothed_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 on [0, 3/4], 0 on [4/3, inf)."""
    t = np.asarray(t, dtype=float)
    lo = _bump(4.0 / 3.0 - t)
    hi = _bump(t - 0.75)
    out = np.ones_like(t)
    mid = (t > 0.75) & (t < 4.0 / 3.0)
    out[mid] = lo[mid] / (lo[mid] + hi[mid])
    out[t >= 4.0 / 3.0] = 0.0
    return out


class DyadicFilterBank:
    """Precomputed multipliers chi, phi(2^-q .) on the discrete lattice."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.q_max = int(math.floor(math.log2(grid.n / 3.0))) - 1
        if self.q_max < 0:
            raise ValueError(f"grid too coarse for a dyadic bank: n={grid.n}")
        #: partition of unity holds exactly for |k| <= resolved_radius
        self.resolved_radius = 0.75 * 2.0 ** (self.q_max + 1)

        kabs = grid.k_abs
        self.chi = smoothed_step(kabs)
        self.phi = [
            smoothed_step(kabs / 2.0 ** (q + 1)) - smoothed_step(kabs / 2.0**q)
            for q in range(self.q_max + 1)
        ]
        self.resolved_mask = kabs <= self.resolved_radius + 1e-12

    def qs(self) -> range:
        """Block indices, q = -1 .. q_max."""
        return range(-1, self.q_max + 1)

    def profile(self, q: int) -> np.ndarray:
        if q == -1:
            return self.chi
        if 0 <= q <= self.q_max:
            return self.phi[q]
        raise IndexError(f"block index {q} outside -1..{self.q_max}")

    def lowpass_profile(self, q: int) -> np.ndarray:
        """Multiplier of S_q = sum_{-1 <= j <= q-1} Delta_j (telescoped)."""
        if q == -1:
            return np.zeros(self.grid.spectral_shape)
        if 0 <= q <= self.q_max + 1:
            return smoothed_step(self.grid.k_abs / 2.0**q)
        raise IndexError(f"low-pass index {q} outside -1..{self.q_max + 1}")

    def block(self, q: int, f: SpectralField) -> SpectralField:
        check_same_grid(self.grid, f.grid)
        return SpectralField.from_hat(self.grid, self.profile(q) * f.hat)

    def low_pass(self, q: int, f: SpectralField) -> SpectralField:
        check_same_grid(self.grid, f.grid)
        return SpectralField.from_hat(self.grid, self.lowpass_profile(q) * f.hat)

    def partition_defect(self) -> float:
        total = self.chi.copy()
        for p in self.phi:
            total += p
        return float(np.abs(total[self.resolved_mask] - 1.0).max())

    def support_overlap(self, p: int, q: int) -> float:
        """Max pointwise product of two annulus profiles (0 when |p-q| >= 2)."""
        return float((self.profile(p) * self.profile(q)).max())


_BANKS: dict[int, DyadicFilterBank] = {}


def get_filter_bank(grid: Grid) -> DyadicFilterBank:
    bank = _BANKS.get(grid.n)
    if bank is None:
        bank = DyadicFilterBank(grid)
        _BANKS[grid.n] = bank
    return bank


# -- Besov norms ---------------------------------------------------------------


@dataclass(frozen=True)
class BesovSpec:
    """Descriptor of a (possibly weighted) Besov norm B^{s,psi}_{p,r}.

    ``psi`` maps the block index q >= -1 to a positive weight; None means the
    constant weight 1 (the classical space).  ``homogeneous`` drops the k = 0
    mode from the low block, which on the torus is the only difference
    between the homogeneous and inhomogeneous norms.
    """

    s: float
    p: float
    r: float
    psi: Callable[[int], float] | None = None
    psi_id: str = "one"
    homogeneous: bool = False

    def weight(self, q: int) -> float:
        w = 2.0 ** (q * self.s)
        if self.psi is not None:
            w *= float(self.psi(q))
        return w

    def psi_growth_constant(self, q_max: int) -> float:
        """Recorded C_psi = sup_q psi(q+1)/psi(q) over the truncated range."""
        if self.psi is None:
            return 1.0
        vals = [float(self.psi(q)) for q in range(-1, q_max + 1)]
        if any(v <= 0 for v in vals):
            raise ValueError("psi must be strictly positive")
        for lo, hi in zip(vals, vals[1:]):
            if hi < lo * (1.0 - 1e-12):
                raise ValueError("psi must be nondecreasing")
        return max(hi / lo for lo, hi in zip(vals, vals[1:])) if len(vals) > 1 else 1.0


def besov_norm(f: SpectralField, spec: BesovSpec, bank: DyadicFilterBank | None = None) -> float:
    """ell^r over q of psi(q) 2^{qs} ||Delta_q f||_{L^p}, q = -1 .. q_max.

    L^p norms use grid quadrature; L^inf maxima are taken on a 2x
    zero-padded grid.  The q-range truncation is the bank's.
    """
    if not (1.0 <= spec.p) or not (1.0 <= spec.r):
        raise ValueError("integrability indices must lie in [1, inf]")
    bank = bank or get_filter_bank(f.grid)
    spec.psi_growth_constant(bank.q_max)
    terms = []
    for q in bank.qs():
        bf = bank.block(q, f)
        if spec.homogeneous and q == -1:
            hat = bf.hat.copy()
            hat[0, 0, 0] = 0.0
            bf = SpectralField.from_hat(f.grid, hat)
        oversample = 2 if spec.p == np.inf else 1
        terms.append(spec.weight(q) * bf.lp_norm(spec.p, oversample=oversample))
    terms_arr = np.asarray(terms)
    if spec.r == np.inf:
        return float(terms_arr.max())
    return float((terms_arr**spec.r).sum() ** (1.0 / spec.r))


# -- weight construction from a summable sequence ------------------------------


@dataclass
class PsiConstruction:
    """Output of the tail-recursion weight builder.

    c is the input positive sequence indexed by q = -1, 0, 1, ...;
    b_q = (sum_{n >= q} c_n)^{-1/2}; a follows
    a_{q+1} = (a_q + min(b_{q+1}, 2 a_q)) / 2 with a_{-1} = b_{-1}.
    """

    c: np.ndarray
    b: np.ndarray
    a: np.ndarray
    q_start: int = -1

    def psi(self, q: int) -> float:
        """a_q extended by its last value beyond the constructed range."""
        i = q - self.q_start
        if i < 0:
            raise IndexError(f"q={q} below q_start={self.q_start}")
        return float(self.a[min(i, len(self.a) - 1)])

    def verify(self, rtol: float = 1e-12) -> dict[str, bool]:
        a, b, c = self.a, self.b, self.c
        checks = {
            "a_nondecreasing": bool(np.all(a[1:] >= a[:-1] * (1.0 - rtol))),
            "a_below_b": bool(np.all(a <= b * (1.0 + rtol))),
            "ratio_in_1_to_3_2": bool(
                np.all(a[1:] / a[:-1] >= 1.0 - rtol) and np.all(a[1:] / a[:-1] <= 1.5 + rtol)
            ),
            "weighted_sum_bound": bool(
                float(np.sum(a * c)) <= 2.0 * math.sqrt(float(np.sum(c))) * (1.0 + rtol)
            ),
        }
        return checks


def construct_psi(c: Sequence[float]) -> PsiConstruction:
    c_arr = np.asarray(c, dtype=float)
    if c_arr.ndim != 1 or c_arr.size == 0:
        raise ValueError("need a one-dimensional nonempty sequence")
    if c_arr.size > 4096:
        raise ValueError(f"sequence too long ({c_arr.size} > 4096)")
    if np.any(~np.isfinite(c_arr)) or np.any(c_arr <= 0.0):
        raise ValueError("sequence entries must be finite and strictly positive")
    tails = np.cumsum(c_arr[::-1])[::-1]
    b = tails**-0.5
    a = np.empty_like(b)
    a[0] = b[0]
    for i in range(len(a) - 1):
        a[i + 1] = 0.5 * (a[i] + min(b[i + 1], 2.0 * a[i]))
    return PsiConstruction(c=c_arr, b=b, a=a)


# -- Bony decomposition --------------------------------------------------------


def bony(
    u: SpectralField, v: SpectralField, bank: DyadicFilterBank | None = None, factor: int = 2
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """Split uv into (T_u v, T_v u, R(u, v)).

    T_u v = sum_q S_{q-1}u Delta_q v and R collects the |q - q'| <= 1 pairs.
    Products are evaluated alias-free on a zero-padded factor-x grid and the
    parts are returned truncated to the base lattice, so for inputs whose
    blocks reconstruct them the three parts sum to the product exactly.
    """
    grid = check_same_grid(u.grid, v.grid)
    bank = bank or get_filter_bank(grid)
    qs = list(bank.qs())

    os_u = [grid.oversampled_values(bank.block(q, u).hat, factor) for q in qs]
    os_v = [grid.oversampled_values(bank.block(q, v).hat, factor) for q in qs]

    m = factor * grid.n
    t_uv = np.zeros((m, m, m))
    t_vu = np.zeros((m, m, m))
    rem = np.zeros((m, m, m))

    # running S_{q-1} on the fine grid (sum of blocks up to q-2)
    s_u = np.zeros((m, m, m))
    s_v = np.zeros((m, m, m))
    for idx, q in enumerate(qs):
        if idx >= 2:
            s_u += os_u[idx - 2]
            s_v += os_v[idx - 2]
        t_uv += s_u * os_v[idx]
        t_vu += s_v * os_u[idx]
        for jdx in (idx - 1, idx, idx + 1):
            if 0 <= jdx < len(qs):
                rem += os_u[idx] * os_v[jdx]

    import scipy.fft as _fft

    def back(big_vals):
        return SpectralField.from_hat(grid, grid.truncate_spectrum(_fft.rfftn(big_vals), factor))

    return back(t_uv), back(t_vu), back(rem)


# -- Bernstein constants -------------------------------------------------------


def _multi_indices(k: int):
    return [
        (a1, a2, k - a1 - a2)
        for a1 in range(k + 1)
        for a2 in range(k + 1 - a1)
    ]


@dataclass
class BernsteinReport:
    k: int
    a: float
    b: float
    qs: list[int]
    constants: list[float]
    lower_constants: list[float] = dataclass_field(default_factory=list)

    @property
    def spread(self) -> float:
        return max(self.constants) / min(self.constants)

    @property
    def lower_c(self) -> float:
        return max(self.lower_constants) if self.lower_constants else float("nan")


def bernstein_report(
    family: Sequence[SpectralField],
    k: int,
    a: float,
    b: float,
    bank: DyadicFilterBank | None = None,
) -> BernsteinReport:
    """Measure the constants of the derivative norm inequalities per block.

    For each annulus q = 0..q_max the reported constant is the family max of
    sup_{|alpha| = k} ||d^alpha Delta_q f||_{L^b} divided by
    2^{q(k + 3(1/a - 1/b))} ||Delta_q f||_{L^a}.  For a = b and k >= 1 the
    lower-bound constant 2^{qk} ||Delta_q f||_{L^a} / sup_alpha ||...|| is
    recorded as well.
    """
    if not (1.0 <= a <= b):
        raise ValueError("need 1 <= a <= b")
    if k < 0 or k > 3:
        raise ValueError("derivative order limited to 0..3")
    grid = family[0].grid
    bank = bank or get_filter_bank(grid)
    inv_a = 0.0 if a == np.inf else 1.0 / a
    inv_b = 0.0 if b == np.inf else 1.0 / b

    alphas = _multi_indices(k)
    ks = (grid.k1, grid.k2, grid.k3)

    qs, consts, lowers = [], [], []
    for q in range(0, bank.q_max + 1):
        best = 0.0
        best_lower = 0.0
        for f in family:
            bf = bank.block(q, f)
            base = bf.lp_norm(a, oversample=2 if a == np.inf else 1)
            if base <= 0.0:
                continue
            sup_deriv = 0.0
            for alpha in alphas:
                mult = np.ones(grid.spectral_shape, dtype=complex)
                for ax, power in enumerate(alpha):
                    if power:
                        mult = mult * (1j * ks[ax]) ** power
                df = SpectralField.from_hat(grid, mult * bf.hat)
                sup_deriv = max(df.lp_norm(b, oversample=2 if b == np.inf else 1), sup_deriv)
            scale = 2.0 ** (q * (k + 3.0 * (inv_a - inv_b)))
            best = max(best, sup_deriv / (scale * base))
            if a == b and k >= 1 and sup_deriv > 0.0:
                best_lower = max(best_lower, 2.0 ** (q * k) * base / sup_deriv)
        qs.append(q)
        consts.append(best)
        if a == b and k >= 1:
            lowers.append(best_lower)
    return BernsteinReport(k=k, a=a, b=b, qs=qs, constants=consts, lower_constants=lowers)


# -- anisotropic dilatation ----------------------------------------------------

_DYADIC_LAMBDAS = (1.0, 0.5, 0.25, 0.125, 0.0625)


@dataclass
class DilatationReport:
    s: float
    lambdas: list[float]
    ratios: list[float]

    @property
    def spread(self) -> float:
        return max(self.ratios) / min(self.ratios)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)


def dilate_x1(f: SpectralField, lam: float) -> SpectralField:
    """f_lambda(x) = f(lambda x1, x2, x3) for dyadic lambda = 2^-m.

    Requires every active mode to have k1 divisible by 2^m, otherwise the
    squeezed field is not 2*pi-periodic.
    """
    if lam not in _DYADIC_LAMBDAS:
        raise ValueError(f"dilatation factor must be one of {_DYADIC_LAMBDAS}, got {lam}")
    m = int(round(-math.log2(lam)))
    if m == 0:
        return f.copy()
    grid = f.grid
    step = 2**m
    k1 = np.fft.fftfreq(grid.n, d=1.0 / grid.n).astype(int)
    divisible = (k1 % step) == 0
    hat = f.hat
    stray = float(np.abs(hat[~divisible, :, :]).max(initial=0.0))
    scale = float(np.abs(hat).max(initial=0.0))
    if scale > 0 and stray > 1e-12 * scale:
        raise ValueError(
            f"field has modes with k1 not divisible by {step}; f(lambda x1) is not periodic"
        )
    out = np.zeros_like(hat)
    src_rows = np.nonzero(divisible)[0]
    dst_rows = (k1[src_rows] // step) % grid.n
    out[dst_rows, :, :] = hat[src_rows, :, :]
    return SpectralField.from_hat(grid, out)


def dilate_check(
    f: SpectralField,
    s: float,
    lambdas: Sequence[float],
    bank: DyadicFilterBank | None = None,
) -> DilatationReport:
    """Table of ||f_lambda||_{B^s_{inf,inf}} / (lambda^s ||f||_{B^s_{inf,inf}})."""
    if not (-1.0 < s) or s == 0.0:
        raise ValueError("exponent must lie in (-1, inf) \\ {0}")
    bank = bank or get_filter_bank(f.grid)
    spec = BesovSpec(s=s, p=np.inf, r=np.inf)
    base = besov_norm(f, spec, bank)
    if base <= 0.0:
        raise ValueError("dilatation check needs a nonzero field")
    lambdas = list(lambdas)
    ratios = []
    for lam in lambdas:
        fl = dilate_x1(f, lam)
        ratios.append(besov_norm(fl, spec, bank) / (lam**s * base))
    return DilatationReport(s=s, lambdas=lambdas, ratios=ratios)


# -- commutator ----------------------------------------------------------------


def commutator(
    q: int, v: VecField, u: SpectralField, bank: DyadicFilterBank | None = None
) -> SpectralField:
    """[Delta_q, v . grad] u = Delta_q(v . grad u) - v . grad (Delta_q u)."""
    grid = check_same_grid(v.grid, u.grid)
    bank = bank or get_filter_bank(grid)
    first = bank.block(q, advect_scalar(v, u))
    second = advect_scalar(v, bank.block(q, u))
    return first - second


@dataclass
class CommutatorReport:
    qs: list[int]
    weighted_norms: list[float]
    rhs: float
    ratios: list[float]

    @property
    def spread(self) -> float:
        pos = [r for r in self.ratios if r > 0]
        return max(pos) / min(pos) if pos else float("nan")


def commutator_report(
    v: VecField,
    u: SpectralField,
    s: float = 1.0,
    psi: Callable[[int], float] | None = None,
    bank: DyadicFilterBank | None = None,
    q_lo: int = 2,
) -> CommutatorReport:
    """Per-block weighted commutator norms against the product-rule bound.

    Logs 2^{qs} psi(q) ||[Delta_q, v.grad]u||_{L^2} over q and the ratio to
    ||grad v||_inf ||u||_B + ||grad u||_inf ||v||_B (trend only; no constant
    is asserted here).
    """
    grid = check_same_grid(v.grid, u.grid)
    bank = bank or get_filter_bank(grid)
    spec = BesovSpec(s=s, p=2.0, r=1.0, psi=psi, psi_id="custom" if psi else "one")

    grad_v_inf = max(g.lp_norm(np.inf) for comp in v for g in grad(comp))
    grad_u_inf = max(g.lp_norm(np.inf) for g in grad(u))
    u_b = besov_norm(u, spec, bank)
    v_b = sum(besov_norm(comp, spec, bank) for comp in v)
    rhs = grad_v_inf * u_b + grad_u_inf * v_b

    qs, norms, ratios = [], [], []
    for q in range(q_lo, bank.q_max + 1):
        w = spec.weight(q)
        nq = w * commutator(q, v, u, bank).l2_norm()
        qs.append(q)
        norms.append(nq)
        ratios.append(nq / rhs if rhs > 0 else float("nan"))
    return CommutatorReport(qs=qs, weighted_norms=norms, rhs=rhs, ratios=ratios)
