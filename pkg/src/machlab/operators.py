"""Spectral calculus: derivatives, inverse Laplacian, Riesz transforms, Helmholtz split.

All operators act as exact Fourier multipliers on the integer lattice.  The
zero mode of the inverse Laplacian (and of every operator carrying a 1/|k|^2)
is set to zero; means are handled by that convention throughout.
"""

from __future__ import annotations

import numpy as np

from .field import SpectralField, VecField
from .grid import check_same_grid


def grad(f: SpectralField) -> VecField:
    g = f.grid
    fh = f.hat
    return VecField.from_hat(g, (1j * g.k1 * fh, 1j * g.k2 * fh, 1j * g.k3 * fh))


def div(v: VecField) -> SpectralField:
    g = v.grid
    h1, h2, h3 = v.hats()
    return SpectralField.from_hat(g, 1j * (g.k1 * h1 + g.k2 * h2 + g.k3 * h3))


def curl(v: VecField) -> VecField:
    g = v.grid
    h1, h2, h3 = v.hats()
    return VecField.from_hat(
        g,
        (
            1j * (g.k2 * h3 - g.k3 * h2),
            1j * (g.k3 * h1 - g.k1 * h3),
            1j * (g.k1 * h2 - g.k2 * h1),
        ),
    )


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField.from_hat(f.grid, -f.grid.k_sq * f.hat)


def inv_laplacian(f: SpectralField) -> SpectralField:
    """Multiplier -1/|k|^2, zero mode dropped: Lap(inv_lap f) = f - mean(f)."""
    g = f.grid
    return SpectralField.from_hat(g, -g.inv_k_sq * f.hat)


def riesz(i: int, j: int, f: SpectralField) -> SpectralField:
    """R_ij = d_i d_j / Lap, i.e. multiplier -k_i k_j / |k|^2 (zero mode 0)."""
    g = f.grid
    ks = (g.k1, g.k2, g.k3)
    if not (0 <= i <= 2 and 0 <= j <= 2):
        raise ValueError(f"axis out of range: ({i}, {j})")
    return SpectralField.from_hat(g, -ks[i] * ks[j] * g.inv_k_sq * f.hat)


def helmholtz(v: VecField) -> tuple[VecField, VecField]:
    """Split v = Pv + Qv with div Pv = 0 and Qv = grad inv_lap div v.

    The k = 0 mode belongs entirely to Pv.  The split is exact in
    coefficients (Qv is computed, Pv = v - Qv).
    """
    g = v.grid
    h1, h2, h3 = v.hats()
    kdotv = g.k1 * h1 + g.k2 * h2 + g.k3 * h3
    s = kdotv * g.inv_k_sq
    q = (g.k1 * s, g.k2 * s, g.k3 * s)
    qv = VecField.from_hat(g, q)
    pv = VecField.from_hat(g, (h1 - q[0], h2 - q[1], h3 - q[2]))
    return pv, qv


def leray(v: VecField) -> VecField:
    return helmholtz(v)[0]


def q_part(v: VecField) -> VecField:
    return helmholtz(v)[1]


# -- products ----------------------------------------------------------------


def dealiased_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product followed by the 2/3-rule truncation."""
    gr = check_same_grid(f.grid, g.grid)
    hat = gr.fft(f.values * g.values)
    hat *= gr.dealias_mask
    return SpectralField.from_hat(gr, hat)


def padded_product(f: SpectralField, g: SpectralField, factor: int = 2) -> SpectralField:
    """Alias-free product evaluated on a zero-padded factor-x grid.

    Exact (up to rounding) for inputs band-limited to n/2/factor * ... in the
    sense that every product mode representable on the base grid is computed
    without aliasing; modes beyond the base lattice are discarded.
    """
    gr = check_same_grid(f.grid, g.grid)
    a = gr.oversampled_values(f.hat, factor)
    b = gr.oversampled_values(g.hat, factor)
    import scipy.fft as _fft

    big_hat = _fft.rfftn(a * b)
    return SpectralField.from_hat(gr, gr.truncate_spectrum(big_hat, factor))


def advect_scalar(v: VecField, f: SpectralField) -> SpectralField:
    """(v . grad) f with one dealiased product per term."""
    gr = check_same_grid(v.grid, f.grid)
    gf = grad(f)
    out = np.zeros(gr.shape)
    for vi, gi in zip(v, gf):
        out += vi.values * gi.values
    hat = gr.fft(out)
    hat *= gr.dealias_mask
    return SpectralField.from_hat(gr, hat)


def advect_vector(v: VecField, w: VecField) -> VecField:
    return VecField([advect_scalar(v, wi) for wi in w])
