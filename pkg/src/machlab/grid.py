"""Periodic grid bookkeeping: wavenumber lattice, transforms, dealiasing.

The box is fixed to [0, 2*pi)^3 so the frequency lattice is integer-valued.
Real scalar fields are carried on the half spectrum (``rfftn`` layout, last
axis holds k3 >= 0); conjugate symmetry is structural.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _fft

TWO_PI = 2.0 * np.pi

#: workers passed to scipy.fft; kept at 1 so runs are reproducible bit-for-bit
FFT_WORKERS = 1


class GridMismatchError(ValueError):
    """An operation mixed fields living on different grids."""


class Grid:
    """Uniform periodic grid with spacing h = 2*pi/n per axis.

    n must be a power of two and at least 8.  Arrays are indexed
    ``[i1, i2, i3]`` with x_a = i_a * h; checkpoint I/O reorders to the
    on-disk x1-fastest convention.
    """

    def __init__(self, n: int):
        n = int(n)
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        self.n = n
        self.h = TWO_PI / n
        self.shape = (n, n, n)
        self.spectral_shape = (n, n, n // 2 + 1)
        self.cell_volume = self.h**3
        self.volume = TWO_PI**3

        k_full = np.fft.fftfreq(n, d=1.0 / n)      # 0..n/2-1, -n/2..-1
        k_half = np.fft.rfftfreq(n, d=1.0 / n)     # 0..n/2
        self.k1 = k_full.reshape(n, 1, 1)
        self.k2 = k_full.reshape(1, n, 1)
        self.k3 = k_half.reshape(1, 1, n // 2 + 1)
        self.k_sq = self.k1**2 + self.k2**2 + self.k3**2
        self.k_abs = np.sqrt(self.k_sq)
        with np.errstate(divide="ignore"):
            inv = np.where(self.k_sq > 0.0, 1.0 / np.where(self.k_sq > 0, self.k_sq, 1.0), 0.0)
        self.inv_k_sq = inv

        # 2/3 rule with a spherical cut: keep |k| <= n/3 after every nonlinear
        # product.  The ball sits inside the |k_a| <= n/3 cube (so the stated
        # componentwise invariant holds a fortiori) and, unlike the cube, is
        # rotation invariant, which keeps truncation from seeding swirl in
        # axisymmetric runs.  Quadratic aliases land at |k| >= n/3 and are
        # removed, so the rule stays exactly alias-free.
        self.kmax_dealias = n // 3
        self.dealias_mask = self.k_abs <= n / 3.0
        self.dealias_cube = (
            (np.abs(self.k1) <= self.kmax_dealias)
            & (np.abs(self.k2) <= self.kmax_dealias)
            & (np.abs(self.k3) <= self.kmax_dealias)
        )

        # multiplicity of each stored mode in the full lattice (rfft folding)
        mult = np.full(self.spectral_shape, 2.0)
        mult[:, :, 0] = 1.0
        if n % 2 == 0:
            mult[:, :, -1] = 1.0
        self.mode_multiplicity = mult

        x = np.arange(n) * self.h
        self.x1 = x.reshape(n, 1, 1)
        self.x2 = x.reshape(1, n, 1)
        self.x3 = x.reshape(1, 1, n)

    # -- transforms ---------------------------------------------------------

    def fft(self, values: np.ndarray) -> np.ndarray:
        return _fft.rfftn(values, workers=FFT_WORKERS)

    def ifft(self, hat: np.ndarray) -> np.ndarray:
        return _fft.irfftn(hat, s=self.shape, workers=FFT_WORKERS)

    # -- zero padding (exact products, oversampled maxima) -------------------

    def pad_spectrum(self, hat: np.ndarray, factor: int = 2) -> np.ndarray:
        """Embed a half-spectrum array into the lattice of a factor-x grid.

        Mode placement is exact: every stored (k1,k2,k3) keeps its integer
        wavevector on the finer lattice.
        """
        n, m = self.n, factor * self.n
        big = np.zeros((m, m, m // 2 + 1), dtype=complex)
        lo = n // 2                      # rows 0..lo-1 hold k >= 0
        big[:lo, :lo, : n // 2 + 1] = hat[:lo, :lo, :]
        big[:lo, m - lo :, : n // 2 + 1] = hat[:lo, lo:, :]
        big[m - lo :, :lo, : n // 2 + 1] = hat[lo:, :lo, :]
        big[m - lo :, m - lo :, : n // 2 + 1] = hat[lo:, lo:, :]
        big *= float(factor) ** 3
        return big

    def truncate_spectrum(self, big: np.ndarray, factor: int = 2) -> np.ndarray:
        """Inverse of :meth:`pad_spectrum` (drops the extra modes)."""
        n, m = self.n, factor * self.n
        lo = n // 2
        hat = np.empty(self.spectral_shape, dtype=complex)
        hat[:lo, :lo, :] = big[:lo, :lo, : n // 2 + 1]
        hat[:lo, lo:, :] = big[:lo, m - lo :, : n // 2 + 1]
        hat[lo:, :lo, :] = big[m - lo :, :lo, : n // 2 + 1]
        hat[lo:, lo:, :] = big[m - lo :, m - lo :, : n // 2 + 1]
        hat /= float(factor) ** 3
        return hat

    def oversampled_values(self, hat: np.ndarray, factor: int = 2) -> np.ndarray:
        big = self.pad_spectrum(hat, factor)
        m = factor * self.n
        return _fft.irfftn(big, s=(m, m, m), workers=FFT_WORKERS)

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self):
        return hash(("Grid", self.n))

    def __repr__(self):
        return f"Grid(n={self.n})"


def check_same_grid(*grids: Grid) -> Grid:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"mixed grids: {first} vs {g}")
    return first
