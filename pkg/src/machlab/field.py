"""Scalar and vector fields with synchronized real/spectral representations."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .grid import Grid, check_same_grid


class SpectralField:
    """Real scalar field on a periodic grid, mirrored in Fourier space.

    Whichever representation was supplied is authoritative; the other is
    produced lazily and cached.  Fields are treated as immutable: all
    operations return fresh instances, which keeps concurrent read-only use
    safe.
    """

    __slots__ = ("grid", "_hat", "_values")

    def __init__(self, grid: Grid, *, hat=None, values=None):
        if hat is None and values is None:
            raise ValueError("need spectral or real data")
        self.grid = grid
        self._hat = hat
        self._values = values

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid n={grid.n}")
        return cls(grid, values=values)

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "SpectralField":
        hat = np.asarray(hat, dtype=complex)
        if hat.shape != grid.spectral_shape:
            raise ValueError(f"hat shape {hat.shape} != {grid.spectral_shape}")
        return cls(grid, hat=hat)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, hat=np.zeros(grid.spectral_shape, dtype=complex))

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = self.grid.fft(self._values)
        return self._hat

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.grid.ifft(self._hat)
        return self._values

    def copy(self) -> "SpectralField":
        return SpectralField(
            self.grid,
            hat=None if self._hat is None else self._hat.copy(),
            values=None if self._values is None else self._values.copy(),
        )

    # -- algebra (scalar coefficients only; field products live in operators)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        check_same_grid(self.grid, other.grid)
        return SpectralField.from_hat(self.grid, self.hat + other.hat)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        check_same_grid(self.grid, other.grid)
        return SpectralField.from_hat(self.grid, self.hat - other.hat)

    def __mul__(self, alpha: float) -> "SpectralField":
        return SpectralField.from_hat(self.grid, self.hat * float(alpha))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField.from_hat(self.grid, -self.hat)

    # -- helpers --------------------------------------------------------------

    def mean(self) -> float:
        if self._values is not None:
            return float(self._values.mean())
        return float(self.hat[0, 0, 0].real) / self.grid.n**3

    def dealiased(self) -> "SpectralField":
        return SpectralField.from_hat(self.grid, self.hat * self.grid.dealias_mask)

    def lp_norm(self, p: float, oversample: int = 1) -> float:
        """Grid-quadrature L^p norm (cell volume h^3); p = inf is a grid max.

        ``oversample=2`` evaluates maxima on a zero-padded twice-finer grid,
        which bounds the undersampling error of sup norms of band-limited
        fields.
        """
        if p == np.inf:
            if oversample > 1:
                return float(np.abs(self.grid.oversampled_values(self.hat, oversample)).max())
            return float(np.abs(self.values).max())
        if p <= 0:
            raise ValueError(f"p must be positive, got {p}")
        vals = np.abs(self.values)
        return float((vals**p).sum() * self.grid.cell_volume) ** (1.0 / p)

    def l2_norm(self) -> float:
        return self.lp_norm(2.0)


class VecField:
    """Three scalar components on one shared grid."""

    __slots__ = ("grid", "components")

    def __init__(self, components: Sequence[SpectralField]):
        comps = tuple(components)
        if len(comps) != 3:
            raise ValueError("VecField needs exactly three components")
        self.grid = check_same_grid(*(f.grid for f in comps))
        self.components = comps

    @classmethod
    def from_values(cls, grid: Grid, values: Iterable[np.ndarray]) -> "VecField":
        return cls([SpectralField.from_values(grid, v) for v in values])

    @classmethod
    def from_hat(cls, grid: Grid, hats: Iterable[np.ndarray]) -> "VecField":
        return cls([SpectralField.from_hat(grid, h) for h in hats])

    @classmethod
    def zeros(cls, grid: Grid) -> "VecField":
        return cls([SpectralField.zeros(grid) for _ in range(3)])

    def __getitem__(self, i: int) -> SpectralField:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "VecField") -> "VecField":
        return VecField([a + b for a, b in zip(self, other)])

    def __sub__(self, other: "VecField") -> "VecField":
        return VecField([a - b for a, b in zip(self, other)])

    def __mul__(self, alpha: float) -> "VecField":
        return VecField([f * alpha for f in self])

    __rmul__ = __mul__

    def __neg__(self) -> "VecField":
        return VecField([-f for f in self])

    def copy(self) -> "VecField":
        return VecField([f.copy() for f in self])

    def dealiased(self) -> "VecField":
        return VecField([f.dealiased() for f in self])

    def hats(self):
        return tuple(f.hat for f in self.components)

    def values(self):
        return tuple(f.values for f in self.components)

    def l2_norm(self) -> float:
        v1, v2, v3 = self.values()
        s = float(((v1 * v1) + (v2 * v2) + (v3 * v3)).sum() * self.grid.cell_volume)
        return np.sqrt(s)

    def linf_norm(self, oversample: int = 1) -> float:
        return max(f.lp_norm(np.inf, oversample) for f in self.components)


def l2_inner(f: SpectralField | VecField, g: SpectralField | VecField) -> float:
    """L^2 inner product by grid quadrature."""
    if isinstance(f, VecField) != isinstance(g, VecField):
        raise ValueError("cannot pair scalar with vector")
    if isinstance(f, VecField):
        check_same_grid(f.grid, g.grid)
        acc = 0.0
        for a, b in zip(f, g):
            acc += float((a.values * b.values).sum())
        return acc * f.grid.cell_volume
    check_same_grid(f.grid, g.grid)
    return float((f.values * g.values).sum() * f.grid.cell_volume)
