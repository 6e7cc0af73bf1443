"""Solution state of the penalized system and step-control knobs."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .field import SpectralField, VecField
from .grid import Grid


class PreconditionError(ValueError):
    """An operation was fed a state violating its stated precondition."""


@dataclass
class State:
    """Tuple (v, c, eps, gamma_bar, t) of the compressible system.

    ``c`` is the zero-mean fluctuation of the sound speed; its spatial mean
    is carried separately in ``c_mean`` because the acoustic penalization is
    blind to it (the k = 0 mode would otherwise make the diagonalization
    degenerate).
    """

    v: VecField
    c: SpectralField
    c_mean: float
    eps: float
    gamma_bar: float
    t: float = 0.0

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError(f"Mach number must be positive, got {self.eps}")
        if self.gamma_bar <= 0.0:
            raise ValueError(f"gamma_bar must be positive, got {self.gamma_bar}")
        mean = self.c.mean()
        if abs(mean) > 1e-12 * max(1.0, float(np.abs(self.c.values).max())):
            # fold any residual mean into the scalar slot
            hat = self.c.hat.copy()
            self.c_mean += hat[0, 0, 0].real / self.grid.n**3
            hat[0, 0, 0] = 0.0
            self.c = SpectralField.from_hat(self.grid, hat)

    @property
    def grid(self) -> Grid:
        return self.v.grid

    def c_total(self) -> SpectralField:
        """Sound-speed field including its mean."""
        hat = self.c.hat.copy()
        hat[0, 0, 0] += self.c_mean * self.grid.n**3
        return SpectralField.from_hat(self.grid, hat)

    def copy(self) -> "State":
        return replace(self, v=self.v.copy(), c=self.c.copy())


@dataclass(frozen=True)
class StepControl:
    """Time-step selection and blow-up proxy thresholds.

    dt = min(cfl * h / (|v|_inf + gamma_bar |c|_inf), dt_eps_factor * eps).
    The proxy thresholds are configuration for the lifespan stand-in, not
    claims about the true maximal existence time.
    """

    cfl: float = 0.4
    dt_eps_factor: float = 0.5
    blowup_factor: float = 10.0
    tail_fraction_max: float = 1e-3
    fixed_dt: float | None = None

    def __post_init__(self):
        for name in ("cfl", "dt_eps_factor", "blowup_factor", "tail_fraction_max"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
