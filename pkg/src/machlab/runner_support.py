"""Reference-solution storage for incompressible-limit comparisons."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .checkpoint import read_checkpoint


class ReferenceSeries:
    """Velocity snapshots of the reference incompressible run, keyed by time.

    Built from the checkpoint files the reference run wrote at its sampling
    cadence; lookups are exact in time (1e-9 tolerance).
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._snapshots: dict[float, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        files = sorted(self.directory.glob("chk_*.ckpt"))
        if not files:
            raise FileNotFoundError(f"no reference checkpoints under {self.directory}")
        for path in files:
            fields, time, _eps = read_checkpoint(path)
            if len(fields) < 3:
                raise ValueError(f"reference checkpoint {path} has {len(fields)} fields")
            self._snapshots[round(time, 9)] = tuple(f.values for f in fields[:3])

    def times(self) -> list[float]:
        return sorted(self._snapshots)

    def velocity_at(self, t: float):
        key = round(t, 9)
        if key in self._snapshots:
            return self._snapshots[key]
        for stored in self._snapshots:
            if abs(stored - t) < 1e-9:
                return self._snapshots[stored]
        raise KeyError(f"no reference snapshot at t={t} (have {self.times()})")
