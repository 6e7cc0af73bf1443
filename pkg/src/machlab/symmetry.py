"""Rotations about the vertical axis through the box center, and point sampling.

The symmetry axis is the line x1 = x2 = pi.  Quarter-turn rotations map the
periodic lattice onto itself exactly (n is even), so those residuals carry no
interpolation error; arbitrary angles are measured by evaluating the Fourier
series directly at scattered sample points.
"""

from __future__ import annotations

import numpy as np

from .field import SpectralField, VecField
from .grid import Grid

CENTER = np.pi

_EXACT_ANGLES = (0.5 * np.pi, np.pi, 1.5 * np.pi)


def rotate_scalar_values(values: np.ndarray, quarter_turns: int) -> np.ndarray:
    """Sample f(R_alpha x) on the lattice for alpha = quarter_turns * pi/2."""
    n = values.shape[0]
    t = quarter_turns % 4
    if t == 0:
        return values
    idx = np.arange(n)
    neg = (n - idx) % n
    if t == 1:
        # source point (n - j, i, k)
        return values[neg].transpose(1, 0, 2)
    if t == 2:
        return values[neg][:, neg, :]
    # t == 3: source point (j, n - i, k)
    return values[:, neg, :].transpose(1, 0, 2)


def rotate_vector_fields(values: tuple[np.ndarray, np.ndarray, np.ndarray], quarter_turns: int):
    """Components of R_{-alpha} v(R_alpha x) for alpha = quarter_turns * pi/2."""
    v1, v2, v3 = values
    t = quarter_turns % 4
    r = lambda a: rotate_scalar_values(a, t)
    if t == 0:
        return v1, v2, v3
    if t == 1:
        return r(v2), -r(v1), r(v3)
    if t == 2:
        return -r(v1), -r(v2), r(v3)
    return -r(v2), r(v1), r(v3)


def scalar_rotation_residual(f: SpectralField) -> float:
    """Max relative L^2 defect of f under the exact quarter-turn rotations."""
    vals = f.values
    ref = np.sqrt(float((vals**2).sum()))
    if ref == 0.0:
        return 0.0
    worst = 0.0
    for t in (1, 2, 3):
        diff = rotate_scalar_values(vals, t) - vals
        worst = max(worst, np.sqrt(float((diff**2).sum())) / ref)
    return worst


def vector_rotation_residual(v: VecField) -> float:
    vals = v.values()
    ref = np.sqrt(sum(float((a**2).sum()) for a in vals))
    if ref == 0.0:
        return 0.0
    worst = 0.0
    for t in (1, 2, 3):
        rot = rotate_vector_fields(vals, t)
        err = np.sqrt(sum(float(((a - b) ** 2).sum()) for a, b in zip(rot, vals)))
        worst = max(worst, err / ref)
    return worst


def rotate_points(points: np.ndarray, alpha: float) -> np.ndarray:
    """Rotate sample points about the center axis by an arbitrary angle."""
    out = points.copy()
    u = points[:, 0] - CENTER
    w = points[:, 1] - CENTER
    ca, sa = np.cos(alpha), np.sin(alpha)
    out[:, 0] = CENTER + ca * u - sa * w
    out[:, 1] = CENTER + sa * u + ca * w
    return out


def fourier_eval(grid: Grid, hats: list[np.ndarray], points: np.ndarray, chunk: int = 64):
    """Evaluate real fields given by half-spectrum coefficients at points.

    Only modes inside the dealias box are summed; fields are expected to be
    dealiased (which every field touched by the solver is).
    """
    support = grid.dealias_mask.copy()
    nz = np.zeros(grid.spectral_shape, dtype=bool)
    for h in hats:
        nz |= h != 0.0
    support &= nz
    idx = np.nonzero(support)
    kmat = np.stack(
        [
            np.broadcast_to(grid.k1, grid.spectral_shape)[idx],
            np.broadcast_to(grid.k2, grid.spectral_shape)[idx],
            np.broadcast_to(grid.k3, grid.spectral_shape)[idx],
        ],
        axis=0,
    )  # (3, M)
    weights = grid.mode_multiplicity[idx]
    coefs = [h[idx] * weights for h in hats]
    norm = 1.0 / grid.n**3

    m = points.shape[0]
    outs = [np.empty(m) for _ in hats]
    for start in range(0, m, chunk):
        pts = points[start : start + chunk]
        phase = kmat.T @ pts.T  # (M, c)
        e = np.exp(1j * phase)
        for out, c in zip(outs, coefs):
            out[start : start + chunk] = (c @ e).real * norm
    return outs


def sampled_rotation_residual(
    v: VecField | SpectralField,
    alphas: np.ndarray,
    points: np.ndarray,
) -> float:
    """Axisymmetry residual at arbitrary angles via direct Fourier evaluation.

    Returns the worst RMS of R_{-alpha} v(R_alpha x_s) - v(x_s) over the
    angles, normalized by the field's global RMS.
    """
    grid = v.grid
    if isinstance(v, VecField):
        hats = list(v.hats())
        rms = v.l2_norm() / np.sqrt(grid.volume)
    else:
        hats = [v.hat]
        rms = v.l2_norm() / np.sqrt(grid.volume)
    if rms == 0.0:
        return 0.0
    base = fourier_eval(grid, hats, points)
    worst = 0.0
    for alpha in np.atleast_1d(alphas):
        rot_pts = rotate_points(points, float(alpha))
        rotated = fourier_eval(grid, hats, rot_pts)
        if isinstance(v, VecField):
            ca, sa = np.cos(alpha), np.sin(alpha)
            # R_{-alpha} applied to the sampled vector
            back1 = ca * rotated[0] + sa * rotated[1]
            back2 = -sa * rotated[0] + ca * rotated[1]
            diff = np.concatenate([back1 - base[0], back2 - base[1], rotated[2] - base[2]])
        else:
            diff = rotated[0] - base[0]
        worst = max(worst, np.sqrt(float((diff**2).mean())) / rms)
    return worst
