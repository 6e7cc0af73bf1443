"""Spectral calculus: transforms, multiplier operators, Helmholtz split, checkpoints."""

import numpy as np
import pytest

from machlab.checkpoint import CheckpointError, read_checkpoint, write_checkpoint
from machlab.field import SpectralField, VecField, l2_inner
from machlab.grid import Grid, GridMismatchError
from machlab.operators import (
    curl,
    dealiased_product,
    div,
    grad,
    helmholtz,
    inv_laplacian,
    laplacian,
    padded_product,
    riesz,
)

from conftest import random_field, random_vec


class TestGrid:
    def test_rejects_non_power_of_two(self):
        for n in (7, 12, 20, 6):
            with pytest.raises(ValueError):
                Grid(n)

    def test_rejects_too_small(self):
        with pytest.raises(ValueError):
            Grid(4)

    def test_round_trip(self, grid32, rng):
        vals = rng.standard_normal(grid32.shape)
        back = grid32.ifft(grid32.fft(vals))
        assert np.abs(back - vals).max() <= 1e-13 * np.abs(vals).max()

    def test_integer_lattice(self, grid32):
        assert grid32.k1.min() == -16 and grid32.k1.max() == 15
        assert grid32.k3.max() == 16
        assert grid32.h == pytest.approx(2 * np.pi / 32)


class TestDerivatives:
    def test_grad_single_mode(self, grid32):
        f = SpectralField.from_values(grid32, np.sin(grid32.x1) * np.ones(grid32.shape))
        g = grad(f)
        expected = np.cos(grid32.x1) * np.ones(grid32.shape)
        assert np.abs(g[0].values - expected).max() <= 1e-13
        assert np.abs(g[1].values).max() <= 1e-13
        assert np.abs(g[2].values).max() <= 1e-13

    def test_curl_of_gradient_vanishes(self, grid32, rng):
        f = random_field(grid32, rng)
        c = curl(grad(f))
        scale = f.l2_norm()
        assert max(comp.l2_norm() for comp in c) <= 1e-13 * scale

    def test_div_of_shear(self, grid32):
        v = VecField.from_values(
            grid32,
            (np.sin(grid32.x2) * np.ones(grid32.shape), np.zeros(grid32.shape), np.zeros(grid32.shape)),
        )
        assert div(v).l2_norm() <= 1e-13

    def test_plane_wave_derivative_exact(self, grid64):
        # resolved plane wave: derivative exact to machine rounding
        k = (3, -5, 7)
        phase = k[0] * grid64.x1 + k[1] * grid64.x2 + k[2] * grid64.x3
        f = SpectralField.from_values(grid64, np.sin(phase))
        g = grad(f)
        for i in range(3):
            expected = k[i] * np.cos(phase)
            assert np.abs(g[i].values - expected).max() <= 1e-12 * max(1, abs(k[i]))

    def test_mismatched_grids(self, grid32, grid64, rng):
        with pytest.raises(GridMismatchError):
            VecField(
                [
                    random_field(grid32, rng),
                    random_field(grid32, rng),
                    random_field(grid64, rng),
                ]
            )


class TestInverseLaplacian:
    def test_single_modes(self, grid32):
        f = SpectralField.from_values(grid32, np.sin(grid32.x1) * np.ones(grid32.shape))
        assert np.abs(inv_laplacian(f).values - (-np.sin(grid32.x1) * np.ones(grid32.shape))).max() <= 1e-13

        f2 = SpectralField.from_values(grid32, np.cos(2 * grid32.x3) * np.ones(grid32.shape))
        expected = -np.cos(2 * grid32.x3) / 4.0 * np.ones(grid32.shape)
        assert np.abs(inv_laplacian(f2).values - expected).max() <= 1e-13

    def test_round_trip_oracle(self, grid32, rng):
        f = random_field(grid32, rng)
        hat = f.hat.copy()
        hat[0, 0, 0] = 0.0  # zero mean
        f = SpectralField.from_hat(grid32, hat)
        back = laplacian(inv_laplacian(f))
        assert (back - f).l2_norm() <= 1e-12 * f.l2_norm()


class TestRiesz:
    def test_trace_identity(self, grid32, rng):
        f = random_field(grid32, rng)
        hat = f.hat.copy()
        hat[0, 0, 0] = 0.0
        f = SpectralField.from_hat(grid32, hat)
        total = riesz(0, 0, f) + riesz(1, 1, f) + riesz(2, 2, f)
        assert (total + f).l2_norm() <= 1e-12 * f.l2_norm()

    def test_single_mode(self, grid32):
        f = SpectralField.from_values(grid32, np.sin(grid32.x1) * np.ones(grid32.shape))
        assert np.abs(riesz(0, 0, f).values + f.values).max() <= 1e-13

    def test_mixed_mode(self, grid32):
        # k = (1, 1, 0): multiplier -k1 k2 / |k|^2 = -1/2
        vals = np.sin(grid32.x1 + grid32.x2) * np.ones(grid32.shape)
        f = SpectralField.from_values(grid32, vals)
        assert np.abs(riesz(0, 1, f).values + 0.5 * vals).max() <= 1e-13


class TestHelmholtz:
    def test_gradient_field_is_pure_q(self, grid32, rng):
        f = random_field(grid32, rng)
        hat = f.hat.copy()
        hat[0, 0, 0] = 0.0
        v = grad(SpectralField.from_hat(grid32, hat))
        pv, qv = helmholtz(v)
        scale = v.l2_norm()
        assert max((qv[i] - v[i]).l2_norm() for i in range(3)) <= 1e-12 * scale
        assert max(pv[i].l2_norm() for i in range(3)) <= 1e-12 * scale

    def test_curl_field_is_pure_p(self, grid32, rng):
        v = curl(random_vec(grid32, rng))
        pv, qv = helmholtz(v)
        scale = v.l2_norm()
        assert max((pv[i] - v[i]).l2_norm() for i in range(3)) <= 1e-12 * scale

    def test_idempotence(self, grid32, rng):
        v = random_vec(grid32, rng)
        _, qv = helmholtz(v)
        pq, qq = helmholtz(qv)
        scale = v.l2_norm()
        assert max((qq[i] - qv[i]).l2_norm() for i in range(3)) <= 1e-12 * scale
        assert max(pq[i].l2_norm() for i in range(3)) <= 1e-12 * scale

    def test_partition_exact_in_coefficients(self, grid32, rng):
        v = random_vec(grid32, rng)
        pv, qv = helmholtz(v)
        norm = max(np.abs(v[i].hat).max() for i in range(3))
        defect = max(np.abs(pv[i].hat + qv[i].hat - v[i].hat).max() for i in range(3))
        assert defect <= 1e-13 * norm

    def test_zero_mode_goes_to_p(self, grid32):
        vals = [np.full(grid32.shape, c) for c in (1.0, -2.0, 0.5)]
        v = VecField.from_values(grid32, vals)
        pv, qv = helmholtz(v)
        assert max(q.l2_norm() for q in qv) == 0.0
        assert pv[0].mean() == pytest.approx(1.0)

    def test_orthogonality(self, grid32, rng):
        v = random_vec(grid32, rng)
        w = random_vec(grid32, rng)
        pv, _ = helmholtz(v)
        _, qw = helmholtz(w)
        assert abs(l2_inner(pv, qw)) <= 1e-11 * v.l2_norm() * w.l2_norm()

    def test_div_p_and_curl_q_vanish(self, grid32, rng):
        v = random_vec(grid32, rng)
        pv, qv = helmholtz(v)
        scale = v.l2_norm()
        assert div(pv).l2_norm() <= 1e-12 * scale
        assert max(c.l2_norm() for c in curl(qv)) <= 1e-12 * scale


class TestDealiasing:
    def test_product_band_and_truncation(self, grid32, rng):
        f = random_field(grid32, rng)
        g = random_field(grid32, rng)
        prod = dealiased_product(f, g)
        assert np.abs(prod.hat[~grid32.dealias_mask]).max() == 0.0

    def test_padded_product_matches_direct(self, grid32, rng):
        # inputs band-limited to < n/4 so the true product fits the base grid
        f = random_field(grid32, rng, kmax=7)
        g = random_field(grid32, rng, kmax=7)
        direct = SpectralField.from_values(grid32, f.values * g.values)
        padded = padded_product(f, g)
        assert (padded - direct).l2_norm() <= 1e-12 * direct.l2_norm()


class TestCheckpoint:
    def test_round_trip(self, grid32, rng, tmp_path):
        fields = [random_field(grid32, rng) for _ in range(4)]
        path = tmp_path / "state.ckpt"
        write_checkpoint(path, fields, time=0.375, epsilon=0.25)
        back, time, eps = read_checkpoint(path)
        assert time == 0.375 and eps == 0.25
        assert len(back) == 4
        for a, b in zip(fields, back):
            assert np.array_equal(a.values, b.values)

    def test_layout_x1_fastest(self, grid32, tmp_path):
        # f(x) = x1 index: consecutive on-disk samples vary in x1
        vals = np.broadcast_to(np.arange(32).reshape(32, 1, 1), grid32.shape).astype(float)
        f = SpectralField.from_values(grid32, vals.copy())
        path = tmp_path / "layout.ckpt"
        write_checkpoint(path, [f], time=0.0, epsilon=1.0)
        raw = np.fromfile(path, dtype="<f8", offset=32)
        assert np.array_equal(raw[:32], np.arange(32, dtype=float))

    def test_header_magic(self, grid32, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 60)
        with pytest.raises(CheckpointError):
            read_checkpoint(path)
