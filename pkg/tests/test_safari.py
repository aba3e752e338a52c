import logging

import numpy as np
import pytest
from scipy.special import roots_legendre

from wavessm.frames import build_frame, legendre_basis, make_frame, restore_amplitudes
from wavessm.models import FAMILIES, FrameMatrix, FrameSpec, Grid, Measure
from wavessm.numerics import spectral_norm
from wavessm.safari import (
    derive, derive_scaled, derive_translated, dual_frame, legs_oracle, project_derivative, row_derivative,
)


def _custom_frame(F, family="morlet"):
    F = np.atleast_2d(F)
    n, L = F.shape
    zeros = np.zeros(n)
    return FrameMatrix(
        F=F, grid=Grid(L), spec=FrameSpec(family, n, L), scales=zeros, centers=zeros,
        omegas=zeros, row_norms=np.ones(n), unit_norm=False,
    )


def _legendre(N, L):
    return restore_amplitudes(build_frame(FrameSpec("legendre", N, L, tighten=False)))


class TestRowDerivative:

    def test_numeric_sine(self):
        t = Grid(2048).t
        frame = _custom_frame(np.sin(2 * np.pi * t))
        expected = 2 * np.pi * np.cos(2 * np.pi * t)
        assert np.max(np.abs(row_derivative(frame)[0] - expected)) <= 1e-4

    def test_constant_row(self):
        frame = _custom_frame(np.ones(64))
        np.testing.assert_allclose(row_derivative(frame), 0.0, atol=1e-12)

    def test_analytic_legendre(self, legendre8):
        np.testing.assert_allclose(row_derivative(legendre8)[1], 2 * np.sqrt(3), rtol=1e-12)


class TestDual:

    def test_tight_frame_is_self_dual(self, tight_frames):
        frame = tight_frames["morlet"]
        np.testing.assert_allclose(dual_frame(frame).F_dual, frame.F, atol=1e-8)

    def test_scaled_orthonormal_rows(self, rng):
        grid = Grid(64)
        root = np.sqrt(grid.weights / grid.dt)
        Q, _ = np.linalg.qr(rng.standard_normal((64, 4)))
        rows = Q.T / root
        c = np.array([1.0, 2.0, 0.5, 3.0])
        frame = _custom_frame(rows * c[:, None])
        np.testing.assert_allclose(dual_frame(frame).F_dual, rows / c[:, None], atol=1e-10)

    def test_reconstructs_row_span(self, rng):
        F = rng.standard_normal((8, 64))
        frame = _custom_frame(F)
        w = frame.grid.weights / frame.grid.dt
        a = rng.standard_normal(8)
        f = F.T @ a
        coeffs = dual_frame(frame).F_dual @ (w * f)
        np.testing.assert_allclose(F.T @ coeffs, f, atol=1e-9)

    def test_weighted_dual_is_rescaled_plain_dual(self, tight_frames):
        frame = tight_frames["mexhat"]
        np.testing.assert_allclose(
            dual_frame(frame, weighted=True).F_dual * frame.grid.dt, dual_frame(frame).F_dual, atol=1e-10,
        )

    def test_weighted_biorthogonal(self, tight_frames):
        frame = tight_frames["gauss_deriv"]
        dual = dual_frame(frame, weighted=True)
        assert dual.weighted
        np.testing.assert_allclose((frame.F * frame.grid.weights) @ dual.F_dual.T, np.eye(frame.N), atol=1e-8)


class TestProjection:

    def test_zero_derivative(self, tight_frames):
        frame = tight_frames["morlet"]
        np.testing.assert_allclose(project_derivative(np.zeros_like(frame.F), frame), 0.0, atol=1e-14)

    def test_self_projection(self, rng):
        frame = _custom_frame(rng.standard_normal((6, 50)))
        np.testing.assert_allclose(project_derivative(frame.F, frame), np.eye(6), atol=1e-10)

    def test_matches_closed_form(self, rng):
        F = rng.standard_normal((5, 40))
        Fdot = rng.standard_normal((5, 40))
        frame = _custom_frame(F)
        w = frame.grid.weights / frame.grid.dt
        expected = (Fdot * w) @ F.T @ np.linalg.inv((F * w) @ F.T)
        np.testing.assert_allclose(project_derivative(Fdot, frame), expected, rtol=1e-9, atol=1e-9)

    def test_interior_rows_use_plain_gram(self, rng):
        F = np.zeros((3, 40))
        F[:, 5:35] = rng.standard_normal((3, 30))
        Fdot = np.zeros((3, 40))
        Fdot[:, 5:35] = rng.standard_normal((3, 30))
        expected = Fdot @ F.T @ np.linalg.inv(F @ F.T)
        np.testing.assert_allclose(project_derivative(Fdot, _custom_frame(F)), expected, rtol=1e-9, atol=1e-9)

    def test_norm_bound(self, rng):
        F = rng.standard_normal((5, 40))
        Fdot = rng.standard_normal((5, 40))
        frame = _custom_frame(F)
        w = frame.grid.weights / frame.grid.dt
        X = project_derivative(Fdot, frame)
        lam_min = np.linalg.eigvalsh((F * w) @ F.T)[0]
        assert spectral_norm(X) <= np.linalg.norm((Fdot * w) @ F.T, 2) / lam_min * (1 + 1e-6)


class TestScaled:

    def test_legs_oracle(self, legendre8):
        pair = derive_scaled(legendre8)
        oracle = legs_oracle(8)
        np.testing.assert_allclose(pair.A, oracle.A, atol=1e-6)
        np.testing.assert_allclose(pair.B, np.sqrt(2 * np.arange(8) + 1), atol=1e-8)
        assert pair.measure == Measure.scaled()

    def test_oracle_shape(self):
        A = legs_oracle(3).A
        r3, r5, r15 = np.sqrt(3), np.sqrt(5), np.sqrt(15)
        np.testing.assert_allclose(A, [[1, 0, 0], [r3, 2, 0], [r5, r15, 3]], atol=1e-14)

    def test_single_constant_atom(self):
        frame = _legendre(1, 256)
        pair = derive_scaled(frame)
        np.testing.assert_allclose(pair.A, [[1.0]], atol=1e-12)
        np.testing.assert_allclose(pair.B, frame.F[:, -1])

    def test_tightened_legendre_matches_oracle(self):
        frame = make_frame(FrameSpec("legendre", 8, 8192))
        pair = derive_scaled(frame)
        np.testing.assert_allclose(pair.A, legs_oracle(8).A, atol=1e-6)
        # tightened rows are the L2(0,1) basis scaled by sqrt(dt)
        np.testing.assert_allclose(pair.B / np.sqrt(frame.grid.dt), legs_oracle(8).B, atol=1e-6)


class TestTranslated:

    @staticmethod
    def _quadrature_oracle(N):
        nodes, weights = roots_legendre(40)
        t = (nodes + 1) / 2
        w = weights / 2
        rows, deriv = legendre_basis(N, t, derivative=True)
        at_zero = legendre_basis(N, np.array([0.0]))[:, 0]
        return (deriv * w) @ rows.T + np.outer(at_zero, at_zero)

    def test_two_state_oracle(self):
        pair = derive_translated(_legendre(2, 2048))
        r3 = np.sqrt(3)
        np.testing.assert_allclose(pair.A, [[1, -r3], [r3, 3]], atol=1e-6)

    def test_quadrature_oracle(self):
        pair = derive_translated(_legendre(4, 2048))
        np.testing.assert_allclose(pair.A, self._quadrature_oracle(4), atol=1e-6)
        np.testing.assert_allclose(pair.B, np.sqrt(2 * np.arange(4) + 1), atol=1e-10)

    def test_single_constant_atom(self):
        pair = derive_translated(_legendre(1, 512))
        np.testing.assert_allclose(pair.A, [[1.0]], atol=1e-9)
        np.testing.assert_allclose(pair.B, [1.0], atol=1e-12)

    def test_theta_recorded(self, tight_frames):
        pair = derive(tight_frames["morlet"], Measure.translated(0.5))
        assert pair.measure.theta == 0.5


class TestEveryFamily:

    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("kind", ["scaled", "translated"])
    @pytest.mark.parametrize("N", [16, 64])
    def test_derives_within_bound(self, family, kind, N):
        frame = make_frame(FrameSpec(family, N, 2048))
        measure = Measure.scaled() if kind == "scaled" else Measure.translated(1.0)
        pair = derive(frame, measure)
        assert pair.A.shape == (N, N)
        assert np.all(np.isfinite(pair.A))

    @pytest.mark.slow
    @pytest.mark.parametrize("family", FAMILIES)
    def test_derives_at_128(self, family):
        frame = make_frame(FrameSpec(family, 128, 2048))
        for measure in (Measure.scaled(), Measure.translated(1.0)):
            assert np.all(np.isfinite(derive(frame, measure).A))

    def test_numeric_families_warn(self, tight_frames, caplog, monkeypatch):
        monkeypatch.setattr(logging.getLogger("wavessm"), "propagate", True)
        with caplog.at_level(logging.WARNING, logger="wavessm"):
            derive(tight_frames["db6"], Measure.scaled())
        assert "no closed-form derivative" in caplog.text
