import numpy as np
import pytest

from wavessm.errors import Overflow, Singular
from wavessm.frames import analyze, build_frame, make_frame
from wavessm.models import FAMILIES, FrameSpec, Grid, Measure, SsmPair
from wavessm.safari import derive, legs_oracle
from wavessm.ssm import (
    bilinear_discretize, check_bounded, convolve_kernel, decode_state, decode_times, jacobian, kernel,
    locality_profile, run, sample_delta,
)


def _pair(A, B, measure=None):
    return SsmPair(A=np.atleast_2d(A), B=np.atleast_1d(B), measure=measure or Measure.scaled())


class TestBilinear:

    def test_zero_matrix(self):
        ssm = bilinear_discretize(_pair(np.zeros((2, 2)), [1.0, 2.0]), delta=0.1)
        np.testing.assert_allclose(ssm.Abar, np.eye(2))
        np.testing.assert_allclose(ssm.Bbar, [0.1, 0.2])

    def test_scalar(self):
        ssm = bilinear_discretize(_pair([[1.0]], [1.0]), delta=2.0)
        np.testing.assert_allclose(ssm.Abar, [[0.0]], atol=1e-15)
        np.testing.assert_allclose(ssm.Bbar, [1.0])

    def test_singular_resolvent(self):
        with pytest.raises(Singular):
            bilinear_discretize(_pair(-20.0 * np.eye(2), [1.0, 1.0]), delta=0.1)

    def test_legs_is_stable(self):
        assert bilinear_discretize(legs_oracle(8), delta=0.01).spectral_radius < 1

    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("measure", [Measure.scaled(), Measure.translated(1.0)], ids=["scaled", "translated"])
    def test_derived_pairs_are_stable(self, family, measure):
        T = 256
        pair = derive(make_frame(FrameSpec(family, 32, T)), measure)
        assert np.all(np.linalg.eigvals(pair.A).real >= -1e-8)
        assert bilinear_discretize(pair, delta=1 / (T - 1)).spectral_radius <= 1 + 1e-8

    def test_sampled_delta(self):
        ssm = bilinear_discretize(legs_oracle(4), seed=3)
        assert 1e-3 <= ssm.delta <= 1e-1
        assert ssm.delta == sample_delta(3)
        assert sample_delta(3) != sample_delta(4)

    def test_translated_divides_by_theta(self):
        A = np.array([[2.0, 1.0], [0.0, 3.0]])
        B = np.array([1.0, -1.0])
        wide = bilinear_discretize(_pair(A, B, Measure.translated(2.0)), delta=0.05)
        plain = bilinear_discretize(_pair(A / 2, B / 2), delta=0.05)
        np.testing.assert_allclose(wide.Abar, plain.Abar, atol=1e-14)
        np.testing.assert_allclose(wide.Bbar, plain.Bbar, atol=1e-14)


class TestRun:

    @pytest.fixture
    def legs(self):
        return bilinear_discretize(legs_oracle(6), delta=0.02)

    def test_zero_input(self, legs):
        states, h = run(legs, np.zeros(50))
        assert np.all(states == 0) and np.all(h == 0)

    def test_impulse_matches_jacobian(self, legs):
        u = np.zeros(40)
        u[0] = 1.0
        _, h = run(legs, u)
        np.testing.assert_allclose(h, jacobian(legs, 40).G[:, 0], atol=1e-12)

    def test_superposition(self, legs, rng):
        u, v = rng.standard_normal(64), rng.standard_normal(64)
        _, hu = run(legs, u)
        _, hv = run(legs, v)
        _, hw = run(legs, 2 * u - 3 * v)
        np.testing.assert_allclose(hw, 2 * hu - 3 * hv, atol=1e-10)

    def test_time_shift(self, legs, rng):
        u = rng.standard_normal(32)
        states, _ = run(legs, u)
        shifted, _ = run(legs, np.concatenate([np.zeros(5), u]))
        np.testing.assert_allclose(shifted[5:], states, atol=1e-12)

    def test_overflow(self):
        ssm = bilinear_discretize(_pair([[-1.0]], [1.0]), delta=1.0)
        u = np.zeros(100)
        u[0] = 1.0
        with pytest.raises(Overflow) as info:
            run(ssm, u)
        assert 0 < info.value.step < 100

    def test_check_bounded(self):
        rows = np.ones((5, 2))
        assert check_bounded(rows) is not None
        rows[3, 1] = 2e12
        rows[4, 0] = np.nan
        with pytest.raises(Overflow) as info:
            check_bounded(rows)
        assert info.value.step == 3


class TestKernel:

    def test_first_tap_is_input_matrix(self):
        ssm = bilinear_discretize(legs_oracle(4), delta=0.05)
        np.testing.assert_allclose(kernel(ssm, 10).K[0], ssm.Bbar)

    def test_diagonal_powers(self):
        ssm = bilinear_discretize(_pair(np.diag([1.0, 2.0]), [1.0, 1.0]), delta=0.1)
        K = kernel(ssm, 5).K
        d = np.diag(ssm.Abar)
        np.testing.assert_allclose(K, np.stack([d ** l * ssm.Bbar for l in range(5)]), atol=1e-14)

    def test_convolution_equals_recurrence(self, rng):
        ssm = bilinear_discretize(legs_oracle(8), delta=0.01)
        K = kernel(ssm, 256)
        for _ in range(10):
            u = rng.standard_normal(256)
            states, _ = run(ssm, u)
            y = convolve_kernel(K, u)
            np.testing.assert_allclose(y, states, rtol=1e-8, atol=1e-8 * np.abs(states).max())

    def test_output_matrix(self):
        ssm = bilinear_discretize(legs_oracle(4), delta=0.05)
        C = np.ones((1, 4))
        K = kernel(ssm, 6, C=C).K
        np.testing.assert_allclose(K[:, 0], kernel(ssm, 6).K.sum(axis=1))

    def test_adaptive_has_no_kernel(self):
        ssm = bilinear_discretize(legs_oracle(4), mode="scaled_adaptive")
        with pytest.raises(ValueError):
            kernel(ssm, 8)


class TestJacobian:

    @staticmethod
    def _finite_difference(ssm, T, rng, eps=1e-6):
        u = rng.standard_normal(T)
        _, base = run(ssm, u)
        G = np.empty((ssm.N, T))
        for t in range(T):
            bumped = u.copy()
            bumped[t] += eps
            G[:, t] = (run(ssm, bumped)[1] - base) / eps
        return G

    def test_single_step(self):
        ssm = bilinear_discretize(legs_oracle(3), delta=0.1)
        np.testing.assert_allclose(jacobian(ssm, 1).G[:, 0], ssm.Bbar)

    def test_last_column_is_input_matrix(self):
        ssm = bilinear_discretize(legs_oracle(5), delta=0.1)
        assert np.array_equal(jacobian(ssm, 30).G[:, -1], ssm.Bbar)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_finite_differences(self, family, rng):
        T = 256
        frame = make_frame(FrameSpec(family, 32, T))
        ssm = bilinear_discretize(derive(frame, Measure.translated(1.0)), delta=1 / (T - 1))
        G = jacobian(ssm, T).G
        fd = self._finite_difference(ssm, T, rng)
        np.testing.assert_allclose(fd, G, atol=1e-5 * max(1.0, np.abs(G).max()))

    def test_adaptive_finite_differences(self, rng):
        ssm = bilinear_discretize(legs_oracle(6), mode="scaled_adaptive")
        G = jacobian(ssm, 64).G
        np.testing.assert_allclose(self._finite_difference(ssm, 64, rng), G, atol=1e-5)


class TestDecode:

    def test_row_span_round_trip(self, tight_frames, rng):
        frame = tight_frames["morlet"]
        f = frame.F.T @ rng.standard_normal(frame.N)
        decoded = decode_state(analyze(frame, f), frame)
        np.testing.assert_allclose(decoded, f, atol=1e-6 * np.abs(f).max())

    def test_zero_state(self, tight_frames):
        frame = tight_frames["legendre"]
        np.testing.assert_array_equal(decode_state(np.zeros(frame.N), frame), 0.0)

    def test_state_size_checked(self, tight_frames):
        with pytest.raises(ValueError):
            decode_state(np.zeros(3), tight_frames["morlet"])

    def test_times(self):
        grid = Grid(5)
        np.testing.assert_allclose(decode_times(grid, Measure.scaled(), 2.0), [0, 0.5, 1, 1.5, 2])
        np.testing.assert_allclose(decode_times(grid, Measure.translated(0.5), 2.0), [1.5, 1.625, 1.75, 1.875, 2])


class TestScaledAdaptive:

    def test_constant_input_settles_on_first_state(self):
        ssm = bilinear_discretize(legs_oracle(8), mode="scaled_adaptive")
        _, h = run(ssm, np.ones(4096))
        expected = np.eye(8)[0]
        assert np.linalg.norm(h - expected) <= 0.05

    def test_legs_remembers_smooth_history(self):
        T = 1024
        frame = build_frame(FrameSpec("legendre", 64, T, tighten=False))
        ssm = bilinear_discretize(derive(frame, Measure.scaled()), mode="scaled_adaptive")
        t = Grid(T).t
        u = np.sin(2 * np.pi * 2 * t) + 0.5 * np.cos(2 * np.pi * 3 * t)
        _, h = run(ssm, u)
        decoded = decode_state(h, frame)
        assert np.linalg.norm(decoded - u) <= 0.1 * np.linalg.norm(u)


class TestLocality:

    def test_single_spike(self):
        G = np.zeros((2, 10))
        G[0, 3] = 1.0
        G[1, 9] = -2.0
        widths, mean = locality_profile(G)
        np.testing.assert_array_equal(widths, [1, 1])
        assert mean == 1.0

    def test_uniform_row(self):
        widths, _ = locality_profile(np.ones((1, 10)))
        assert widths[0] == 9

    def test_zero_row(self):
        widths, _ = locality_profile(np.zeros((1, 5)))
        assert widths[0] == 0

    def test_morlet_is_more_local_than_legendre(self):
        T = 2048
        means = {}
        for family in ("morlet", "legendre"):
            frame = make_frame(FrameSpec(family, 64, T))
            ssm = bilinear_discretize(derive(frame, Measure.translated(1.0)), delta=1 / (T - 1))
            means[family] = locality_profile(jacobian(ssm, T))[1]
        assert means["morlet"] < means["legendre"]

    def test_scaled_morlet_is_more_local_than_legendre(self):
        T = 1024
        means = {}
        for family in ("morlet", "legendre"):
            frame = make_frame(FrameSpec(family, 100, T))
            ssm = bilinear_discretize(derive(frame, Measure.scaled()), mode="scaled_adaptive")
            means[family] = locality_profile(jacobian(ssm, T))[1]
        assert means["morlet"] < means["legendre"]

    def test_distinct_peaks(self):
        T = 512
        frame = build_frame(FrameSpec("morlet", 64, T, tighten=False))
        ssm = bilinear_discretize(derive(frame, Measure.translated(1.0)), delta=1 / (T - 1))
        peaks = np.argmax(np.abs(jacobian(ssm, T).G), axis=1)
        assert np.unique(peaks).size >= 32
