"""Tests for the canonical coherence solver and the (lagged) wavelet coherence fields."""

import numpy as np
import pytest

from cancoh import (
    CancohConfig,
    cancoh_at,
    causal_wavecancoh,
    direct_eigen_cancoh,
    regularized_lws,
    scale_means,
    wavecancoh,
    wavecancoh_panel,
)
from errors import ConditioningError, InvalidDataError, LagTooLargeError, ScaleOutOfRangeError, ValidationError
from lws import estimate_lws, partition, regularize
from panel import TimeSeriesPanel
from simulate import simulate_mvlsw, true_cancoh_from_spec
from wavelets import build_system


def random_blocks(rng, random_spd, P, Q):
    S = random_spd(rng, P + Q)
    return S[:P, :P], S[:P, P:], S[P:, :P], S[P:, P:]


class TestCancohAt:
    @pytest.fixture(autouse=True)
    def setup_rng(self):
        self.rng = np.random.default_rng(42)

    def test_uncorrelated_groups(self):
        point = cancoh_at(np.eye(3), np.zeros((3, 2)), np.zeros((2, 3)), np.eye(2))
        assert point.rho == 0.0
        assert point.rho_raw == pytest.approx(0.0, abs=1e-15)

    def test_scalar_groups(self):
        point = cancoh_at(np.array([[1.0]]), np.array([[0.5]]), np.array([[0.5]]), np.array([[1.0]]))
        assert point.rho == pytest.approx(0.25, abs=1e-12)
        np.testing.assert_allclose(point.a, [1.0])
        np.testing.assert_allclose(point.b, [1.0])
        assert not point.degenerate

    @pytest.mark.parametrize("u", [0.25, 0.75])
    def test_population_oracle(self, c1_spec, u):
        point = cancoh_at(*c1_spec.blocks(2, u))
        assert point.rho_raw == pytest.approx(true_cancoh_from_spec(c1_spec, 2, u), abs=1e-10)
        assert 0.0 < point.rho < 1.0

    def test_shared_eigenvalues(self, random_spd):
        for _ in range(200):
            P, Q = self.rng.integers(1, 9, size=2)
            blocks = random_blocks(self.rng, random_spd, P, Q)
            direct = direct_eigen_cancoh(*blocks)
            assert direct.lambda_a == pytest.approx(direct.lambda_b, abs=1e-8)
            assert cancoh_at(*blocks).rho_raw == pytest.approx(direct.lambda_a, abs=1e-8)

    def test_directions_match_eigenvectors(self, random_spd):
        for _ in range(20):
            P, Q = self.rng.integers(2, 6, size=2)
            blocks = random_blocks(self.rng, random_spd, P, Q)
            point = cancoh_at(*blocks)
            if point.spectrum[0] - point.spectrum[1] < 1e-3:
                continue
            direct = direct_eigen_cancoh(*blocks)
            np.testing.assert_allclose(point.a, direct.a, atol=1e-7)
            np.testing.assert_allclose(point.b, direct.b, atol=1e-7)

    def test_normalization(self, random_spd):
        for _ in range(50):
            P, Q = self.rng.integers(1, 6, size=2)
            S_xx, S_xy, S_yx, S_yy = random_blocks(self.rng, random_spd, P, Q)
            point = cancoh_at(S_xx, S_xy, S_yx, S_yy)
            assert point.a @ S_xx @ point.a == pytest.approx(1.0, abs=1e-8)
            assert point.b @ S_yy @ point.b == pytest.approx(1.0, abs=1e-8)
            assert abs(point.a @ S_xy @ point.b) == pytest.approx(np.sqrt(point.rho_raw), abs=1e-8)

    def test_invariant_under_invertible_maps(self, random_spd):
        for _ in range(50):
            P, Q = self.rng.integers(1, 6, size=2)
            S_xx, S_xy, S_yx, S_yy = random_blocks(self.rng, random_spd, P, Q)
            A = self.rng.standard_normal((P, P)) + 3.0 * np.eye(P)
            B = self.rng.standard_normal((Q, Q)) + 3.0 * np.eye(Q)
            mapped = cancoh_at(A @ S_xx @ A.T, A @ S_xy @ B.T, B @ S_yx @ A.T, B @ S_yy @ B.T)
            assert mapped.rho_raw == pytest.approx(cancoh_at(S_xx, S_xy, S_yx, S_yy).rho_raw, abs=1e-8)

    def test_argument_symmetry(self, random_spd):
        for _ in range(50):
            P, Q = self.rng.integers(1, 6, size=2)
            S_xx, S_xy, S_yx, S_yy = random_blocks(self.rng, random_spd, P, Q)
            forward = cancoh_at(S_xx, S_xy, S_yx, S_yy)
            backward = cancoh_at(S_yy, S_yx, S_xy, S_xx)
            assert forward.rho_raw == pytest.approx(backward.rho_raw, abs=1e-10)

    def test_spectrum_is_decreasing(self, random_spd):
        point = cancoh_at(*random_blocks(self.rng, random_spd, 4, 3))
        assert len(point.spectrum) == 3
        assert np.all(np.diff(point.spectrum) <= 0)
        assert point.spectrum[0] == point.rho_raw

    def test_identical_groups_are_degenerate(self, random_spd):
        S = random_spd(self.rng, 3)
        point = cancoh_at(S, S, S, S)
        assert point.rho == pytest.approx(1.0, abs=1e-10)
        assert point.degenerate

    def test_sign_convention(self, random_spd):
        for _ in range(20):
            point = cancoh_at(*random_blocks(self.rng, random_spd, 4, 3))
            assert point.a[np.argmax(np.abs(point.a))] > 0
            assert point.b[np.argmax(np.abs(point.b))] > 0

    def test_cross_blocks_must_transpose(self):
        with pytest.raises(ValidationError):
            cancoh_at(np.eye(2), np.ones((2, 2)), np.zeros((2, 2)), np.eye(2))

    def test_inconsistent_shapes(self):
        with pytest.raises(ValidationError):
            cancoh_at(np.eye(3), np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2))

    def test_not_positive_definite(self):
        with pytest.raises(ConditioningError):
            cancoh_at(np.diag([1.0, -1.0]), np.zeros((2, 1)), np.zeros((1, 2)), np.eye(1))


class TestCancohConfig:
    def test_resolve_defaults(self):
        resolved = CancohConfig().resolve(1024)
        assert resolved.num_scales == 10
        assert resolved.half_width == 64
        assert resolved.scales == (1, 2, 3, 4, 5, 6, 7)

    def test_explicit_scales_sorted(self):
        assert CancohConfig(scales=(3, 1, 3)).resolve(256).scales == (1, 3)

    def test_scales_beyond_J(self):
        with pytest.raises(ScaleOutOfRangeError):
            CancohConfig(scales=(11,)).resolve(1024)

    def test_invalid_values(self):
        with pytest.raises(ValidationError):
            CancohConfig(half_width=-1).validate()
        with pytest.raises(ValidationError):
            CancohConfig(family="coif3").validate()
        with pytest.raises(ValidationError):
            CancohConfig(epsilon=-0.1).validate()
        with pytest.raises(ValidationError):
            CancohConfig(noise_floor=-1.0).validate()

    def test_noise_floor_carried_through_resolve(self):
        assert CancohConfig(noise_floor=2.5).resolve(256).noise_floor == 2.5
        assert CancohConfig().resolve(256).noise_floor == 1.0


class TestWaveCanCoh:
    @pytest.fixture(autouse=True)
    def setup_rng(self):
        self.rng = np.random.default_rng(42)

    @pytest.fixture
    def panel(self, c1_spec, haar_system):
        # white noise on top keeps every scale of the spectrum away from zero
        values = simulate_mvlsw(c1_spec, 512, haar_system, seed=11).panel.values
        return TimeSeriesPanel(values + self.rng.standard_normal(values.shape), 6)

    def test_field_layout(self, panel):
        field = wavecancoh(panel.X, panel.Y, CancohConfig(scales=(1, 2)))
        assert field.scales == (1, 2)
        assert field.rho.shape == (2, 512)
        assert field.a.shape == (2, 512, 6)
        assert field.b.shape == (2, 512, 4)
        np.testing.assert_array_equal(field.k, np.arange(512))
        np.testing.assert_allclose(field.u, np.arange(512) / 512)
        assert field.metadata["method"] == "wavecancoh"
        assert field.metadata["M"] == int(np.ceil(512**0.7 / 2))

    def test_structural_invariants(self, panel):
        field = wavecancoh(panel.X, panel.Y, CancohConfig(scales=(2,)))
        assert np.all((field.rho >= 0.0) & (field.rho <= 1.0))
        # unit quadratic forms against the regularized spectral blocks
        estimate, _ = regularized_lws(TimeSeriesPanel.fuse(panel.X, panel.Y), CancohConfig(scales=(2,)))
        S_xx, _, _, S_yy = partition(estimate.matrices(2), 6)
        a, b = field.a[0], field.b[0]
        np.testing.assert_allclose(np.einsum("ki,kij,kj->k", a, S_xx, a), 1.0, atol=1e-8)
        np.testing.assert_allclose(np.einsum("ki,kij,kj->k", b, S_yy, b), 1.0, atol=1e-8)

    def test_sign_convention(self, panel):
        field = wavecancoh(panel.X, panel.Y, CancohConfig(scales=(2,)))
        lead = np.take_along_axis(field.a[0], np.argmax(np.abs(field.a[0]), axis=-1)[:, None], axis=-1)
        assert np.all(lead > 0)

    def test_point_accessor(self, panel):
        field = wavecancoh(panel.X, panel.Y, CancohConfig(scales=(2,)))
        point = field.point(2, 100)
        assert point.rho == field.rho[0, 100]
        np.testing.assert_array_equal(point.a, field.a[0, 100])
        with pytest.raises(ScaleOutOfRangeError):
            field.curve(1)

    def test_lag_zero_is_bitwise_identical(self, panel):
        config = CancohConfig(scales=(1, 2))
        plain = wavecancoh(panel.X, panel.Y, config)
        lagged = causal_wavecancoh(panel.X, panel.Y, 0, config)
        np.testing.assert_array_equal(plain.rho, lagged.rho)
        np.testing.assert_array_equal(plain.a, lagged.a)
        np.testing.assert_array_equal(plain.b, lagged.b)

    def test_lagged_grid(self, panel):
        field = causal_wavecancoh(panel.X, panel.Y, 12, CancohConfig(scales=(2,)))
        np.testing.assert_array_equal(field.k, np.arange(500))
        assert field.T == 512
        assert field.metadata["lag"] == 12

    def test_panel_timing_carried(self, panel):
        timed = TimeSeriesPanel(panel.values, panel.P, fs=100.0, origin=-2.0)
        field = wavecancoh_panel(timed, CancohConfig(scales=(2,)))
        assert field.times()[0] == -2.0
        assert field.times()[100] == pytest.approx(-1.0)

    def test_scale_means(self, panel):
        field = wavecancoh(panel.X, panel.Y, CancohConfig(scales=(1, 2)))
        means = scale_means(field)
        assert means == pytest.approx([field.rho[0].mean(), field.rho[1].mean()])

    def test_permuted_copy_is_fully_coherent(self):
        X = self.rng.standard_normal((1024, 3))
        Y = X[:, [2, 0, 1]]
        field = wavecancoh(X, Y)
        interior = (field.u >= 0.1) & (field.u <= 0.9)
        assert field.scales == (1, 2, 3, 4, 5, 6, 7)
        assert field.rho[:, interior].min() >= 0.99
        assert field.metadata["noise_floor"] == 1.0

    def test_disabled_noise_floor_leaves_only_the_epsilon_floor(self, panel):
        fused = TimeSeriesPanel.fuse(panel.X, panel.Y)
        estimate, resolved = regularized_lws(fused, CancohConfig(scales=(1, 2), noise_floor=0.0))
        raw = estimate_lws(fused, build_system("haar", resolved.num_scales), resolved.half_width)
        expected = regularize(raw, scales=(1, 2))
        np.testing.assert_array_equal(estimate.values, expected.values)
        np.testing.assert_array_equal(estimate.floored, expected.floored)

    def test_zero_panel_is_ill_conditioned(self):
        with pytest.raises(ConditioningError) as info:
            wavecancoh(np.zeros((64, 2)), np.zeros((64, 2)), CancohConfig(scales=(1, 2)))
        assert info.value.scale == 1
        assert info.value.k == 0

    def test_invalid_inputs(self):
        with pytest.raises(InvalidDataError):
            wavecancoh(np.zeros((64, 2)), np.zeros((63, 2)))
        with pytest.raises(LagTooLargeError):
            causal_wavecancoh(self.rng.standard_normal((64, 2)), self.rng.standard_normal((64, 2)), 64)

    def test_shifted_copy_peaks_at_true_lag(self):
        hits = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            T, delay = 512, 10
            base = rng.standard_normal((T + delay, 2))
            X = base[delay:]
            Y = base[:T] + 0.3 * rng.standard_normal((T, 2))
            config = CancohConfig(scales=(1, 2))
            means = []
            for h in (0, 10, 20):
                field = causal_wavecancoh(X, Y, h, config)
                interior = (field.u >= 0.1) & (field.u <= 0.8)
                means.append(field.rho[:, interior].mean())
            hits += int(np.argmax(means) == 1)
        assert hits >= 18


@pytest.mark.slow
def test_independent_white_noise_stays_near_zero():
    """Time-median coherence of independent bivariate white noise at T = 4096, default M."""
    T, reps = 4096, 50
    medians = []
    for seed in range(reps):
        rng = np.random.default_rng(seed)
        field = wavecancoh(rng.standard_normal((T, 1)), rng.standard_normal((T, 1)))
        medians.append(np.median(field.rho, axis=1))
    medians = np.mean(medians, axis=0)
    assert field.scales == tuple(range(1, 10))
    assert np.all(medians[:6] < 0.3)
    # scales 7-9 keep fewer than ten effective observations per window
    assert np.all(medians[6:] < 0.8)


@pytest.mark.slow
def test_lifted_spectrum_never_reaches_full_coherence_on_noise():
    T, reps = 4096, 10
    for seed in range(reps):
        rng = np.random.default_rng(seed)
        X, Y = rng.standard_normal((T, 2)), rng.standard_normal((T, 2))
        field = wavecancoh(X, Y, CancohConfig(scales=(1, 2, 3, 4)))
        assert np.all(np.median(field.rho, axis=1) < 0.3)
        assert field.rho.max() < 0.9
