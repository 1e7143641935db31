"""Tests for the non-decimated wavelet systems, the NDWT and the scale/band mapping."""

import numpy as np
import pytest

from errors import (
    InsufficientLengthError,
    InvalidDataError,
    InvalidLengthError,
    ScaleOutOfRangeError,
    ScaleOverflowError,
    UnsupportedFamilyError,
    ValidationError,
)
from panel import TimeSeriesPanel
from wavelets import (
    autocorrelation_wavelet,
    build_system,
    default_num_scales,
    dwt_pyramid,
    ndwt,
    scale_to_band,
    support_length,
)


class TestWaveletSystem:
    def test_haar_gram_entries(self):
        system = build_system("haar", 3)
        assert system.gram[0, 0] == pytest.approx(1.5)
        assert system.gram[1, 1] == pytest.approx(1.75)
        assert system.gram[0, 1] == pytest.approx(system.gram[1, 0])

    @pytest.mark.parametrize("family", ["haar", "db2"])
    @pytest.mark.parametrize("J", [1, 3, 6, 10])
    def test_gram_inverse_residual(self, family, J):
        system = build_system(family, J)
        residual = np.max(np.abs(system.gram @ system.gram_inv - np.eye(J)))
        assert residual < 1e-10

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_gram_matches_cross_correlation_energy(self, family):
        # sum_tau Psi_j Psi_l equals the energy of the cross-correlation of psi_j and psi_l
        system = build_system(family, 4)
        for j in range(4):
            for l in range(4):
                cross = np.correlate(system.psi[j], system.psi[l], mode="full")
                assert system.gram[j, l] == pytest.approx(np.sum(cross**2), rel=1e-10)

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_discrete_wavelets_unit_norm_zero_mean(self, family):
        system = build_system(family, 5)
        for j, psi in enumerate(system.psi, start=1):
            assert len(psi) == support_length(system.filter.length, j)
            assert np.sum(psi**2) == pytest.approx(1.0, abs=1e-12)
            assert np.sum(psi) == pytest.approx(0.0, abs=1e-12)

    def test_haar_autocorrelation_wavelet(self):
        system = build_system("haar", 2)
        lags, values = autocorrelation_wavelet(system, 1)
        np.testing.assert_array_equal(lags, [-1, 0, 1])
        np.testing.assert_allclose(values, [-0.5, 1.0, -0.5], atol=1e-12)

        lags, values = autocorrelation_wavelet(system, 2)
        np.testing.assert_array_equal(lags, np.arange(-3, 4))
        np.testing.assert_allclose(values, [-0.25, -0.5, 0.25, 1.0, 0.25, -0.5, -0.25], atol=1e-12)

    def test_autocorrelation_wavelet_symmetric(self):
        system = build_system("db2", 4)
        for j in range(1, 5):
            _, values = autocorrelation_wavelet(system, j)
            np.testing.assert_allclose(values, values[::-1], atol=1e-12)

    def test_system_is_cached_and_read_only(self):
        system = build_system("haar", 3)
        assert build_system("haar", 3) is system
        with pytest.raises(ValueError):
            system.gram[0, 0] = 0.0

    def test_unsupported_family(self):
        with pytest.raises(UnsupportedFamilyError):
            build_system("sym8", 3)

    def test_scale_overflow(self):
        with pytest.raises(ScaleOverflowError):
            build_system("haar", 15)

    def test_invalid_scale_count(self):
        with pytest.raises(ValidationError):
            build_system("haar", 0)

    def test_scale_out_of_range(self):
        with pytest.raises(ScaleOutOfRangeError):
            autocorrelation_wavelet(build_system("haar", 2), 3)

    def test_default_num_scales(self):
        assert default_num_scales(1024) == 10
        assert default_num_scales(1000) == 9
        assert default_num_scales(3) == 1
        assert default_num_scales(2**20) == 14


class TestNdwt:
    @pytest.fixture(autouse=True)
    def setup_rng(self):
        self.rng = np.random.default_rng(42)

    def test_output_shape(self):
        system = build_system("haar", 4)
        panel = TimeSeriesPanel(self.rng.standard_normal((64, 3)), 1)
        assert ndwt(panel, system).shape == (4, 64, 3)

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_linearity(self, family):
        system = build_system(family, 4)
        for _ in range(100):
            first = self.rng.standard_normal((64, 3))
            second = self.rng.standard_normal((64, 3))
            alpha, beta = self.rng.standard_normal(2)
            combined = ndwt(TimeSeriesPanel(alpha * first + beta * second, 1), system)
            separate = alpha * ndwt(TimeSeriesPanel(first, 1), system) + beta * ndwt(
                TimeSeriesPanel(second, 1), system
            )
            np.testing.assert_allclose(combined, separate, atol=1e-10)

    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_shift_covariance(self, family):
        system = build_system(family, 4)
        for _ in range(100):
            values = self.rng.standard_normal((64, 2))
            shift = int(self.rng.integers(1, 64))
            original = ndwt(TimeSeriesPanel(values, 1), system)
            shifted = ndwt(TimeSeriesPanel(np.roll(values, shift, axis=0), 1), system)
            np.testing.assert_allclose(shifted, np.roll(original, shift, axis=1), atol=1e-10)

    def test_matches_direct_sum(self):
        system = build_system("db2", 2)
        T = 32
        values = self.rng.standard_normal((T, 2))
        coefficients = ndwt(TimeSeriesPanel(values, 1), system)
        psi = system.psi[1]
        k = 5
        direct = sum(values[(k + m) % T] * psi[m] for m in range(len(psi)))
        np.testing.assert_allclose(coefficients[1, k], direct, atol=1e-12)

    def test_too_short(self):
        system = build_system("haar", 6)
        with pytest.raises(InsufficientLengthError):
            ndwt(TimeSeriesPanel(self.rng.standard_normal((32, 2)), 1), system)

    def test_non_finite(self):
        values = self.rng.standard_normal((32, 2))
        values[3, 1] = np.nan
        with pytest.raises(InvalidDataError):
            ndwt(TimeSeriesPanel(values, 1), build_system("haar", 2))

    def test_white_noise_finest_scale_has_unit_variance(self):
        system = build_system("haar", 4)
        variances = []
        for seed in range(100):
            values = np.random.default_rng(seed).standard_normal((1024, 2))
            variances.append(ndwt(TimeSeriesPanel(values, 1), system)[0].var(axis=0))
        np.testing.assert_allclose(np.mean(variances, axis=0), 1.0, atol=0.15)


class TestScaleToBand:
    def test_reported_bands(self):
        assert scale_to_band(5, 1000.0) == (15.625, 31.25)
        assert scale_to_band(1, 100.0) == (25.0, 50.0)

    @pytest.mark.parametrize(
        "j, band",
        [(3, (62.5, 125.0)), (4, (31.25, 62.5)), (5, (15.625, 31.25)), (6, (7.8125, 15.625)), (7, (3.90625, 7.8125))],
    )
    def test_table_rows_at_1000_hz(self, j, band):
        assert scale_to_band(j, 1000.0) == band

    @pytest.mark.parametrize("j, band", [(2, (12.5, 25.0)), (3, (6.25, 12.5)), (4, (3.125, 6.25))])
    def test_table_rows_at_100_hz(self, j, band):
        assert scale_to_band(j, 100.0) == band

    @pytest.mark.parametrize("J, fs", [(6, 100.0), (10, 1000.0)])
    def test_bands_tile_the_frequency_range(self, J, fs):
        bands = [scale_to_band(j, fs) for j in range(1, J + 1)]
        assert bands[0][1] == fs / 2
        assert bands[-1][0] == fs / 2 ** (J + 1)
        for finer, coarser in zip(bands, bands[1:]):
            assert coarser[1] == finer[0]
            assert coarser[0] < coarser[1]
        assert sum(hi - lo for lo, hi in bands) == pytest.approx(fs / 2 - fs / 2 ** (J + 1))

    def test_invalid_arguments(self):
        with pytest.raises(ValidationError):
            scale_to_band(1, 0.0)
        with pytest.raises(ScaleOutOfRangeError):
            scale_to_band(0, 100.0)


class TestDwtPyramid:
    @pytest.mark.parametrize("family", ["haar", "db2"])
    def test_energy_preserved(self, family, rng):
        system = build_system(family, 3)
        signal = rng.standard_normal(64)
        approximations, details = dwt_pyramid(signal, system)
        energy = sum(np.sum(d**2) for d in details) + np.sum(approximations[-1] ** 2)
        assert energy == pytest.approx(np.sum(signal**2), rel=1e-10)

    def test_level_lengths(self, rng):
        approximations, details = dwt_pyramid(rng.standard_normal(32), build_system("haar", 3))
        assert [len(a) for a in approximations] == [16, 8, 4]
        assert [len(d) for d in details] == [16, 8, 4]

    def test_haar_constant_has_no_detail(self):
        approximations, details = dwt_pyramid(np.full(16, 3.0), build_system("haar", 2))
        for d in details:
            np.testing.assert_allclose(d, 0.0, atol=1e-12)
        np.testing.assert_allclose(approximations[0], 3.0 * np.sqrt(2.0))

    def test_length_must_be_dyadic_multiple(self, rng):
        with pytest.raises(InvalidLengthError):
            dwt_pyramid(rng.standard_normal(30), build_system("haar", 2))
