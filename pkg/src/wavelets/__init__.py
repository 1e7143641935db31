from .wavelets import (
    WaveletFilter,
    WaveletSystem,
    autocorrelation_wavelet,
    build_system,
    default_num_scales,
    dwt_pyramid,
    ndwt,
    scale_to_band,
    support_length,
)

__all__ = [
    "WaveletFilter",
    "WaveletSystem",
    "autocorrelation_wavelet",
    "build_system",
    "default_num_scales",
    "dwt_pyramid",
    "ndwt",
    "scale_to_band",
    "support_length",
]
