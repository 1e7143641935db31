from .cca import CcaResult, classical_cca, lagged_covariances
from .lsp import LocalSpectrum, StftConfig, check_band, lsp_cancoh, stft_spectrum

__all__ = [
    "CcaResult",
    "LocalSpectrum",
    "StftConfig",
    "check_band",
    "classical_cca",
    "lagged_covariances",
    "lsp_cancoh",
    "stft_spectrum",
]
