from .cancoh import (
    CancohConfig,
    CancohField,
    CancohPoint,
    DirectEigenResult,
    cancoh_at,
    causal_wavecancoh,
    direct_eigen_cancoh,
    regularized_lws,
    scale_means,
    wavecancoh,
    wavecancoh_panel,
    whitened_cancoh,
)

__all__ = [
    "CancohConfig",
    "CancohField",
    "CancohPoint",
    "DirectEigenResult",
    "cancoh_at",
    "causal_wavecancoh",
    "direct_eigen_cancoh",
    "regularized_lws",
    "scale_means",
    "wavecancoh",
    "wavecancoh_panel",
    "whitened_cancoh",
]
