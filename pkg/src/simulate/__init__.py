from .ar2 import (
    Ar2MixtureSpec,
    MixingTemplate,
    ar2_coefficients,
    default_ar2_spec,
    default_ar2_templates,
    simulate_ar2,
    simulate_ar2_mixture,
)
from .mvlsw import (
    LwsSpec,
    MvlswRealization,
    PiecewiseSpectrum,
    builtin_spec_appendix_c1,
    population_curve,
    simulate_mvlsw,
    transfer_from_spectrum,
    true_cancoh_from_spec,
)

__all__ = [
    "Ar2MixtureSpec",
    "LwsSpec",
    "MixingTemplate",
    "MvlswRealization",
    "PiecewiseSpectrum",
    "ar2_coefficients",
    "builtin_spec_appendix_c1",
    "default_ar2_spec",
    "default_ar2_templates",
    "population_curve",
    "simulate_ar2",
    "simulate_ar2_mixture",
    "simulate_mvlsw",
    "transfer_from_spectrum",
    "true_cancoh_from_spec",
]
