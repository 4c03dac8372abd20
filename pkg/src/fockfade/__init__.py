"""Entanglement transfer of Gaussian and non-Gaussian two-mode states
over noisy, fading bosonic loss channels."""

__version__ = "0.1.0"

from .channel import (
    BipartiteDensity,
    ChannelParams,
    evolve_asymmetric_noiseless,
    evolve_asymmetric_noisy,
    evolve_generic,
    evolve_symmetric_noiseless,
    evolve_symmetric_noisy,
)
from .entanglement import (
    GaussianCM,
    PTSpectrum,
    conditional_entropy_fock,
    density_log_negativity,
    gaussian_conditional_entropy,
    gaussian_log_negativity,
    log_negativity,
    partial_transpose_spectrum,
    pure_pt_spectrum,
    rate,
    tmsv_covariance_after_channel,
)
from .errors import (
    ConstructionError,
    DomainError,
    FockfadeError,
    NoSolutionError,
    TruncationError,
    UnsupportedFormError,
)
from .experiments import (
    SweepConfig,
    SweepResult,
    memory_threshold,
    optimize_T,
    run_sweep,
    single_photon_ratio,
)
from .fading import (
    FadingChannel,
    QuadratureRule,
    channel_quadrature,
    make_channel,
    mean_loss_db,
    pdf,
    solve_sigma_for_loss,
    survival_probability,
)
from .states import (
    NoonState,
    SchmidtState,
    SqueezingSpec,
    StateRecipe,
    analytic_log_negativity,
    build_state,
    calibrate_to_entanglement,
    creation_probability,
    pure_log_negativity,
    squeezing_from_db,
    squeezing_from_lambda,
)

__all__ = [
    "BipartiteDensity",
    "ChannelParams",
    "ConstructionError",
    "DomainError",
    "FadingChannel",
    "FockfadeError",
    "GaussianCM",
    "NoSolutionError",
    "NoonState",
    "PTSpectrum",
    "QuadratureRule",
    "SchmidtState",
    "SqueezingSpec",
    "StateRecipe",
    "SweepConfig",
    "SweepResult",
    "TruncationError",
    "UnsupportedFormError",
    "analytic_log_negativity",
    "build_state",
    "calibrate_to_entanglement",
    "channel_quadrature",
    "conditional_entropy_fock",
    "creation_probability",
    "density_log_negativity",
    "evolve_asymmetric_noiseless",
    "evolve_asymmetric_noisy",
    "evolve_generic",
    "evolve_symmetric_noiseless",
    "evolve_symmetric_noisy",
    "gaussian_conditional_entropy",
    "gaussian_log_negativity",
    "log_negativity",
    "make_channel",
    "mean_loss_db",
    "memory_threshold",
    "optimize_T",
    "partial_transpose_spectrum",
    "pdf",
    "pure_log_negativity",
    "pure_pt_spectrum",
    "rate",
    "run_sweep",
    "single_photon_ratio",
    "solve_sigma_for_loss",
    "squeezing_from_db",
    "squeezing_from_lambda",
    "survival_probability",
    "tmsv_covariance_after_channel",
]
