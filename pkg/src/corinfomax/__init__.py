"""Online correlative information maximization for blind source separation."""

from .domains import (
    DomainKind,
    DomainSpec,
    FeaturePolytope,
    HPolytope,
    clip_nonneg,
    clip_signed,
    feature_to_hrep,
    membership,
    prox_feature,
    soft_threshold,
)
from .dynamics import (
    DynamicsConfig,
    ForgettingConfig,
    NetworkState,
    OutputRecord,
    compute_gamma_e,
    compute_gamma_y,
    fit_online,
    grad_J,
    run_dynamics,
    update_Be,
    update_By,
    update_W,
)
from .exceptions import (
    ConfigError,
    DegenerateInputError,
    DegenerateMixingError,
    DivergenceError,
    EmptyDataError,
    InfeasibleSamplerError,
    NumericalDegeneracyError,
)

__version__ = "0.1.0"
