"""Fisher-information growth in collective-spin models, computed two ways:
through delocalization of the probe operator on its Krylov chain, and by
exact diagonalization as an independent reference.
"""

__version__ = "0.1.0"

from .analysis import (
    QfiTrace,
    depth_witness,
    detect_tstar,
    early_growth_fit,
    linear_region,
    proposition_check,
    scaling_fit,
)
from .chain_dynamics import (
    ChainWavefunction,
    delocalization_length,
    delocalization_profile,
    evolve_phi,
    krylov_complexity,
)
from .errors import (
    ConfigError,
    InvariantGateError,
    ResourceRefusalError,
    TailNotResolvedError,
)
from .exact_reference import (
    SpectralDecomposition,
    eigendecompose,
    evolve_state,
    exact_qfi,
    project_phi,
)
from .krylov_space import KrylovDecomposition, hs_inner, hs_norm, lanczos, liouville_apply
from .landscape import (
    CorrelationLandscape,
    StripeProfile,
    correlation_landscape,
    qfi_reconstruct,
    qfi_variant,
    stripe_profile,
)
from .models import ModelInstance, build_coupled_tops_model, build_twisting_model
from .pipeline import RunConfig, run_single, run_sweep
from .spin_algebra import (
    collective_spin_matrices,
    expectation,
    highest_weight_state,
    variance,
)

__all__ = [
    "ChainWavefunction",
    "ConfigError",
    "CorrelationLandscape",
    "InvariantGateError",
    "KrylovDecomposition",
    "ModelInstance",
    "QfiTrace",
    "ResourceRefusalError",
    "RunConfig",
    "SpectralDecomposition",
    "StripeProfile",
    "TailNotResolvedError",
    "build_coupled_tops_model",
    "build_twisting_model",
    "collective_spin_matrices",
    "correlation_landscape",
    "delocalization_length",
    "delocalization_profile",
    "depth_witness",
    "detect_tstar",
    "early_growth_fit",
    "eigendecompose",
    "evolve_phi",
    "evolve_state",
    "exact_qfi",
    "expectation",
    "highest_weight_state",
    "hs_inner",
    "hs_norm",
    "krylov_complexity",
    "lanczos",
    "linear_region",
    "liouville_apply",
    "project_phi",
    "proposition_check",
    "qfi_reconstruct",
    "qfi_variant",
    "run_single",
    "run_sweep",
    "scaling_fit",
    "stripe_profile",
    "variance",
]
