"""torusnet: lattice neural-network simulation with torus-correlated noise.

Simulates spatially stationary networks of FitzHugh-Nagumo neurons on a
d-dimensional discrete torus, driven by modulo-torus correlated Gaussian
martingale noise with Hebbian synaptic plasticity, and provides numerical
verification suites for the constructive properties the model rests on
(dominating weight sequence, noise covariance and filter discrepancies,
solution-map Lipschitz/truncation/growth bounds) together with rare-event
Monte Carlo scaling diagnostics.
"""

__version__ = "0.1.0"

from .config import RunConfig, default_config, load_config, resolve_config
from .deviations import (
    Observable,
    estimate_from_values,
    estimate_rare_event,
    get_observable,
    observable_names,
    observable_values,
    register_observable,
)
from .dynamics import (
    FhnParams,
    LearningParams,
    PathEnsemble,
    SynapticState,
    brownian_path_field,
    growth_bound_check,
    hebbian_step,
    interaction_field,
    interaction_sum,
    lipschitz_ratio,
    psi_lipschitz_log_bound,
    simulate_network,
    solve_driven,
    truncation_gap,
)
from .empirical import (
    EmpiricalMeasure,
    bl_distance,
    empirical_measure,
    marginal_statistics,
    spatial_covariance,
    stationarity_check,
    weighted_ensemble_norms,
)
from .errors import (
    ConfigError,
    DegenerateInputError,
    DuplicateNameError,
    KernelConstructionError,
    NonFiniteStateError,
    SpectrumError,
    TorusnetError,
)
from .kernels import (
    KernelFamily,
    build_kappa,
    build_lambda,
    check_domination,
    weighted_norm,
    wrapped_lambda_weights,
)
from .lattice import (
    LatticeShape,
    cube_indices,
    dft_field,
    flat_index,
    idft_field,
    mod_torus,
    shift_field,
)
from .noise import (
    NoiseEnsemble,
    NoiseSpec,
    SpectralNoiseModel,
    brownian_sup_bound,
    brownian_sup_tail_check,
    build_spectral_model,
    eta_star_sweep,
    sample_noise_paths,
    sample_norm_sums,
    tail_statistic,
    verify_covariance,
    wilson_interval,
)
from .runner import ldp_scaling_report, noise_norm_sums_config, simulate_config
from .timegrid import TimeGrid

__all__ = [name for name in dir() if not name.startswith("_")]
