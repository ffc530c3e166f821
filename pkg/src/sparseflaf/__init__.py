"""Combined sparse regularization for functional-link adaptive filters.

A streaming nonlinear adaptive-filtering library: trigonometric
functional-link expansion, an l1 (variable-step-size reweighted zero
attractor) branch and a classic proportionate branch, their block-based
adaptive convex combination, and a Monte Carlo system-identification
harness producing EMSE learning curves.
"""

from .errors import ConfigurationError
from .expansion import ExpansionConfig, block_slice, block_width, expand
from .filters import (LinearFilterState, ProportionateFlafState, ZaFlafState,
                      nlms_step, pflaf_step, proportionate_weights,
                      update_power_estimates, vss_rza_step, vss_step_size)
from .combiner import (BranchOutputs, CombinerState, block_delta,
                       combined_output, combiner_sample_step, lambda_from_a,
                       update_mixing)
from .plant import (PlantSpec, SignalBundle, apply_plant, gen_colored_input,
                    random_fir, soft_clip, zeta_profile)
from .experiment import (EmseTrace, EnsembleResult, ExperimentConfig,
                         SweepResult, TrackingResult, ensemble_emse,
                         run_block_sweep, run_ensemble, run_tracking,
                         run_trial, steady_state_emse, sweep_config,
                         tracking_config, trial_signals)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ExpansionConfig", "expand", "block_slice", "block_width",
    "LinearFilterState", "ProportionateFlafState", "ZaFlafState",
    "proportionate_weights", "nlms_step", "pflaf_step",
    "update_power_estimates", "vss_step_size", "vss_rza_step",
    "CombinerState", "BranchOutputs", "lambda_from_a", "combined_output",
    "block_delta", "update_mixing", "combiner_sample_step",
    "PlantSpec", "SignalBundle", "soft_clip", "gen_colored_input",
    "random_fir", "apply_plant", "zeta_profile",
    "ExperimentConfig", "EmseTrace", "EnsembleResult", "SweepResult",
    "TrackingResult", "run_trial", "trial_signals", "ensemble_emse",
    "steady_state_emse", "run_ensemble", "run_block_sweep", "run_tracking",
    "sweep_config", "tracking_config",
    "__version__",
]
