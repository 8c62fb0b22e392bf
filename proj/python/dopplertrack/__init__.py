"""Maximum Doppler spread estimation for comb-pilot OFDM by delay-subspace tracking."""

from ._core import (
    ChannelProfile,
    ConfigError,
    DopplerEstimate,
    DopplerTracker,
    Fading,
    GridResult,
    NewtonError,
    OfdmGeometry,
    Scenario,
    ScenarioSummary,
    TrialResult,
    bessel_j0,
    doppler_from_root,
    invert_eta,
    load_config,
    ls_observe,
    mdl_order,
    newton_solve,
    noise_floor,
    poly_coeffs,
    preset_names,
    run_grid,
    run_trial,
    time_avg_cfr,
    xi0_series,
    xi_beta_series,
    xi_exact,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
