"""Block sign-flip score tests for GLMs on clustered data."""

from ._core import (
    Family,
    FlipTestResult,
    InputError,
    ModelData,
    NullFit,
    NumericalError,
    SandwichFit,
    Scenario,
    SimResult,
    WaldResult,
    __version__,
    block_structure,
    fit_null,
    flip_test,
    gee_independence_fit,
    gee_wald_test,
    generate_flips,
    hat_projection,
    multi_df_test,
    rejection_interval,
    run_cli,
    run_scenario,
    simulate_cluster_dataset,
    wald_glm_test,
)

__all__ = [
    "Family",
    "FlipTestResult",
    "InputError",
    "ModelData",
    "NullFit",
    "NumericalError",
    "SandwichFit",
    "Scenario",
    "SimResult",
    "WaldResult",
    "__version__",
    "block_structure",
    "fit_null",
    "flip_test",
    "gee_independence_fit",
    "gee_wald_test",
    "generate_flips",
    "hat_projection",
    "multi_df_test",
    "rejection_interval",
    "run_cli",
    "run_scenario",
    "simulate_cluster_dataset",
    "wald_glm_test",
]
