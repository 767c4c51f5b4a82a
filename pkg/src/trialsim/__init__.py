"""trialsim: a desk-scale simulation workbench for trial statisticians.

Two engines share one reproducible, parallel core:

* power studies for two-arm randomized trials with an ordinal endpoint
  (empirical power and type-I error of a battery of candidate tests), and
* measurement-error studies quantifying the bias that noisy covariates
  induce in multivariable linear regression.

Entry points: the ``trialsim`` CLI, the HTTP service in
:mod:`trialsim.service`, or the library functions re-exported here.
"""

from .version import ENGINE_VERSION, __version__
from .trial import (
    AllocationRatio,
    ArmCounts,
    ConfigValidationError,
    OrdinalDistribution,
    PowerStudyConfig,
    arm_sizes,
    validate_config,
)
from .sampling import StreamKey, derive_stream, sample_arm
from .power_engine import PowerResults, mc_standard_error, run_power_study
from .merror import (
    Dataset,
    MErrorConfig,
    MErrorResults,
    Roles,
    SynthSpec,
    inject_error,
    load_csv,
    ols_fit,
    run_merror_study,
    synth_dataset,
)
from .reporting import ResultDocument, plot_series, write_results

__all__ = [
    "ENGINE_VERSION",
    "AllocationRatio",
    "ArmCounts",
    "ConfigValidationError",
    "OrdinalDistribution",
    "PowerStudyConfig",
    "arm_sizes",
    "validate_config",
    "StreamKey",
    "derive_stream",
    "sample_arm",
    "PowerResults",
    "mc_standard_error",
    "run_power_study",
    "Dataset",
    "MErrorConfig",
    "MErrorResults",
    "Roles",
    "SynthSpec",
    "inject_error",
    "load_csv",
    "ols_fit",
    "run_merror_study",
    "synth_dataset",
    "ResultDocument",
    "plot_series",
    "write_results",
]
