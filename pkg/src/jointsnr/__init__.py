"""Jointly optimal signal detection and signal/noise power estimation.

Observations are zero-mean Gaussian vectors whose variance is the noise
power (H0) or signal plus noise power (H1), with conjugate priors on the
powers. The package provides closed-form posterior quantities, the jointly
optimal detector/estimator, a classical separate-design baseline, a
quadrature oracle and a Monte Carlo harness comparing them.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CostConditionError,
    DegeneratePriorError,
    EmptyInputError,
    InvalidExponentError,
    InvalidSupportError,
    JointSNRError,
    NonFiniteError,
    QuadratureError,
    ShapeUnderflowError,
)
from .fusion import (  # noqa: E402
    GAMMA0,
    GAMMA1,
    ConditionalRisks,
    DecisionReport,
    LogGlrPair,
    ModelPriors,
    conditional_risks,
    detect,
    detect_compact,
    detect_joint,
    detect_separate,
    log_glrs,
    optimal_noise_estimates,
    optimal_signal_estimate,
)
from .model import (  # noqa: E402
    CostParams,
    HypothesisPriors,
    JointPriorParams,
    NoisePriorParams,
    PowerPair,
    SufficientStatistic,
    angular_constant,
    inv_gamma_logpdf,
    joint_prior_logpdf,
    sample_noise_power,
    sample_power_pair,
    sufficient_statistic,
)
from .moments import (  # noqa: E402
    ConditionalEstimates,
    LogMoment,
    conditional_estimates,
    log_moment_h0,
    log_moment_h1,
)
from .montecarlo import (  # noqa: E402
    ExperimentConfig,
    MetricsSummary,
    aggregate,
    run_experiment,
    run_sweep,
)
