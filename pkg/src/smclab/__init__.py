"""Sequential Monte Carlo laboratory.

Particle learning and standard particle filters on conjugate Gaussian
mixtures and the local level model, instrumented for degeneracy
(genealogy coalescence, distinct sufficient statistics, ESS, evidence
dispersion across replications) and checked against exact oracles.
"""

from .dataset import Dataset, read_dataset_csv, write_dataset_csv
from .diagnostics import (
    DiagnosticTrace,
    ReplicationReport,
    distinct_ancestors,
    path_functional_estimate,
    replication_report,
)
from .engine import Genealogy, ParticleSet, ess, normalize_log_weights, unique_count
from .errors import DegenerateWeightsError, GuardError, SmclabError, ValidationError
from .filters import (
    FilterKind,
    ResamplePolicy,
    RunResult,
    run_bootstrap_locallevel,
    run_pl_mixture,
    run_storvik_mixture,
)
from .gibbs import GibbsConfig, GibbsDraws, gibbs_mixture
from .harness import derive_seed, oracle_values, resolve_dataset, run_experiment
from .kalman import (
    KalmanMoments,
    kalman_filter_moments,
    kalman_log_evidence,
    kalman_smoother_moments,
)
from .local_level import LocalLevelSpec, VariancePrior, simulate_local_level_data
from .mixture import (
    MixtureModelSpec,
    MixtureParams,
    MixtureSuffStats,
    enumerate_mixture_log_evidence,
    mixture_predictive_logdensity,
    sample_mixture_params,
    simulate_mixture_data,
    update_mixture_suffstats,
)
from .resampling import ResampleScheme, resample

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DegenerateWeightsError",
    "DiagnosticTrace",
    "FilterKind",
    "Genealogy",
    "GibbsConfig",
    "GibbsDraws",
    "GuardError",
    "KalmanMoments",
    "LocalLevelSpec",
    "MixtureModelSpec",
    "MixtureParams",
    "MixtureSuffStats",
    "ParticleSet",
    "ReplicationReport",
    "ResamplePolicy",
    "ResampleScheme",
    "RunResult",
    "SmclabError",
    "ValidationError",
    "VariancePrior",
    "derive_seed",
    "distinct_ancestors",
    "enumerate_mixture_log_evidence",
    "ess",
    "gibbs_mixture",
    "kalman_filter_moments",
    "kalman_log_evidence",
    "kalman_smoother_moments",
    "mixture_predictive_logdensity",
    "normalize_log_weights",
    "oracle_values",
    "path_functional_estimate",
    "read_dataset_csv",
    "replication_report",
    "resample",
    "resolve_dataset",
    "run_bootstrap_locallevel",
    "run_experiment",
    "run_pl_mixture",
    "run_storvik_mixture",
    "sample_mixture_params",
    "simulate_local_level_data",
    "simulate_mixture_data",
    "unique_count",
    "update_mixture_suffstats",
    "write_dataset_csv",
]
