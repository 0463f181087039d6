"""Tolerant junta testers over the Boolean cube.

Estimate how well a black-box ±1 function is approximated by a k-junta,
using only query access: coordinate oracles isolate influential variables,
a Poissonized bucket fit finds the best junta on them, and a random-walk
pipeline does the same with polynomially many queries. A brute-force
ground-truth module verifies everything on small instances.
"""

from .best_fit import BestFitResult, BucketTable, find_best_fit
from .core import (
    BooleanOracle,
    CapacityError,
    FourierSpectrum,
    LivenessError,
    RealOracle,
    Restriction,
    WorkBudgetError,
    all_points,
    apply_noise,
    influence,
    inverse_wht,
    load_table,
    low_degree_influence,
    restrict,
    sample_restriction,
    save_table,
    total_influence,
    wht,
)
from .full_tester import (
    TesterOutput,
    TolerantTestResult,
    maximum_correlation_junta,
    tolerant_test,
)
from .gap_tester import (
    GapConfig,
    coordinate_projection,
    desk_gap_config,
    gap_tolerant_test,
    influence_testing_sample,
    maximum_correlation_gap_junta,
    smooth_query,
    threshold_influences,
)
from .ground_truth import (
    exact_avg,
    exact_distance_to_juntas,
    exact_cube_noise,
    exact_max_junta_corr,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    FunctionSpec,
    TesterSpec,
    gen_function,
    run_experiment,
)
from .oracle_builder import (
    CandidateDictator,
    CoordinateOracleSet,
    OracleBuilderConfig,
    construct_coordinate_oracle,
    desk_config,
    dictator_test,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
