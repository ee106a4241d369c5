"""Solver kit for star-star hub-and-spoke assignment (star-metric labeling).

Builds the linear relaxation of the single-allocation objective, rounds
it with a dependent randomized scheme whose expected cost is within a
constant factor (about 5.281 at the default class base) of the
relaxation value, and ships exact oracles plus a transportation toolkit
to verify every distributional property the guarantee rests on.
"""

from .estimator import HubAssignmentEstimator
from .exact import EnumerationLimitError, solve_exact
from .harness import (
    CheckResult,
    ExperimentConfig,
    ExperimentReport,
    approximation_ratio,
    expected_scale_factor,
    minimize_ratio,
    ratio_curve,
    report_csv,
    report_json,
    run_experiment,
)
from .instance import (
    Assignment,
    DimensionMismatchError,
    Instance,
    InstanceError,
    InstanceParseError,
    InvalidInstanceError,
    evaluate_cost,
    generate_random,
    load_instance,
    read_instance,
    save_instance,
    star_costs,
    write_instance,
)
from .lp import FractionalSolution, LinearProgram, build_lrp, lp_text, relaxation_value, solve
from .rounding import (
    DEFAULT_R,
    ClassPartition,
    HubClassing,
    RoundingResult,
    RoundingTrace,
    assign_within_classes,
    classify_hubs,
    classify_nonhubs,
    replay_trace,
    round_fractional,
    run_pipeline,
)
from .transport import (
    LineMetricCosts,
    TransportInstance,
    TransportPlan,
    UnbalancedMarginalsError,
    couple_from_marginals,
    is_monge,
    is_monge_under_order,
    line_metric_costs,
    nwcr,
    plan_cost,
    transport_optimal,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Assignment",
    "CheckResult",
    "ClassPartition",
    "DEFAULT_R",
    "DimensionMismatchError",
    "EnumerationLimitError",
    "ExperimentConfig",
    "ExperimentReport",
    "FractionalSolution",
    "HubAssignmentEstimator",
    "HubClassing",
    "Instance",
    "InstanceError",
    "InstanceParseError",
    "InvalidInstanceError",
    "LineMetricCosts",
    "LinearProgram",
    "RoundingResult",
    "RoundingTrace",
    "TransportInstance",
    "TransportPlan",
    "UnbalancedMarginalsError",
    "approximation_ratio",
    "assign_within_classes",
    "build_lrp",
    "classify_hubs",
    "classify_nonhubs",
    "couple_from_marginals",
    "evaluate_cost",
    "expected_scale_factor",
    "generate_random",
    "is_monge",
    "is_monge_under_order",
    "line_metric_costs",
    "load_instance",
    "lp_text",
    "minimize_ratio",
    "nwcr",
    "plan_cost",
    "ratio_curve",
    "read_instance",
    "relaxation_value",
    "replay_trace",
    "report_csv",
    "report_json",
    "round_fractional",
    "run_experiment",
    "run_pipeline",
    "save_instance",
    "solve",
    "solve_exact",
    "star_costs",
    "transport_optimal",
    "write_instance",
]
