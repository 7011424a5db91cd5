"""Population-guided large margin classification.

A linear two-class classifier that augments the soft-margin hinge program
with a population term pushing the class-mean difference direction, solved
in its dual form by a pairwise coordinate method. Ships with synthetic
Gaussian populations, replicated evaluation protocols, and a command line
front end (``pglmc``).
"""
__version__ = "0.1.0"

from .core import (
    ClassPrediction,
    Dataset,
    LinearModel,
    class_means,
    decision_scores,
    labels_from_scores,
    predict,
)
from .errors import (
    AllCandidatesFailed,
    DegenerateDirection,
    DegenerateMeans,
    DimensionMismatch,
    EmptyInput,
    InfeasibleProblem,
    LengthMismatch,
    MaxIterationsExceeded,
    MissingClass,
    MissingLabelColumn,
    NonNumericFeature,
    ParseError,
    PglmcError,
    TooFewSamples,
    UnknownPositiveClass,
    ZeroVector,
)
from .harness import (
    CVPlan,
    ExperimentResult,
    Method,
    default_tuning_grid,
    kfold_split,
    one_vs_rest_runs,
    run_cv_experiment,
    run_sim_experiment,
    tune,
)
from .metrics import (
    EvalReport,
    MeasureSummary,
    aggregate,
    ccr,
    direction_angle,
    evaluate_predictions,
    intercept_deviation,
    mwe,
    per_class_error_rates,
)
from .qp import (
    DualSolution,
    KKTResiduals,
    QPProblem,
    assemble_dual,
    kkt_check,
    solve_dual,
    solve_svm_dual,
)
from .simulate import (
    BayesReference,
    ConcentrationReport,
    DimDiagnostics,
    DistanceStats,
    Setting,
    SimSpec,
    bayes_reference,
    distance_concentration,
    generate,
    generate_test,
    hdlss_diagnostics,
    interchangeable_inverse_apply,
    mean_vector,
    scale_factor,
)
from .train import (
    TrainConfig,
    load_model,
    margin_piling_fraction,
    model_from_dict,
    model_to_dict,
    save_model,
    train_pglmc,
    train_svm,
)

__all__ = [
    "__version__",
    "AllCandidatesFailed",
    "BayesReference",
    "CVPlan",
    "ClassPrediction",
    "ConcentrationReport",
    "Dataset",
    "DegenerateDirection",
    "DegenerateMeans",
    "DimDiagnostics",
    "DimensionMismatch",
    "DistanceStats",
    "DualSolution",
    "EmptyInput",
    "EvalReport",
    "ExperimentResult",
    "InfeasibleProblem",
    "KKTResiduals",
    "LengthMismatch",
    "LinearModel",
    "MaxIterationsExceeded",
    "MeasureSummary",
    "Method",
    "MissingClass",
    "MissingLabelColumn",
    "NonNumericFeature",
    "ParseError",
    "PglmcError",
    "QPProblem",
    "Setting",
    "SimSpec",
    "TooFewSamples",
    "TrainConfig",
    "UnknownPositiveClass",
    "ZeroVector",
    "aggregate",
    "assemble_dual",
    "bayes_reference",
    "ccr",
    "class_means",
    "decision_scores",
    "default_tuning_grid",
    "direction_angle",
    "distance_concentration",
    "evaluate_predictions",
    "generate",
    "generate_test",
    "hdlss_diagnostics",
    "intercept_deviation",
    "interchangeable_inverse_apply",
    "kfold_split",
    "kkt_check",
    "labels_from_scores",
    "load_model",
    "margin_piling_fraction",
    "mean_vector",
    "model_from_dict",
    "model_to_dict",
    "mwe",
    "one_vs_rest_runs",
    "per_class_error_rates",
    "predict",
    "run_cv_experiment",
    "run_sim_experiment",
    "save_model",
    "scale_factor",
    "solve_dual",
    "solve_svm_dual",
    "train_pglmc",
    "train_svm",
    "tune",
]
