"""dynamap: per-sample training dynamics, data maps, and subset experiments.

The pipeline, end to end: parse a GLUE-style NLI split, train the
deterministic reference classifier while logging every sample's
predicted probabilities at each epoch, reduce those logs to
(confidence, variability, correctness) per sample, draw the data map,
carve filtered train subsets from the rankings, and retrain on each
subset to compare in- and out-of-distribution accuracy.
"""

from .dataset import (
    DatasetSplit,
    Label,
    ParseResult,
    Sample,
    TsvSchema,
    parse_tsv,
    read_split,
    save_split,
    write_tsv,
)
from .dynamics import TrainingDynamics, compute_dynamics, load_dynamics, save_dynamics
from .errors import DynamapError
from .experiment import (
    ExperimentConfig,
    ResultsRow,
    ResultsTable,
    emit_table,
    inspect_hard,
    run_experiment,
)
from .ingest import ingest, validate_completeness
from .render import MapStyle, render_map
from .subsets import Category, SubsetSpec, materialize, nine_recipes, rank, select
from .trainer import (
    EpochRecord,
    FeatureVector,
    ModelParams,
    TrainConfig,
    evaluate,
    featurize,
    load_checkpoint,
    predict_probs,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Category",
    "DatasetSplit",
    "DynamapError",
    "EpochRecord",
    "ExperimentConfig",
    "FeatureVector",
    "Label",
    "MapStyle",
    "ModelParams",
    "ParseResult",
    "ResultsRow",
    "ResultsTable",
    "Sample",
    "SubsetSpec",
    "TrainConfig",
    "TrainingDynamics",
    "TsvSchema",
    "compute_dynamics",
    "emit_table",
    "evaluate",
    "featurize",
    "ingest",
    "inspect_hard",
    "load_checkpoint",
    "load_dynamics",
    "materialize",
    "nine_recipes",
    "parse_tsv",
    "predict_probs",
    "rank",
    "read_split",
    "render_map",
    "run_experiment",
    "save_checkpoint",
    "save_dynamics",
    "save_split",
    "select",
    "train",
    "validate_completeness",
    "write_tsv",
]
