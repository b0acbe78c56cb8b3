"""Gallery condensation and open-set identification evaluation.

The pipeline: prune outliers from each identity's vector set with
mean-shift clustering, replace what remains with a small set of covering
samples, then measure identification quality (FNIR at target FPIRs,
precision/recall) against the uncondensed baselines.
"""

from .config import METHODS, RunConfig, load_config
from .core import (
    CondensedGallery,
    Gallery,
    ProbeSet,
    Provenance,
    SampleSet,
    l2_distance,
    mean_vector,
    normalize,
    normalize_rows,
)
from .errors import (
    BadMagicError,
    BadRecordError,
    ConfigError,
    CoverageError,
    DatasetFormatError,
    DimensionMismatchError,
    EmptyInputError,
    GsmpError,
    NotPositiveDefiniteError,
    TruncatedFileError,
    UnsupportedVersionError,
    ZeroVectorError,
)
from .evaluation import (
    ConfusionCounts,
    EvalReport,
    OperatingPoint,
    PrecisionRecall,
    SweepGrid,
    SweepResult,
    compute_fnir,
    compute_precision_recall,
    confusion_counts,
    evaluate_method,
    precision_recall_from_counts,
    run_sweep,
    threshold_for_fpir,
)
from .generation import GenerationParams, condense_gallery, generate_samples, move_toward_init
from .identification import (
    IdentificationResult,
    MahalanobisModel,
    accept,
    aggregate_single,
    dist_cnv,
    dist_mahalanobis,
    fit_mahalanobis,
    identify_batch,
    identify_top1,
    single_gallery,
)
from .pipeline import condense_with_method
from .pruning import (
    ClusterResult,
    PruningParams,
    mean_shift,
    meanshift_update,
    prune_clusters,
    prune_gallery,
    prune_identity,
)
from .synth import GroundTruth, SynthConfig, SynthData, generate, outlier_recovery_score

__version__ = "0.1.0"

__all__ = [
    "BadMagicError",
    "BadRecordError",
    "ClusterResult",
    "CondensedGallery",
    "ConfigError",
    "ConfusionCounts",
    "CoverageError",
    "DatasetFormatError",
    "DimensionMismatchError",
    "EmptyInputError",
    "EvalReport",
    "Gallery",
    "GenerationParams",
    "GroundTruth",
    "GsmpError",
    "IdentificationResult",
    "MahalanobisModel",
    "METHODS",
    "NotPositiveDefiniteError",
    "OperatingPoint",
    "PrecisionRecall",
    "ProbeSet",
    "Provenance",
    "PruningParams",
    "RunConfig",
    "SampleSet",
    "SweepGrid",
    "SweepResult",
    "SynthConfig",
    "SynthData",
    "TruncatedFileError",
    "UnsupportedVersionError",
    "ZeroVectorError",
    "accept",
    "aggregate_single",
    "compute_fnir",
    "compute_precision_recall",
    "condense_gallery",
    "condense_with_method",
    "confusion_counts",
    "dist_cnv",
    "dist_mahalanobis",
    "evaluate_method",
    "fit_mahalanobis",
    "generate",
    "generate_samples",
    "identify_batch",
    "identify_top1",
    "l2_distance",
    "load_config",
    "mean_shift",
    "mean_vector",
    "meanshift_update",
    "move_toward_init",
    "normalize",
    "normalize_rows",
    "outlier_recovery_score",
    "precision_recall_from_counts",
    "prune_clusters",
    "prune_gallery",
    "prune_identity",
    "run_sweep",
    "single_gallery",
    "threshold_for_fpir",
]
