"""Permission-based Android malware triage.

Extracts the permission set an APK requests (ZIP container plus binary
AndroidManifest.xml), turns it into a fixed-order bit vector, and classifies
it with one of four from-scratch models: a random forest, a Pegasos-style
linear SVM, Gaussian LDA with a shared covariance, and leaf-wise gradient
boosted trees. Training, splitting, and evaluation are deterministic for a
given seed.
"""

from .core import Dataset, Label, PermissionSchema, feature_vector
from .rng import Rng, child
from .apkparse import (
    AxmlDocument,
    AxmlElement,
    ZipEntry,
    axml_parse,
    extract_permissions,
    vectorize,
    zip_extract,
    zip_list,
)
from .data import (
    DEFAULT_LABEL_COLUMN,
    LabelRule,
    load_csv,
    rule_and,
    rule_atleast,
    rule_or,
    split_70_30,
    stratified_kfold,
    synth_generate,
    write_csv,
)
from .models import (
    ClassifierSpec,
    GbdtParams,
    KINDS,
    LdaParams,
    RfParams,
    SvmParams,
    TrainedModel,
    default_spec,
    predict,
    predict_labels,
    predict_scores,
    train,
)
from .models.serialize import load_model, save_model
from .eval import (
    ConfusionMatrix,
    CvReport,
    FoldResult,
    GridPoint,
    GridResult,
    Metrics,
    accuracy,
    confusion,
    cross_validate,
    evaluate_on,
    feature_importance,
    grid_search,
    metrics_from_confusion,
    precision,
    recall,
)
from . import errors
from . import report

__version__ = "0.1.0"

__all__ = [
    "AxmlDocument", "AxmlElement", "ClassifierSpec", "ConfusionMatrix",
    "CvReport", "DEFAULT_LABEL_COLUMN", "Dataset", "FoldResult", "GbdtParams",
    "GridPoint", "GridResult", "KINDS", "Label", "LabelRule", "LdaParams",
    "Metrics", "PermissionSchema", "RfParams", "Rng", "SvmParams",
    "TrainedModel", "ZipEntry", "accuracy", "axml_parse", "child",
    "confusion", "cross_validate", "default_spec", "errors", "evaluate_on",
    "extract_permissions", "feature_importance", "feature_vector",
    "grid_search", "load_csv", "load_model", "metrics_from_confusion",
    "precision", "predict", "predict_labels", "predict_scores", "recall",
    "report", "rule_and", "rule_atleast", "rule_or", "save_model",
    "split_70_30", "stratified_kfold", "synth_generate", "train",
    "vectorize", "write_csv", "zip_extract", "zip_list",
]
