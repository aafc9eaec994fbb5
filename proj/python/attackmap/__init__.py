"""Map threat-report sentences to ATT&CK techniques.

Thin Python layer over the native ``attackmap._core`` module. Functions that
produce structured reports return plain dictionaries.
"""

import json
import os

from . import _core
from ._core import (
    AttackmapError,
    ArgumentError,
    Corpus,
    EmptyCorpusError,
    FitError,
    FormatError,
    DataImportError,
    MergeError,
    Model,
    ParseError,
    PredictError,
    Registry,
    SchemaError,
    TrainError,
    ValidationError,
    corpus_from_bundles,
    default_grid,
    import_csv,
    import_tram,
    load_model,
    load_registry,
    merge,
    normalize_tokens,
    parse_model,
    porter_stem,
    predict_document,
    registry_from_bundle,
    registry_from_csv,
    registry_of_model,
    smoothed_idf,
    tfidf,
    train,
)

__all__ = [
    "AttackmapError", "ArgumentError", "Corpus", "EmptyCorpusError", "FitError", "FormatError", "DataImportError",
    "MergeError", "Model", "ParseError", "PredictError", "Registry", "SchemaError", "TrainError",
    "ValidationError", "classification_report", "corpus_from_bundles", "default_grid", "doc_metrics", "evaluate",
    "evaluate_predictions", "import_csv", "import_tram", "load_model", "load_registry", "merge",
    "normalize_tokens", "parse_model", "porter_stem", "predict_document", "registry_from_bundle",
    "registry_from_csv", "registry_of_model", "smoothed_idf", "tfidf", "threshold_sweep", "train",
]


def evaluate(model, test, ks=(1, 3), model_id=""):
    """Evaluation report of ``model`` on the ``test`` corpus."""
    return json.loads(_core.evaluate_json(model, test, list(ks), model_id or model.kind))


def evaluate_predictions(path, test, ks=(1, 3), model_id="external"):
    """Evaluation report of an external prediction file against ``test``."""
    return json.loads(_core.evaluate_predictions_json(os.fspath(path), test, list(ks), model_id))


def classification_report(truth, rows, classes, ks=(1,)):
    """Weighted and per-class metrics for explicit probability rows."""
    return json.loads(_core.classification_report_json(list(truth), [list(r) for r in rows], list(classes), list(ks)))


def doc_metrics(predicted, truth):
    """Set precision, recall and F1 of one document."""
    return json.loads(_core.doc_metrics_json(set(predicted), set(truth)))


def threshold_sweep(model, documents, grid=None, model_id=""):
    """Per-document and macro F1 over a threshold grid.

    ``documents`` is a list of ground-truth JSON files or a directory of them.
    """
    if isinstance(documents, (str, os.PathLike)) and os.path.isdir(documents):
        root = os.fspath(documents)
        documents = sorted(os.path.join(root, f) for f in os.listdir(root) if f.endswith(".json"))
    paths = [os.fspath(p) for p in documents]
    return json.loads(_core.threshold_sweep_json(model, paths, list(grid or default_grid()), model_id or model.kind))
