from ._distress import (
    DistressError,
    accuracy,
    aggregate_document,
    dict_tone,
    dict_tone_files,
    extract_mdna,
    filter_reliable,
    hazard_fit,
    knn_predict,
    pseudo_r2,
    run_pipeline,
    segment_sentences,
    self_entropy,
    stub_score,
    svm_fit,
)

__all__ = [
    "DistressError",
    "accuracy",
    "aggregate_document",
    "dict_tone",
    "dict_tone_files",
    "extract_mdna",
    "filter_reliable",
    "hazard_fit",
    "knn_predict",
    "pseudo_r2",
    "run_pipeline",
    "segment_sentences",
    "self_entropy",
    "stub_score",
    "svm_fit",
]
