"""Anomaly-aware vertebra sequence labeling.

Given per-vertebra classifier scores for a spatially ordered chain, find the
minimum-cost anatomically valid label sequence, including supernumerary
(T13/L6) and missing (11 thoracic / 4 lumbar) vertebra variants, limited
fields of view, and optional detection gaps.
"""
from .costs import (
    SolverConfig,
    build_label_cost,
    fulfilled_transitions,
    pathcost,
    transcondition,
    transcost,
)
from .errors import (
    ContractError,
    ParseError,
    SchemaError,
    UsageError,
    ValidationError,
    VertseqError,
)
from .estimators import ScoreNormalizer, VertebraSequenceLabeler
from .io import (
    SubjectRecord,
    VertebraScores,
    parse_subject,
    read_subjects,
    subject_to_mapping,
    write_subjects,
)
from .labels import (
    FINAL_LABELS,
    N_RAW_LABELS,
    RAW_LABELS,
    RawPath,
    Region,
    TransitionKind,
    decode_anomalies,
    encode_anomalies,
    label_index,
    label_name,
    region_of,
    validate_sequence,
)
from .metrics import (
    EvalReport,
    evaluate_pairs,
    lea_recall,
    perfect_label_percentage,
    subject_correctness,
    tea_recall,
)
from .normalize import NormalizationConfig, NormalizedOutputs, normalize_outputs
from .solver import (
    PathResult,
    count_valid_paths,
    enumerate_valid_paths,
    solve,
    solve_bruteforce,
)
from .synth import (
    NoiseConfig,
    SynthConfig,
    all_fov_windows,
    crop_fov,
    emit_classifier_outputs,
    generate_corpus,
    generate_spine,
    inject_gap,
    relabel_without_anomalies,
)

__version__ = "0.1.0"

__all__ = [
    "ContractError",
    "EvalReport",
    "FINAL_LABELS",
    "N_RAW_LABELS",
    "NoiseConfig",
    "NormalizationConfig",
    "NormalizedOutputs",
    "ParseError",
    "PathResult",
    "RAW_LABELS",
    "RawPath",
    "Region",
    "SchemaError",
    "ScoreNormalizer",
    "SolverConfig",
    "SubjectRecord",
    "SynthConfig",
    "TransitionKind",
    "UsageError",
    "ValidationError",
    "VertebraScores",
    "VertebraSequenceLabeler",
    "VertseqError",
    "all_fov_windows",
    "build_label_cost",
    "count_valid_paths",
    "crop_fov",
    "decode_anomalies",
    "emit_classifier_outputs",
    "encode_anomalies",
    "enumerate_valid_paths",
    "evaluate_pairs",
    "fulfilled_transitions",
    "generate_corpus",
    "generate_spine",
    "inject_gap",
    "label_index",
    "label_name",
    "lea_recall",
    "normalize_outputs",
    "parse_subject",
    "pathcost",
    "perfect_label_percentage",
    "read_subjects",
    "region_of",
    "relabel_without_anomalies",
    "solve",
    "solve_bruteforce",
    "subject_correctness",
    "subject_to_mapping",
    "tea_recall",
    "transcondition",
    "transcost",
    "validate_sequence",
    "write_subjects",
]
