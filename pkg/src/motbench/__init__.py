"""Evaluation engine for multi-object tracking benchmarks.

Parses the benchmark's comma-separated ground-truth, detection, and result
files, runs the frame-by-frame target assignment protocol, and computes the
full frame-level (MOTA, MOTP), identity (IDF1), track-coverage (MT/PT/ML,
fragmentations), and detector (PR, AP) metric families, with benchmark-level
pooling and leaderboard reporting.
"""

from .assignment import (
    EventLog,
    FrameEvents,
    MatchingConfig,
    match_frame,
    preprocess_frame,
    preprocess_sequence,
    run_sequence,
)
from .clearmot import (
    Counts,
    MetricsReport,
    Rates,
    UndefinedMetricError,
    accumulate,
    derived_rates,
    mota,
    motp,
    pool,
    summarize,
)
from .deteval import PRCurve, PRPoint, average_precision, export_curve, pr_curve
from .identity import (
    IdentityScores,
    TrackMatchTable,
    build_table,
    evaluate_identity,
    pool_identity,
    solve_identity,
)
from .ingest import (
    Benchmark,
    EvalUnit,
    FileKind,
    FormatSchema,
    FormatVariant,
    IngestError,
    ParseError,
    SequenceSet,
    ValidationReport,
    load_sequence_set,
    parse_file,
    read_seqmap,
    validate_submission,
    write_result_file,
)
from .model import (
    DEFAULT_OCCLUDER_CLASSES,
    NEUTRAL_CLASSES,
    Box,
    BoxEntry,
    ObjectClass,
    SequenceData,
    derive_visibility,
    iou,
    pairwise_iou,
)

__version__ = "0.1.0"

__all__ = [
    "Benchmark",
    "Box",
    "BoxEntry",
    "Counts",
    "DEFAULT_OCCLUDER_CLASSES",
    "EvalUnit",
    "EventLog",
    "FileKind",
    "FormatSchema",
    "FormatVariant",
    "FrameEvents",
    "IdentityScores",
    "IngestError",
    "MatchingConfig",
    "MetricsReport",
    "NEUTRAL_CLASSES",
    "ObjectClass",
    "PRCurve",
    "PRPoint",
    "ParseError",
    "Rates",
    "SequenceData",
    "SequenceSet",
    "TrackMatchTable",
    "UndefinedMetricError",
    "ValidationReport",
    "accumulate",
    "average_precision",
    "build_table",
    "derive_visibility",
    "derived_rates",
    "evaluate_identity",
    "export_curve",
    "iou",
    "load_sequence_set",
    "match_frame",
    "mota",
    "motp",
    "pairwise_iou",
    "parse_file",
    "pool",
    "pool_identity",
    "pr_curve",
    "preprocess_frame",
    "preprocess_sequence",
    "read_seqmap",
    "run_sequence",
    "solve_identity",
    "summarize",
    "validate_submission",
    "write_result_file",
]
