"""Clinical note quality metrics: defect-free rates, the recall/precision
funnel, user-acceptance edit rates, medical word hit rate and the DeepScore
composite."""

from .align import Alignment, AlignmentOp, Op, Token, align, tokenize
from .edit_metrics import EditBreakdown, NoteEditPair, Segment, compute_mnr, edit_breakdown, segment_of
from .entity_metrics import FunnelResult, StatRatesResult, compute_funnel, compute_stat_rates
from .model import (
    AuditedEntity,
    Defect,
    DefectKind,
    Encounter,
    Entity,
    Inaccurate,
    MissingInformation,
    Other,
    Severity,
    Snippet,
    TestSet,
    severity_from_level,
    validate_test_set,
)
from .scorecard import ComponentMetrics, DeepScore, Scorecard, compute_deepscore, render_scorecard
from .transcription import MedicalTermAnnotation, MwhrResult, QcRecord, annotate, compute_mwhr

__all__ = [
    "Alignment",
    "AlignmentOp",
    "Op",
    "Token",
    "align",
    "tokenize",
    "EditBreakdown",
    "NoteEditPair",
    "Segment",
    "compute_mnr",
    "edit_breakdown",
    "segment_of",
    "FunnelResult",
    "StatRatesResult",
    "compute_funnel",
    "compute_stat_rates",
    "AuditedEntity",
    "Defect",
    "DefectKind",
    "Encounter",
    "Entity",
    "Inaccurate",
    "MissingInformation",
    "Other",
    "Severity",
    "Snippet",
    "TestSet",
    "severity_from_level",
    "validate_test_set",
    "ComponentMetrics",
    "DeepScore",
    "Scorecard",
    "compute_deepscore",
    "render_scorecard",
    "MedicalTermAnnotation",
    "MwhrResult",
    "QcRecord",
    "annotate",
    "compute_mwhr",
]

__version__ = "0.1.0"
