"""Log model of software supply chains and security status propagation."""

from .engine import EvaluationContext, InvalidGraph, Result, combine, evaluate, merge_results
from .graph import (
    ArtifactIdentity,
    Edge,
    EdgeKind,
    LogModel,
    ValidationReport,
    Vertex,
    VertexKind,
)
from .knowledge import Category, KnowledgeBase, Selector
from .status import MALICIOUS, SAFE, VULNERABLE, SecurityStatus, max_status

__all__ = [
    "ArtifactIdentity",
    "Category",
    "Edge",
    "EdgeKind",
    "EvaluationContext",
    "InvalidGraph",
    "KnowledgeBase",
    "LogModel",
    "MALICIOUS",
    "Result",
    "SAFE",
    "SecurityStatus",
    "Selector",
    "VULNERABLE",
    "ValidationReport",
    "Vertex",
    "VertexKind",
    "combine",
    "evaluate",
    "max_status",
    "merge_results",
]

__version__ = "0.1.0"
