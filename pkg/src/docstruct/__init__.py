"""Hierarchical document structure parsing: Detect, Order, Construct."""
from .model import (
    ROOT,
    BBox,
    Document,
    GraphicalObject,
    GroupCategory,
    LogicalRole,
    Page,
    ReadingOrderGroup,
    Region,
    ScoreMatrix,
    Structure,
    TextLine,
    TreeNode,
)
from .pipeline import run_construct, run_detect, run_order, run_pipeline
from .scoring import FileScorer, HeuristicScorer, OracleScorer

__all__ = [
    "ROOT",
    "BBox",
    "Document",
    "GraphicalObject",
    "GroupCategory",
    "LogicalRole",
    "Page",
    "ReadingOrderGroup",
    "Region",
    "ScoreMatrix",
    "Structure",
    "TextLine",
    "TreeNode",
    "run_detect",
    "run_order",
    "run_construct",
    "run_pipeline",
    "FileScorer",
    "HeuristicScorer",
    "OracleScorer",
]
__version__ = "0.1.0"
