from .assignment import hungarian
from .edit import levenshtein, normalized_similarity
from .reds import PARAGRAPH_END, RedsReport, match_graphics, reds, tokenize_group
from .steds import StedsReport, semantic_cost, steds, toc_with_payload
from .ted import tree_edit_distance

__all__ = [
    "PARAGRAPH_END",
    "RedsReport",
    "StedsReport",
    "hungarian",
    "levenshtein",
    "match_graphics",
    "normalized_similarity",
    "reds",
    "semantic_cost",
    "steds",
    "toc_with_payload",
    "tokenize_group",
    "tree_edit_distance",
]
