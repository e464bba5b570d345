"""Semantic tree-edit-distance similarity for TOC and hierarchy trees."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from rapidfuzz.distance import Levenshtein

from ..model import ROOT, LogicalRole, Region, TreeNode
from .ted import tree_edit_distance


def semantic_cost(a: TreeNode, b: TreeNode) -> float:
    """Relabel cost: text dissimilarity when roles agree, otherwise 1."""
    if (a.id == ROOT) != (b.id == ROOT):
        return 1.0
    if a.id == ROOT:
        return 0.0
    if a.role != b.role:
        return 1.0
    if a.text == b.text:
        return 0.0
    return 1.0 - Levenshtein.normalized_similarity(a.text or "", b.text or "")


def steds_parts(pred: TreeNode, gt: TreeNode) -> tuple[float, int]:
    """(edit distance, normalizer) with the normalizer the larger non-root size."""
    size = max(pred.size(), gt.size())
    if size == 0:
        return 0.0, 0
    if pred == gt:
        return 0.0, size
    return tree_edit_distance(pred, gt, semantic_cost), size


def steds(pred: TreeNode, gt: TreeNode) -> float:
    dist, size = steds_parts(pred, gt)
    if size == 0:
        return 1.0
    return max(0.0, 1.0 - dist / size)


@dataclass
class StedsReport:
    scores: list[float] = field(default_factory=list)
    sizes: list[int] = field(default_factory=list)

    def add(self, pred: TreeNode, gt: TreeNode) -> float:
        dist, size = steds_parts(pred, gt)
        score = 1.0 if size == 0 else max(0.0, 1.0 - dist / size)
        self.scores.append(score)
        self.sizes.append(size)
        return score

    @property
    def micro(self) -> float:
        total = sum(self.sizes)
        if total == 0:
            return 1.0
        return sum(s * n for s, n in zip(self.scores, self.sizes)) / total

    @property
    def macro(self) -> float:
        return sum(self.scores) / len(self.scores) if self.scores else 1.0

    def to_dict(self) -> dict:
        return {"per_document": self.scores, "micro": self.micro, "macro": self.macro}


def toc_with_payload(toc: TreeNode, regions: Sequence[Region], texts: Mapping[int, str]) -> TreeNode:
    """Attach (role, heading text) payloads to a bare TOC tree."""
    rmap = {r.id: r for r in regions}

    def walk(node: TreeNode) -> TreeNode:
        kids = tuple(walk(c) for c in node.children)
        if node.id == ROOT:
            return TreeNode(ROOT, kids)
        r = rmap.get(node.id)
        text = " ".join(texts.get(i, "") for i in r.lines) if r else ""
        return TreeNode(node.id, kids, r.role if r else LogicalRole.SECTION, text)

    return walk(toc)
