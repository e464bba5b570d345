"""Reading edit distance score over reading-order groups."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from ..geometry import iou
from ..model import GraphicalObject, GroupCategory, ReadingOrderGroup, Region
from .assignment import hungarian
from .edit import levenshtein

PARAGRAPH_END = "</p>"


@dataclass
class RedsReport:
    category: GroupCategory
    distance: int
    units: int
    pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def score(self) -> float:
        if self.units == 0:
            return 1.0 if self.distance == 0 else 0.0
        return max(0.0, 1.0 - self.distance / self.units)

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "D": self.distance,
            "N": self.units,
            "score": self.score,
            "matched_groups": [list(p) for p in self.pairs],
        }


def tokenize_group(
    group: ReadingOrderGroup,
    regions: Mapping[int, Region],
    graphic_ids: Mapping[int, Hashable] | None = None,
) -> list[Hashable]:
    """Expand a group into evaluation units.

    Text groups yield each region's line ids followed by a paragraph-end tag;
    graphical groups yield object ids and linked line ids without tags.
    ``graphic_ids`` renames object ids (cross-document matching).
    """
    if not group.members:
        raise ValueError("cannot tokenize an empty group")
    out: list[Hashable] = []
    for rid in group.members:
        if rid not in regions:
            raise KeyError(f"group member {rid} is not a known region")
        r = regions[rid]
        if r.is_graphical:
            out.append(graphic_ids.get(r.graphic, r.graphic) if graphic_ids else r.graphic)
        else:
            out.extend(r.lines)
        if group.category is GroupCategory.TEXT:
            out.append(PARAGRAPH_END)
    return out


def group_distance(pred: Sequence[Sequence[Hashable]], gt: Sequence[Sequence[Hashable]]):
    """Hungarian-matched total Levenshtein distance; unmatched groups cost their length."""
    cost = [[levenshtein(p, g) for g in gt] for p in pred]
    pairs, total = hungarian(cost, [len(p) for p in pred], [len(g) for g in gt])
    return pairs, int(round(total))


def reds(
    pred_groups: Sequence[ReadingOrderGroup],
    gt_groups: Sequence[ReadingOrderGroup],
    pred_regions: Sequence[Region] | Mapping[int, Region],
    gt_regions: Sequence[Region] | Mapping[int, Region] | None = None,
    graphic_ids: Mapping[int, Hashable] | None = None,
) -> dict[GroupCategory, RedsReport]:
    """One report per group category; units are counted on the ground-truth side."""
    pmap = pred_regions if isinstance(pred_regions, Mapping) else {r.id: r for r in pred_regions}
    if gt_regions is None:
        gmap = pmap
    else:
        gmap = gt_regions if isinstance(gt_regions, Mapping) else {r.id: r for r in gt_regions}
    out = {}
    for cat in GroupCategory:
        p = [tokenize_group(g, pmap, graphic_ids) for g in pred_groups if g.category is cat]
        g = [tokenize_group(x, gmap) for x in gt_groups if x.category is cat]
        pairs, dist = group_distance(p, g)
        out[cat] = RedsReport(cat, dist, sum(len(x) for x in g), pairs)
    return out


def match_graphics(
    pred: Sequence[GraphicalObject], gt: Sequence[GraphicalObject], threshold: float = 0.5
) -> dict[int, Hashable]:
    """Greedy one-to-one IoU matching of graphical objects on the same page.

    Matched predicted ids map to their ground-truth id; unmatched ones map to
    a token that equals nothing on the ground-truth side.
    """
    cands = []
    for a in pred:
        for b in gt:
            if a.page == b.page:
                v = iou(a.bbox, b.bbox)
                if v >= threshold:
                    cands.append((-v, a.id, b.id))
    cands.sort()
    out: dict[int, Hashable] = {}
    used = set()
    for _, a, b in cands:
        if a in out or b in used:
            continue
        out[a] = b
        used.add(b)
    for a in pred:
        out.setdefault(a.id, ("unmatched", a.id))
    return out
