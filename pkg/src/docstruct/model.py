"""Shared data model: page elements, regions, score matrices, trees.

Everything here is plain immutable value data. JSON (de)serialization for the
document schema lives in :mod:`docstruct.io`.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

ROOT = -1


class LogicalRole(str, enum.Enum):
    TITLE = "title"
    AUTHOR = "author"
    MAIL = "mail"
    AFFILIATION = "affiliation"
    SECTION = "section"
    PARAGRAPH = "paragraph"
    CAPTION = "caption"
    FOOTNOTE = "footnote"
    HEADER = "header"
    FOOTER = "footer"
    TABLE = "table"
    FIGURE = "figure"
    EQUATION = "equation"
    OTHER = "other"


GRAPHIC_CLASSES = ("table", "figure", "equation-block", "other")

GRAPHIC_ROLE = {
    "table": LogicalRole.TABLE,
    "figure": LogicalRole.FIGURE,
    "equation-block": LogicalRole.EQUATION,
    "other": LogicalRole.OTHER,
}

# Regions with these roles take part in graphical-region links rather than text chains.
LINKED_ROLES = frozenset({LogicalRole.CAPTION, LogicalRole.FOOTNOTE})
# Page furniture never participates in a reading-order chain.
FURNITURE_ROLES = frozenset({LogicalRole.HEADER, LogicalRole.FOOTER})


@dataclass(frozen=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def w(self) -> float:
        return self.x2 - self.x1

    @property
    def h(self) -> float:
        return self.y2 - self.y1

    @property
    def xc(self) -> float:
        return (self.x1 + self.x2) / 2

    @property
    def yc(self) -> float:
        return (self.y1 + self.y2) / 2

    def is_valid(self) -> bool:
        coords = (self.x1, self.y1, self.x2, self.y2)
        return all(math.isfinite(c) for c in coords) and self.x1 <= self.x2 and self.y1 <= self.y2

    def contains_point(self, x: float, y: float) -> bool:
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]


@dataclass(frozen=True)
class TextLine:
    id: int
    page: int
    bbox: BBox
    text: str = ""


@dataclass(frozen=True)
class GraphicalObject:
    id: int
    page: int
    bbox: BBox
    cls: str = "figure"


@dataclass(frozen=True)
class Page:
    index: int
    width: float
    height: float


@dataclass(frozen=True)
class Region:
    """A text region (ordered lines) or a graphical page object."""

    id: int
    role: LogicalRole
    bbox: BBox
    page: int
    lines: tuple[int, ...] = ()
    graphic: int | None = None

    @property
    def is_graphical(self) -> bool:
        return self.graphic is not None


class GroupCategory(str, enum.Enum):
    TEXT = "text-region"
    GRAPHICAL = "graphical-region"


@dataclass(frozen=True)
class ReadingOrderGroup:
    category: GroupCategory
    members: tuple[int, ...]


class RelationKind(str, enum.Enum):
    SUCC = "succ"
    PRED = "pred"
    PARENT = "parent"
    SIBLING = "sibling"
    RELATION_TYPE = "relation-type"


class RelationLabel(str, enum.Enum):
    TEXT_ORDER = "text-region-order"
    GRAPHICAL_LINK = "graphical-region-link"
    NONE = "none"


RELATION_LABELS = (RelationLabel.TEXT_ORDER, RelationLabel.GRAPHICAL_LINK, RelationLabel.NONE)


@dataclass(frozen=True)
class RelationEdge:
    src: int
    dst: int
    kind: RelationKind = RelationKind.SUCC
    score: float = 1.0
    label: RelationLabel | None = None

    @property
    def is_self_loop(self) -> bool:
        return self.src == self.dst


@dataclass(frozen=True)
class TreeNode:
    """Node of an ordered tree. ``id == ROOT`` marks the sentinel root.

    TOC trees leave ``role``/``text`` unset; hierarchy trees fill them in.
    """

    id: int
    children: tuple["TreeNode", ...] = ()
    role: LogicalRole | None = None
    text: str = ""

    def preorder(self) -> Iterator["TreeNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def preorder_ids(self, include_root: bool = False) -> list[int]:
        ids = [n.id for n in self.preorder()]
        return ids if include_root else ids[1:]

    def size(self) -> int:
        """Number of nodes below the root sentinel."""
        return sum(1 for _ in self.preorder()) - 1


def empty_tree() -> TreeNode:
    return TreeNode(ROOT)


@dataclass(frozen=True)
class Document:
    pages: tuple[Page, ...]
    lines: tuple[TextLine, ...] = ()
    graphics: tuple[GraphicalObject, ...] = ()

    def line_map(self) -> dict[int, TextLine]:
        return {ln.id: ln for ln in self.lines}

    def graphic_map(self) -> dict[int, GraphicalObject]:
        return {g.id: g for g in self.graphics}

    def page_size(self, index: int) -> tuple[float, float]:
        for p in self.pages:
            if p.index == index:
                return p.width, p.height
        raise KeyError(f"no page with index {index}")


@dataclass(frozen=True)
class Structure:
    """Regions, groups and trees of a document (ground truth or prediction)."""

    regions: tuple[Region, ...] = ()
    groups: tuple[ReadingOrderGroup, ...] = ()
    toc: TreeNode | None = None
    hierarchy: TreeNode | None = None
    reading_order: tuple[int, ...] | None = None

    def region_map(self) -> dict[int, Region]:
        return {r.id: r for r in self.regions}


@dataclass(frozen=True)
class Violation:
    element: int | None
    rule: str

    def __str__(self) -> str:
        where = "document" if self.element is None else f"element {self.element}"
        return f"{where}: {self.rule}"


def validate_document(doc: Document) -> list[Violation]:
    """Check the document invariants; an empty list means the document is well formed."""
    out: list[Violation] = []
    page_idx = set()
    for p in doc.pages:
        if p.index in page_idx:
            out.append(Violation(None, f"duplicate page index {p.index}"))
        page_idx.add(p.index)
        if not (p.width > 0 and p.height > 0):
            out.append(Violation(None, f"page {p.index} has non-positive size"))

    counts = Counter([ln.id for ln in doc.lines] + [g.id for g in doc.graphics])
    for ident, n in sorted(counts.items()):
        if n > 1:
            out.append(Violation(ident, f"duplicate id {ident}"))
        if ident < 0:
            out.append(Violation(ident, f"negative id {ident}"))

    for el in (*doc.lines, *doc.graphics):
        if not el.bbox.is_valid():
            out.append(Violation(el.id, "inverted bbox"))
        if el.page not in page_idx:
            out.append(Violation(el.id, f"page index {el.page} out of range"))
    for g in doc.graphics:
        if g.cls not in GRAPHIC_CLASSES:
            out.append(Violation(g.id, f"unknown graphic class {g.cls!r}"))
    return out


@dataclass(frozen=True)
class ScoreMatrix:
    """Row-stochastic relation scores.

    ``rows[i][j]`` scores column element ``cols[j]`` as the partner of row
    element ``ids[i]``. ``cols`` defaults to ``ids``; the TOC parent matrix
    carries an extra leading ROOT column.
    """

    ids: tuple[int, ...]
    rows: tuple[tuple[float, ...], ...]
    cols: tuple[int, ...] | None = None
    kind: str = ""

    def __post_init__(self):
        if self.cols is None:
            object.__setattr__(self, "cols", self.ids)

    @property
    def n(self) -> int:
        return len(self.ids)

    def row_index(self) -> dict[int, int]:
        return {ident: i for i, ident in enumerate(self.ids)}

    def col_index(self) -> dict[int, int]:
        return {ident: j for j, ident in enumerate(self.cols)}

    def score(self, src: int, dst: int) -> float:
        return self.rows[self.row_index()[src]][self.col_index()[dst]]

    def restrict(self, keep: Sequence[int]) -> "ScoreMatrix":
        """Sub-matrix over ``keep`` (rows and columns), renormalized per row.

        Square matrices only. A row whose mass falls entirely on dropped
        columns becomes a self-loop.
        """
        ri = self.row_index()
        ci = self.col_index()
        rows = []
        for a in keep:
            src = self.rows[ri[a]]
            vals = [src[ci[b]] for b in keep]
            total = sum(vals)
            if total > 0:
                rows.append(tuple(v / total for v in vals))
            else:
                rows.append(tuple(1.0 if b == a else 0.0 for b in keep))
        return ScoreMatrix(tuple(keep), tuple(rows), kind=self.kind)


@dataclass
class RelationTypeDistribution:
    """Per ordered pair probabilities over (text-region-order, graphical-region-link, none)."""

    probs: dict[tuple[int, int], tuple[float, float, float]] = field(default_factory=dict)

    def label(self, src: int, dst: int) -> RelationLabel:
        p = self.probs[(src, dst)]
        best = max(range(len(p)), key=lambda k: (p[k], -k))
        return RELATION_LABELS[best]
