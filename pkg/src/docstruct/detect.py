"""Detect stage: group text-lines into ordered, role-labelled regions."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .geometry import union_all
from .model import (
    GRAPHIC_ROLE,
    BBox,
    Document,
    GraphicalObject,
    LogicalRole,
    Region,
    RelationEdge,
    RelationKind,
    ScoreMatrix,
    TextLine,
)
from .scoring import Scorer


@dataclass(frozen=True)
class ChainDecodeResult:
    """One successor edge per element; ``src == dst`` means "no successor"."""

    edges: tuple[RelationEdge, ...]

    def targets(self) -> dict[int, int]:
        return {e.src: e.dst for e in self.edges}

    @property
    def ids(self) -> list[int]:
        return [e.src for e in self.edges]


def decode_succ(m: ScoreMatrix, kind: RelationKind = RelationKind.SUCC) -> ChainDecodeResult:
    """Pick the highest-scoring partner in every row; ties go to the lowest column."""
    edges = []
    for a, row in zip(m.ids, m.rows):
        best = 0
        for j in range(1, len(row)):
            if row[j] > row[best]:
                best = j
        edges.append(RelationEdge(a, m.cols[best], kind, float(row[best])))
    return ChainDecodeResult(tuple(edges))


def fuse_bidirectional(succ: ChainDecodeResult, pred: ChainDecodeResult) -> frozenset[tuple[int, int]]:
    """Merge successor and predecessor decodings into chain links.

    Links are returned oriented in reading direction ``(earlier, later)``.
    Predecessor edges are reversed; where the two heads disagree about an
    element's partner, the higher-scoring edge wins.
    """
    if set(succ.ids) != set(pred.ids):
        raise ValueError("successor and predecessor decodings cover different ids")
    proposals: dict[tuple[int, int], float] = {}
    for e in succ.edges:
        if not e.is_self_loop:
            key = (e.src, e.dst)
            proposals[key] = max(proposals.get(key, 0.0), e.score)
    for e in pred.edges:
        if not e.is_self_loop:
            key = (e.dst, e.src)
            proposals[key] = max(proposals.get(key, 0.0), e.score)
    has_next: set[int] = set()
    has_prev: set[int] = set()
    links = set()
    for (a, b), _ in sorted(proposals.items(), key=lambda kv: (-kv[1], kv[0])):
        if a in has_next or b in has_prev:
            continue
        has_next.add(a)
        has_prev.add(b)
        links.add((a, b))
    return frozenset(links)


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, items: Iterable[int] = ()):
        self.parent: dict[int, int] = {}
        self.size: dict[int, int] = {}
        for x in items:
            self.add(x)

    def add(self, x: int) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x: int) -> int:
        self.add(x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def group_lines(links: Iterable[tuple[int, int]], ids: Iterable[int]) -> list[list[int]]:
    """Connected components of the link graph; isolated ids become singletons.

    Components are returned in order of their first id in ``ids``.
    """
    ids = list(ids)
    uf = UnionFind(ids)
    known = set(ids)
    for a, b in links:
        if a not in known or b not in known:
            raise ValueError(f"link ({a}, {b}) references an unknown id")
        uf.union(a, b)
    pos = {x: i for i, x in enumerate(ids)}
    groups = [sorted(g, key=pos.__getitem__) for g in uf.groups()]
    groups.sort(key=lambda g: pos[g[0]])
    return groups


def _geometric_key(bboxes: Mapping[int, tuple[int, BBox]]):
    def key(x: int):
        page, b = bboxes[x]
        return (page, b.y1, b.x1, x)

    return key


def order_within_region(
    group: Sequence[int],
    succ: ChainDecodeResult | Mapping[int, int] | Iterable[tuple[int, int]],
    bboxes: Mapping[int, tuple[int, BBox]],
) -> list[int]:
    """Order a region's lines along the decoded chain.

    ``succ`` may be a decode result, a successor map or directed links.
    When the links inside the group do not form one simple path the lines are
    sorted by (page, top, left) instead.
    """
    if len(group) == 1:
        return list(group)
    members = set(group)
    if isinstance(succ, ChainDecodeResult):
        pairs = succ.targets().items()
    elif isinstance(succ, Mapping):
        pairs = succ.items()
    else:
        pairs = succ
    nxt: dict[int, int] = {}
    indeg: Counter = Counter()
    simple = True
    for a, b in pairs:
        if a == b or a not in members or b not in members:
            continue
        if a in nxt:
            simple = False
            break
        nxt[a] = b
        indeg[b] += 1
    if simple:
        heads = [x for x in group if indeg[x] == 0]
        if len(heads) == 1 and all(indeg[x] <= 1 for x in group):
            path = [heads[0]]
            seen = {heads[0]}
            while path[-1] in nxt:
                y = nxt[path[-1]]
                if y in seen:
                    break
                path.append(y)
                seen.add(y)
            if len(path) == len(members):
                return path
    return sorted(group, key=_geometric_key(bboxes))


def vote_role(line_roles: Sequence[LogicalRole]) -> LogicalRole:
    """Most frequent role; ties go to the tied role that appears first."""
    if not line_roles:
        raise ValueError("cannot vote on an empty region")
    counts = Counter(line_roles)
    top = max(counts.values())
    return next(r for r in line_roles if counts[r] == top)


def inside_graphic(line: TextLine, graphics: Sequence[GraphicalObject]) -> bool:
    x, y = line.bbox.xc, line.bbox.yc
    return any(g.page == line.page and g.bbox.contains_point(x, y) for g in graphics)


def filter_lines(doc: Document) -> list[TextLine]:
    """Lines whose center does not fall inside a graphical object."""
    return [ln for ln in doc.lines if not inside_graphic(ln, doc.graphics)]


def graphic_region(g: GraphicalObject) -> Region:
    return Region(id=g.id, role=GRAPHIC_ROLE.get(g.cls, LogicalRole.OTHER), bbox=g.bbox, page=g.page, graphic=g.id)


def build_regions(
    doc: Document,
    succ_m: ScoreMatrix,
    pred_m: ScoreMatrix,
    role_scores: Mapping[int, LogicalRole],
    lines: Sequence[TextLine] | None = None,
) -> list[Region]:
    """Decode text regions from line relation scores, then append one region per graphic.

    A text region takes the id of its first line; a graphical region takes
    the id of its object.
    """
    if lines is None:
        lines = filter_lines(doc)
    ids = [ln.id for ln in lines]
    by_id = {ln.id: ln for ln in lines}
    if ids:
        succ_m = succ_m.restrict(ids) if set(succ_m.ids) != set(ids) else succ_m
        pred_m = pred_m.restrict(ids) if set(pred_m.ids) != set(ids) else pred_m
        links = fuse_bidirectional(decode_succ(succ_m), decode_succ(pred_m, RelationKind.PRED))
    else:
        links = frozenset()
    bboxes = {ln.id: (ln.page, ln.bbox) for ln in lines}
    regions = []
    for group in group_lines(links, ids):
        ordered = order_within_region(group, links, bboxes)
        role = vote_role([role_scores.get(x, LogicalRole.PARAGRAPH) for x in ordered])
        first = by_id[ordered[0]]
        regions.append(
            Region(
                id=first.id,
                role=role,
                bbox=union_all(by_id[x].bbox for x in ordered),
                page=first.page,
                lines=tuple(ordered),
            )
        )
    regions.sort(key=lambda r: (r.page, r.bbox.y1, r.bbox.x1, r.id))
    regions.extend(graphic_region(g) for g in doc.graphics)
    return regions


def detect(doc: Document, scorer: Scorer) -> list[Region]:
    lines = filter_lines(doc)
    if not lines:
        return [graphic_region(g) for g in doc.graphics]
    succ_m, pred_m = scorer.line_relations(doc, lines)
    return build_regions(doc, succ_m, pred_m, scorer.line_roles(doc, lines), lines)
