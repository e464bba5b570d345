"""Order stage: inter-region reading order and relation types -> reading-order groups."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .detect import ChainDecodeResult, UnionFind, decode_succ
from .geometry import x_overlap
from .model import (
    FURNITURE_ROLES,
    GroupCategory,
    ReadingOrderGroup,
    Region,
    RelationEdge,
    RelationLabel,
    RelationTypeDistribution,
    ScoreMatrix,
)
from .scoring import Scorer


@dataclass(frozen=True)
class OrderResult:
    groups: tuple[ReadingOrderGroup, ...]
    links: tuple[RelationEdge, ...] = ()

    def text_groups(self) -> list[ReadingOrderGroup]:
        return [g for g in self.groups if g.category is GroupCategory.TEXT]

    def graphical_groups(self) -> list[ReadingOrderGroup]:
        return [g for g in self.groups if g.category is GroupCategory.GRAPHICAL]


def decode_inter_succ(m: ScoreMatrix) -> ChainDecodeResult:
    return decode_succ(m)


def classify_links(edges: ChainDecodeResult, dist: RelationTypeDistribution) -> list[RelationEdge]:
    """Label every non-self edge with its most likely relation type, dropping ``none``."""
    out = []
    for e in edges.edges:
        if e.is_self_loop:
            continue
        if (e.src, e.dst) not in dist.probs:
            raise KeyError(f"no relation-type distribution for pair ({e.src}, {e.dst})")
        label = dist.label(e.src, e.dst)
        if label is RelationLabel.NONE:
            continue
        out.append(RelationEdge(e.src, e.dst, e.kind, e.score, label))
    return out


def region_key(r: Region):
    return (r.page, r.bbox.y1, r.bbox.x1, r.id)


def _break_text_chains(edges: list[RelationEdge]) -> list[RelationEdge]:
    """Reduce successor edges to disjoint simple paths.

    A region claimed by several predecessors keeps the best-scoring one;
    each remaining cycle loses its weakest edge.
    """
    best_in: dict[int, RelationEdge] = {}
    for e in sorted(edges, key=lambda e: (-e.score, e.src)):
        best_in.setdefault(e.dst, e)
    nxt = {e.src: e for e in best_in.values()}
    done: set[int] = set()
    for start in sorted(nxt):
        if start in done:
            continue
        trail = []
        x = start
        while x in nxt and x not in done and x not in trail:
            trail.append(x)
            x = nxt[x].dst
        if x in trail:
            cycle = [nxt[y] for y in trail[trail.index(x):]]
            weakest = min(cycle, key=lambda e: (e.score, e.src))
            del nxt[weakest.src]
        done.update(trail)
    return list(nxt.values())


def build_groups(labeled: Sequence[RelationEdge], regions: Sequence[Region]) -> OrderResult:
    """Turn labelled links into text-region and graphical-region groups.

    Graphical links are kept only between a graphical object and a text
    region. Each object heads a group followed by its linked regions in
    descending link score. Text links between remaining text regions form
    chains; any region left over becomes a singleton group of its category.
    """
    rmap = {r.id: r for r in regions}
    graphical_links = [
        e
        for e in labeled
        if e.label is RelationLabel.GRAPHICAL_LINK
        and e.src in rmap
        and e.dst in rmap
        and rmap[e.src].is_graphical != rmap[e.dst].is_graphical
    ]
    uf = UnionFind()
    link_score: dict[int, float] = {}
    for e in graphical_links:
        uf.union(e.src, e.dst)
        for end in (e.src, e.dst):
            if not rmap[end].is_graphical:
                link_score[end] = max(link_score.get(end, 0.0), e.score)
    graphical_groups = []
    attached: set[int] = set()
    for comp in uf.groups():
        objects = sorted((rmap[x] for x in comp if rmap[x].is_graphical), key=region_key)
        linked = sorted(
            (rmap[x] for x in comp if not rmap[x].is_graphical),
            key=lambda r: (-link_score[r.id], *region_key(r)),
        )
        attached.update(r.id for r in linked)
        graphical_groups.append(tuple(r.id for r in objects + linked))
    grouped = {x for g in graphical_groups for x in g}
    for r in regions:
        if r.is_graphical and r.id not in grouped:
            graphical_groups.append((r.id,))

    text_ids = {r.id for r in regions if not r.is_graphical and r.id not in attached}
    text_links = [
        e
        for e in labeled
        if e.label is RelationLabel.TEXT_ORDER and e.src in text_ids and e.dst in text_ids
    ]
    kept = _break_text_chains(text_links)
    nxt = {e.src: e.dst for e in kept}
    has_pred = set(nxt.values())
    text_groups = []
    for rid in sorted(text_ids):
        if rid in has_pred:
            continue
        chain = [rid]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        text_groups.append(tuple(chain))

    text_groups.sort(key=lambda g: region_key(rmap[g[0]]))
    graphical_groups.sort(key=lambda g: region_key(rmap[g[0]]))
    groups = [ReadingOrderGroup(GroupCategory.TEXT, g) for g in text_groups]
    groups += [ReadingOrderGroup(GroupCategory.GRAPHICAL, g) for g in graphical_groups]
    return OrderResult(tuple(groups), tuple(kept) + tuple(graphical_links))


def precedes_on_page(r: Region, anchor: Region) -> bool:
    """``r`` is read before ``anchor``: same page and wholly left of it or above it in its column."""
    if r.page != anchor.page:
        return False
    if r.bbox.x2 <= anchor.bbox.x1:
        return True
    return x_overlap(r.bbox, anchor.bbox) > 0 and r.bbox.y2 <= anchor.bbox.y1


def reading_sequence(result: OrderResult, regions: Sequence[Region] | Mapping[int, Region]) -> list[int]:
    """Flatten groups into one sequence of region ids.

    Text groups are concatenated in order. Each graphical group is spliced in
    after the last body text region that precedes its object on the same
    page; if none does, after the last body region of that page, else after
    the last one of an earlier page. Page headers and footers never anchor a
    splice.
    """
    rmap = regions if isinstance(regions, Mapping) else {r.id: r for r in regions}
    text_seq = [m for g in result.text_groups() for m in g.members]
    body = [(i, rmap[m]) for i, m in enumerate(text_seq) if rmap[m].role not in FURNITURE_ROLES]
    splice: dict[int, list[tuple[int, ...]]] = {}
    for g in sorted(result.graphical_groups(), key=lambda g: region_key(rmap[g.members[0]])):
        anchor = rmap[g.members[0]]
        before = [i for i, r in body if precedes_on_page(r, anchor)]
        if not before:
            before = [i for i, r in body if r.page == anchor.page]
        if not before:
            before = [i for i, r in body if r.page < anchor.page]
        at = max(before) if before else -1
        splice.setdefault(at, []).append(g.members)
    out = [m for members in splice.get(-1, []) for m in members]
    for i, m in enumerate(text_seq):
        out.append(m)
        for members in splice.get(i, []):
            out.extend(members)
    return out


def order(doc, regions: Sequence[Region], scorer: Scorer) -> OrderResult:
    if not regions:
        return OrderResult(())
    m, dist = scorer.region_relations(doc, regions)
    labeled = classify_links(decode_inter_succ(m), dist)
    return build_groups(labeled, regions)
