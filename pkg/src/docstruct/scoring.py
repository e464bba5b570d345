"""Relation scorers.

A scorer turns page elements into row-stochastic score matrices for the
decoders. Three interchangeable sources exist:

* :class:`HeuristicScorer` - deterministic geometric/keyword rules,
* :class:`FileScorer` - matrices precomputed by an external model,
* :class:`OracleScorer` - indicator matrices read off ground truth (tests).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from statistics import median
from typing import Sequence

import numpy as np

from . import io
from .geometry import same_column, x_overlap
from .model import (
    FURNITURE_ROLES,
    LINKED_ROLES,
    RELATION_LABELS,
    ROOT,
    BBox,
    Document,
    GroupCategory,
    LogicalRole,
    Region,
    RelationLabel,
    RelationTypeDistribution,
    ScoreMatrix,
    Structure,
    TextLine,
    TreeNode,
)

SCORER_KINDS = (
    "intra-succ",
    "intra-pred",
    "inter-succ",
    "inter-relation-type",
    "toc-parent",
    "toc-sibling",
    "role",
)

# Raw-score layout for the geometric rules: a candidate of rank r gets
# -(r * RANK_STEP + d) with d in [0, RANK_STEP - 1); the self column sits
# below every qualified candidate.
RANK_STEP = 4.0
SELF_RAW = -3 * RANK_STEP
OFF_RAW = -RANK_STEP
SPAN_RATIO = 0.5


def row_softmax(raw, mask=None, ids: Sequence[int] | None = None, kind: str = "", cols=None) -> ScoreMatrix:
    """Softmax every row of ``raw``; entries with ``mask == False`` get zero mass."""
    f = np.asarray(raw, dtype=float)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-d score array, got shape {f.shape}")
    m = np.ones_like(f, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if m.shape != f.shape:
        raise ValueError(f"mask shape {m.shape} does not match scores {f.shape}")
    dead = np.flatnonzero(~m.any(axis=1))
    if dead.size:
        raise ValueError(f"row {int(dead[0])} is fully masked")
    shifted = np.where(m, f, -np.inf)
    shifted = shifted - shifted.max(axis=1, keepdims=True)
    e = np.where(m, np.exp(shifted), 0.0)
    s = e / e.sum(axis=1, keepdims=True)
    if ids is None:
        ids = range(f.shape[0])
    return ScoreMatrix(
        tuple(ids),
        tuple(tuple(float(v) for v in row) for row in s),
        cols=None if cols is None else tuple(cols),
        kind=kind,
    )


def _indicator(ids: Sequence[int], target: dict[int, int], kind: str, cols=None) -> ScoreMatrix:
    cols = tuple(ids) if cols is None else tuple(cols)
    ci = {c: j for j, c in enumerate(cols)}
    rows = []
    for a in ids:
        t = target.get(a, a)
        if t not in ci:
            t = a if a in ci else cols[0]
        rows.append(tuple(1.0 if c == t else 0.0 for c in cols))
    return ScoreMatrix(tuple(ids), tuple(rows), cols=cols, kind=kind)


# -- reading-order geometry ------------------------------------------------------

@dataclass(frozen=True)
class _El:
    id: int
    bbox: BBox
    page: int


def _is_below(a: BBox, b: BBox) -> bool:
    tol = 0.25 * min(a.h, b.h)
    return b.y1 >= a.y2 - tol


def _in_column(a: BBox, b: BBox, ratio: float, W: float) -> bool:
    """Same column, or one box spans the page and overlaps the other horizontally."""
    if same_column(a, b, ratio):
        return True
    return max(a.w, b.w) >= SPAN_RATIO * W and x_overlap(a, b) > 0


def _column_ranked(cands: list[_El], W: float, H: float) -> dict[int, float]:
    """Distance within a rank for candidates in later columns / pages.

    Elements in the leftmost column (relative to the leftmost candidate) come
    first, topmost first within a column.
    """
    if not cands:
        return {}
    lead = min(cands, key=lambda e: (e.bbox.x1, e.bbox.y1, e.id))
    out = {}
    for e in cands:
        y = min(max(e.bbox.y1 / H, 0.0), 0.99)
        if same_column(e.bbox, lead.bbox):
            out[e.id] = y
        else:
            out[e.id] = 1.0 + min(max((e.bbox.x1 - lead.bbox.x1) / W, 0.0), 0.99) + y
    return out


def _reading_raw(
    els: list[_El], sizes: dict[int, tuple[float, float]], column_overlap: float
) -> dict[int, dict[int, float]]:
    """Candidate raw scores per element for the three-rank reading rule."""
    by_page: dict[int, list[_El]] = {}
    for e in els:
        by_page.setdefault(e.page, []).append(e)
    pages = sorted(by_page)
    out: dict[int, dict[int, float]] = {}
    for pi, p in enumerate(pages):
        W, H = sizes.get(p, (1.0, 1.0))
        nxt = by_page[pages[pi + 1]] if pi + 1 < len(pages) else []
        Wn, Hn = sizes.get(pages[pi + 1], (W, H)) if nxt else (W, H)
        next_page = _column_ranked(nxt, Wn, Hn)
        for a in by_page[p]:
            cand: dict[int, float] = {}
            later = []
            for b in by_page[p]:
                if b.id == a.id:
                    continue
                if _in_column(a.bbox, b.bbox, column_overlap, W):
                    if _is_below(a.bbox, b.bbox):
                        gap = max(b.bbox.y1 - a.bbox.y2, 0.0)
                        d = min(gap / H, 1.0) + 0.001 * min(max(b.bbox.x1 / W, 0.0), 1.0)
                        cand[b.id] = -d
                elif b.bbox.xc > a.bbox.xc:
                    later.append(b)
            for ident, d in _column_ranked(later, W, H).items():
                cand[ident] = -(RANK_STEP + d)
            for ident, d in next_page.items():
                cand[ident] = -(2 * RANK_STEP + d)
            out[a.id] = cand
    return out


def _assemble(ids: Sequence[int], cand: dict[int, dict[int, float]], kind: str) -> ScoreMatrix:
    n = len(ids)
    idx = {ident: i for i, ident in enumerate(ids)}
    raw = np.full((n, n), SELF_RAW)
    mask = np.eye(n, dtype=bool)
    for a, row in cand.items():
        i = idx[a]
        for b, v in row.items():
            raw[i, idx[b]] = v
            mask[i, idx[b]] = True
    return row_softmax(raw, mask, ids=ids, kind=kind)


def heuristic_succ_scores(
    elements: Sequence[tuple[int, BBox, int]],
    page_sizes: dict[int, tuple[float, float]] | None = None,
    column_overlap: float = 0.5,
) -> ScoreMatrix:
    """Score reading-order successors: same column below, then next column top, then next page top.

    Elements whose horizontal intervals overlap by at least ``column_overlap``
    of the narrower width share a column; a box at least half the page wide
    shares a column with anything it overlaps. An element with no qualifying
    candidate keeps all mass on itself.
    """
    els = [_El(i, b, p) for i, b, p in elements]
    if page_sizes is None:
        page_sizes = _infer_sizes(els)
    cand = _reading_raw(els, page_sizes, column_overlap)
    return _assemble([e.id for e in els], cand, "inter-succ")


def _infer_sizes(els: list[_El]) -> dict[int, tuple[float, float]]:
    sizes: dict[int, tuple[float, float]] = {}
    for e in els:
        w, h = sizes.get(e.page, (1.0, 1.0))
        sizes[e.page] = (max(w, e.bbox.x2), max(h, e.bbox.y2))
    return sizes


def heuristic_line_scores(
    lines: Sequence[TextLine],
    page_sizes: dict[int, tuple[float, float]] | None = None,
    column_overlap: float = 0.5,
    gap_ratio: float = 0.6,
    height_ratio: float = 1.15,
) -> tuple[ScoreMatrix, ScoreMatrix]:
    """Successor and predecessor scores between text-lines of one region.

    A line continues another when it sits directly below it in the same
    column, the vertical gap is at most ``gap_ratio`` line heights and the
    two line heights are within ``height_ratio`` of each other.
    """
    els = [_El(ln.id, ln.bbox, ln.page) for ln in lines]
    if page_sizes is None:
        page_sizes = _infer_sizes(els)
    by_page: dict[int, list[_El]] = {}
    for e in els:
        by_page.setdefault(e.page, []).append(e)
    succ: dict[int, dict[int, float]] = {e.id: {} for e in els}
    pred: dict[int, dict[int, float]] = {e.id: {} for e in els}
    for p, group in by_page.items():
        _, H = page_sizes.get(p, (1.0, 1.0))
        group = sorted(group, key=lambda e: (e.bbox.y1, e.bbox.x1, e.id))
        for ai, a in enumerate(group):
            for b in group[ai + 1 :]:
                if b.bbox.y1 - a.bbox.y2 > gap_ratio * a.bbox.h:
                    break
                if not same_column(a.bbox, b.bbox, column_overlap) or not _is_below(a.bbox, b.bbox):
                    continue
                lo, hi = sorted((a.bbox.h, b.bbox.h))
                if lo <= 0 or hi / lo > height_ratio:
                    continue
                d = max(b.bbox.y1 - a.bbox.y2, 0.0) / H
                succ[a.id][b.id] = -d
                pred[b.id][a.id] = -d
    ids = [e.id for e in els]
    return _assemble(ids, succ, "intra-succ"), _assemble(ids, pred, "intra-pred")


# -- roles ----------------------------------------------------------------------

NUMBERING = re.compile(r"^\s*(\d+(?:\.\d+)*)\.?\s+\S")
CAPTION_CUE = re.compile(r"^\s*(fig\.|figure|table|tab\.)\s*\d+", re.IGNORECASE)
FOOTNOTE_CUE = re.compile(r"^\s*(note:|\*|†)", re.IGNORECASE)


def heuristic_line_roles(
    lines: Sequence[TextLine], page_sizes: dict[int, tuple[float, float]]
) -> dict[int, LogicalRole]:
    """Keyword and font-size rules; sizes are relative to the median line height."""
    if not lines:
        return {}
    body = median(ln.bbox.h for ln in lines) or 1.0
    out = {}
    for ln in lines:
        _, H = page_sizes.get(ln.page, (1.0, 1.0))
        rel = ln.bbox.h / body
        if ln.bbox.y1 >= 0.94 * H:
            role = LogicalRole.FOOTER
        elif ln.bbox.y2 <= 0.06 * H:
            role = LogicalRole.HEADER
        elif rel >= 1.45:
            role = LogicalRole.TITLE
        elif NUMBERING.match(ln.text) and rel >= 1.1:
            role = LogicalRole.SECTION
        elif CAPTION_CUE.match(ln.text) or 0.85 <= rel < 0.95:
            role = LogicalRole.CAPTION
        elif FOOTNOTE_CUE.match(ln.text) or rel < 0.85:
            role = LogicalRole.FOOTNOTE
        else:
            role = LogicalRole.PARAGRAPH
        out[ln.id] = role
    return out


# -- inter-region ---------------------------------------------------------------

def _is_main_body(r: Region) -> bool:
    return not r.is_graphical and r.role not in LINKED_ROLES and r.role not in FURNITURE_ROLES


def heuristic_region_scores(
    regions: Sequence[Region],
    page_sizes: dict[int, tuple[float, float]],
    column_overlap: float = 0.5,
) -> tuple[ScoreMatrix, RelationTypeDistribution]:
    """Inter-region successor scores plus relation-type distributions.

    Main-body text regions follow the three-rank reading rule among
    themselves; captions and footnotes point at the nearest graphical object
    on their page; graphics and page furniture self-loop.
    """
    main = [_El(r.id, r.bbox, r.page) for r in regions if _is_main_body(r)]
    cand = _reading_raw(main, page_sizes, column_overlap)
    graphics = [r for r in regions if r.is_graphical]
    for r in regions:
        if r.is_graphical or r.role not in LINKED_ROLES:
            continue
        _, H = page_sizes.get(r.page, (1.0, 1.0))
        row = {}
        for g in graphics:
            if g.page != r.page:
                continue
            gap = max(g.bbox.y1 - r.bbox.y2, r.bbox.y1 - g.bbox.y2, 0.0)
            d = min(gap / H, 1.0)
            if x_overlap(r.bbox, g.bbox) > 0:
                row[g.id] = -d
            else:
                row[g.id] = -(RANK_STEP + d)
        cand[r.id] = row
    ids = [r.id for r in regions]
    m = _assemble(ids, cand, "inter-succ")

    is_main = {r.id: _is_main_body(r) for r in regions}
    is_graphic = {r.id: r.is_graphical for r in regions}
    is_linked = {r.id: (not r.is_graphical and r.role in LINKED_ROLES) for r in regions}
    probs = {}
    for a in ids:
        for b in ids:
            if a == b:
                continue
            if is_main[a] and is_main[b]:
                probs[(a, b)] = (0.8, 0.1, 0.1)
            elif (is_linked[a] and is_graphic[b]) or (is_graphic[a] and is_linked[b]):
                probs[(a, b)] = (0.1, 0.8, 0.1)
            else:
                probs[(a, b)] = (0.1, 0.1, 0.8)
    return m, RelationTypeDistribution(probs)


# -- TOC ------------------------------------------------------------------------

def depth_cue(text: str) -> int:
    """Section-numbering depth: "2.1.3 Foo" -> 3; unnumbered headings are depth 1."""
    m = NUMBERING.match(text)
    return m.group(1).count(".") + 1 if m else 1


def heuristic_toc_scores(
    headings: Sequence[tuple[int, str, int]],
) -> tuple[ScoreMatrix, ScoreMatrix]:
    """Parent and left-sibling scores from numbering depth.

    ``headings`` are ``(id, text, depth)`` in reading order. The parent
    matrix has a leading ROOT column.
    """
    ids = [h[0] for h in headings]
    depth = [h[2] for h in headings]
    k = len(ids)
    parent_of: dict[int, int] = {}
    sibling_of: dict[int, int] = {}
    for i in range(k):
        d = depth[i]
        parent = ROOT
        if d > 1:
            for j in range(i - 1, -1, -1):
                if depth[j] == d - 1:
                    parent = ids[j]
                    break
            else:
                for j in range(i - 1, -1, -1):
                    if depth[j] < d:
                        parent = ids[j]
                        break
        parent_of[ids[i]] = parent
        sibling = ids[i]
        for j in range(i - 1, -1, -1):
            if depth[j] < d:
                break
            if depth[j] == d and parent_of[ids[j]] == parent:
                sibling = ids[j]
                break
        sibling_of[ids[i]] = sibling
    if k == 0:
        empty = ScoreMatrix((), (), kind="toc-parent")
        return empty, ScoreMatrix((), (), kind="toc-sibling")
    cols = [ROOT, *ids]
    raw_p = np.full((k, k + 1), OFF_RAW)
    for i, a in enumerate(ids):
        raw_p[i, cols.index(parent_of[a])] = 0.0
    raw_s = np.full((k, k), OFF_RAW)
    for i, a in enumerate(ids):
        raw_s[i, ids.index(sibling_of[a])] = 0.0
    return (
        row_softmax(raw_p, ids=ids, cols=cols, kind="toc-parent"),
        row_softmax(raw_s, ids=ids, kind="toc-sibling"),
    )


# -- scorer implementations ------------------------------------------------------

def page_sizes(doc: Document) -> dict[int, tuple[float, float]]:
    return {p.index: (p.width, p.height) for p in doc.pages}


class Scorer:
    """Interface shared by every score source."""

    name = "base"

    def line_relations(self, doc: Document, lines: Sequence[TextLine]) -> tuple[ScoreMatrix, ScoreMatrix]:
        raise NotImplementedError

    def line_roles(self, doc: Document, lines: Sequence[TextLine]) -> dict[int, LogicalRole]:
        raise NotImplementedError

    def region_relations(
        self, doc: Document, regions: Sequence[Region]
    ) -> tuple[ScoreMatrix, RelationTypeDistribution]:
        raise NotImplementedError

    def toc_relations(self, doc: Document, headings: Sequence[Region]) -> tuple[ScoreMatrix, ScoreMatrix]:
        raise NotImplementedError


class HeuristicScorer(Scorer):
    name = "heuristic"

    def __init__(self, column_overlap: float = 0.5, gap_ratio: float = 0.6):
        self.column_overlap = column_overlap
        self.gap_ratio = gap_ratio

    def line_relations(self, doc, lines):
        return heuristic_line_scores(
            lines, page_sizes(doc), column_overlap=self.column_overlap, gap_ratio=self.gap_ratio
        )

    def line_roles(self, doc, lines):
        return heuristic_line_roles(lines, page_sizes(doc))

    def region_relations(self, doc, regions):
        return heuristic_region_scores(regions, page_sizes(doc), self.column_overlap)

    def toc_relations(self, doc, headings):
        lines = doc.line_map()
        items = []
        for h in headings:
            text = " ".join(lines[i].text for i in h.lines if i in lines)
            items.append((h.id, text, depth_cue(text)))
        return heuristic_toc_scores(items)


class OracleScorer(Scorer):
    """Indicator matrices taken from a ground-truth structure. Test use only."""

    name = "oracle"

    def __init__(self, truth: Structure):
        self.truth = truth
        self.succ: dict[int, int] = {}
        self.pred: dict[int, int] = {}
        self.roles: dict[int, LogicalRole] = {}
        for r in truth.regions:
            for a, b in zip(r.lines, r.lines[1:]):
                self.succ[a] = b
                self.pred[b] = a
            for ln in r.lines:
                self.roles[ln] = r.role
        self.region_next: dict[int, int] = {}
        self.region_label: dict[tuple[int, int], RelationLabel] = {}
        for g in truth.groups:
            if g.category is GroupCategory.TEXT:
                for a, b in zip(g.members, g.members[1:]):
                    self.region_next[a] = b
                    self.region_label[(a, b)] = RelationLabel.TEXT_ORDER
            else:
                anchor = g.members[0]
                for m in g.members[1:]:
                    self.region_next[m] = anchor
                    self.region_label[(m, anchor)] = RelationLabel.GRAPHICAL_LINK
        self.toc_parent: dict[int, int] = {}
        self.toc_sibling: dict[int, int] = {}
        if truth.toc is not None:
            _toc_relations(truth.toc, self.toc_parent, self.toc_sibling)

    def line_relations(self, doc, lines):
        ids = [ln.id for ln in lines]
        return _indicator(ids, self.succ, "intra-succ"), _indicator(ids, self.pred, "intra-pred")

    def line_roles(self, doc, lines):
        return {ln.id: self.roles.get(ln.id, LogicalRole.PARAGRAPH) for ln in lines}

    def region_relations(self, doc, regions):
        ids = [r.id for r in regions]
        m = _indicator(ids, self.region_next, "inter-succ")
        probs = {}
        for a in ids:
            for b in ids:
                if a != b:
                    lab = self.region_label.get((a, b), RelationLabel.NONE)
                    probs[(a, b)] = tuple(1.0 if lab is x else 0.0 for x in RELATION_LABELS)
        return m, RelationTypeDistribution(probs)

    def toc_relations(self, doc, headings):
        ids = [h.id for h in headings]
        if not ids:
            return ScoreMatrix((), (), kind="toc-parent"), ScoreMatrix((), (), kind="toc-sibling")
        parent = {a: self.toc_parent.get(a, ROOT) for a in ids}
        return (
            _indicator(ids, parent, "toc-parent", cols=[ROOT, *ids]),
            _indicator(ids, self.toc_sibling, "toc-sibling"),
        )


def _toc_relations(node: TreeNode, parent: dict[int, int], sibling: dict[int, int]) -> None:
    prev = None
    for c in node.children:
        parent[c.id] = node.id
        sibling[c.id] = c.id if prev is None else prev
        prev = c.id
        _toc_relations(c, parent, sibling)


def restrict_parent(m: ScoreMatrix, ids: Sequence[int]) -> ScoreMatrix:
    """Restrict a TOC parent matrix to ``ids`` and put ROOT in column 0.

    A square matrix without a ROOT column is read with the self-loop meaning
    "no parent", i.e. ROOT.
    """
    ri = m.row_index()
    ci = m.col_index()
    has_root = ROOT in ci
    rows = []
    for a in ids:
        src = m.rows[ri[a]]
        root_mass = src[ci[ROOT]] if has_root else src[ci[a]]
        vals = [root_mass] + [0.0 if (b == a and not has_root) else src[ci[b]] for b in ids]
        total = sum(vals)
        rows.append(tuple(v / total for v in vals) if total > 0 else (1.0,) + (0.0,) * len(ids))
    return ScoreMatrix(tuple(ids), tuple(rows), cols=(ROOT, *ids), kind=m.kind)


class FileScorer(Scorer):
    """Reads matrices written by an external model (one JSON file per scorer kind).

    ``root`` either holds the files directly or one sub-directory per
    document named after the document file stem.
    """

    name = "files"

    def __init__(self, root: str | Path, stem: str | None = None):
        root = Path(root)
        if stem is not None and (root / stem).is_dir():
            root = root / stem
        self.root = root

    def _path(self, kind: str) -> Path:
        path = self.root / f"{kind}.json"
        if not path.exists():
            raise io.FormatError(f"{path}: score file missing")
        return path

    def _matrix(self, kind: str, ids: Sequence[int]) -> ScoreMatrix:
        m = io.load_scores(self._path(kind))
        missing = sorted(set(ids) - set(m.ids))
        if missing:
            raise io.FormatError(f"{self._path(kind)}: no scores for ids {missing}")
        return m

    def line_relations(self, doc, lines):
        ids = [ln.id for ln in lines]
        return (
            self._matrix("intra-succ", ids).restrict(ids),
            self._matrix("intra-pred", ids).restrict(ids),
        )

    def line_roles(self, doc, lines):
        roles = io.roles_from_dict(io.read_json(self._path("role")))
        missing = sorted({ln.id for ln in lines} - set(roles))
        if missing:
            raise io.FormatError(f"{self._path('role')}: no role for ids {missing}")
        return {ln.id: roles[ln.id] for ln in lines}

    def region_relations(self, doc, regions):
        ids = [r.id for r in regions]
        m = self._matrix("inter-succ", ids).restrict(ids)
        dist = io.relation_types_from_dict(io.read_json(self._path("inter-relation-type")))
        return m, dist

    def toc_relations(self, doc, headings):
        ids = [h.id for h in headings]
        if not ids:
            return ScoreMatrix((), (), kind="toc-parent"), ScoreMatrix((), (), kind="toc-sibling")
        return (
            restrict_parent(self._matrix("toc-parent", ids), ids),
            self._matrix("toc-sibling", ids).restrict(ids),
        )


def write_oracle_files(truth: Structure, doc: Document, out_dir: str | Path) -> None:
    """Write indicator score files for every scorer kind (ground-truth ids)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    oracle = OracleScorer(truth)
    region_lines = [ln for ln in doc.lines if ln.id in oracle.roles]
    succ, pred = oracle.line_relations(doc, region_lines)
    io.store_scores(succ, out_dir / "intra-succ.json")
    io.store_scores(pred, out_dir / "intra-pred.json")
    io.write_json(io.roles_to_dict(oracle.line_roles(doc, region_lines)), out_dir / "role.json")
    m, dist = oracle.region_relations(doc, truth.regions)
    io.store_scores(m, out_dir / "inter-succ.json")
    io.write_json(io.relation_types_to_dict(m.ids, dist), out_dir / "inter-relation-type.json")
    headings = [r for r in truth.regions if r.role is LogicalRole.SECTION]
    order = {rid: i for i, rid in enumerate(truth.reading_order or [r.id for r in truth.regions])}
    headings.sort(key=lambda r: order.get(r.id, len(order)))
    parent, sibling = oracle.toc_relations(doc, headings)
    io.store_scores(parent, out_dir / "toc-parent.json")
    io.store_scores(sibling, out_dir / "toc-sibling.json")
