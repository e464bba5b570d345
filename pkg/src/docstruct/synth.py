"""Synthetic multi-column documents with exact ground truth.

Content is generated as a flow (title, numbered headings, paragraphs,
figure/table blocks) and poured into a column grid. Ground truth regions,
reading-order groups, the TOC and the full hierarchy are recorded while
placing, so they never go through the decoders.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from . import io
from .geometry import union_all
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
    Structure,
    TextLine,
    TreeNode,
)
from .scoring import write_oracle_files

PAGE_W, PAGE_H = 612.0, 792.0
MARGIN = 50.0
GUTTER = 20.0
BOTTOM = PAGE_H - MARGIN
FOOTER_Y = 760.0

BODY_H, BODY_GAP = 10.0, 2.0
HEAD_H = 12.0
TITLE_H, TITLE_GAP = 18.0, 3.0
CAPTION_H, NOTE_H = 9.0, 8.0
SPACE_PARAGRAPH, SPACE_HEADING, SPACE_BLOCK = 8.0, 14.0, 10.0
CHAR_W = 5.0

WORDS = (
    "model layout region page table figure reading order structure section "
    "document parsing tree graph relation score head text line column block "
    "detect group vote chain root node edge path insert match edit distance "
    "result method analysis data set train test value error metric sample "
    "scan print image style font size width height margin order flow level"
).split()


@dataclass
class SynthConfig:
    seed: int = 0
    pages: int = 3
    columns: int = 2
    max_depth: int = 3
    headings: tuple[int, int] = (3, 10)
    paragraphs: tuple[int, int] = (1, 3)
    figure_probability: float = 0.25
    title: bool = True
    footers: bool = True
    jitter: float = 1.0


@dataclass
class SynthDocument:
    doc: Document
    truth: Structure
    config: SynthConfig = field(default_factory=SynthConfig)


@dataclass
class _Block:
    """One flow item: lines (relative y offsets), optional graphic, and its kind."""

    kind: str
    height: float
    space: float
    parts: list = field(default_factory=list)  # (role, y0, h, text, width) or ("graphic", y0, h, cls)
    heading: int | None = None  # depth for heading blocks
    number: str = ""


class _Writer:
    def __init__(self, rng: random.Random, cfg: SynthConfig):
        self.rng = rng
        self.cfg = cfg
        self.next_id = 0
        self.lines: list[TextLine] = []
        self.graphics: list[GraphicalObject] = []

    def new_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def jit(self) -> float:
        return round(self.rng.uniform(-self.cfg.jitter, self.cfg.jitter), 2)

    def line(self, page: int, x1: float, y1: float, width: float, h: float, text: str) -> TextLine:
        x1 = round(x1 + self.jit(), 2)
        ln = TextLine(self.new_id(), page, BBox(x1, round(y1, 2), round(x1 + width, 2), round(y1 + h, 2)), text)
        self.lines.append(ln)
        return ln

    def graphic(self, page: int, x1: float, y1: float, width: float, h: float, cls: str) -> GraphicalObject:
        g = GraphicalObject(self.new_id(), page, BBox(round(x1, 2), round(y1, 2), round(x1 + width, 2), round(y1 + h, 2)), cls)
        self.graphics.append(g)
        return g


def _words(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n))


def _heading_depths(rng: random.Random, cfg: SynthConfig) -> list[int]:
    k = rng.randint(*cfg.headings)
    depths = []
    for i in range(k):
        if i == 0:
            depths.append(1)
        else:
            depths.append(rng.randint(1, min(depths[-1] + 1, cfg.max_depth)))
    return depths


def _text_lines(rng, n_lines: int, width: float, role: LogicalRole, h: float, gap: float, first: str = ""):
    parts = []
    y = 0.0
    for i in range(n_lines):
        last = i == n_lines - 1
        w = width if not last else round(width * rng.uniform(0.4, 0.95), 2)
        text = _words(rng, max(2, int(w / CHAR_W / 6)))
        if i == 0:
            text = (first + " " + text).strip() if first else text.capitalize()
        parts.append((role, y, h, text, w))
        y += h + gap
    return parts, y - gap


def generate(cfg: SynthConfig) -> SynthDocument:
    """Build one document and its ground truth; identical config gives identical output."""
    rng = random.Random(cfg.seed)
    w = _Writer(rng, cfg)
    colw = (PAGE_W - 2 * MARGIN - GUTTER * (cfg.columns - 1)) / cfg.columns

    # -- flow of blocks ----------------------------------------------------------
    blocks: list[_Block] = []
    counters = [0] * (cfg.max_depth + 1)
    n_fig = n_tab = 0
    for depth in _heading_depths(rng, cfg):
        counters[depth - 1] += 1
        for d in range(depth, len(counters)):
            counters[d] = 0
        number = ".".join(str(c) for c in counters[:depth])
        title = _words(rng, rng.randint(1, 3)).title()
        text = f"{number} {title}"
        width = min(colw, CHAR_W * 1.2 * len(text) + 10)
        blocks.append(
            _Block("heading", HEAD_H, SPACE_HEADING, [(LogicalRole.SECTION, 0.0, HEAD_H, text, width)], depth, number)
        )
        for _ in range(rng.randint(*cfg.paragraphs)):
            parts, h = _text_lines(rng, rng.randint(2, 6), colw, LogicalRole.PARAGRAPH, BODY_H, BODY_GAP)
            blocks.append(_Block("paragraph", h, SPACE_PARAGRAPH, parts))
            if rng.random() < cfg.figure_probability:
                if rng.random() < 0.6:
                    n_fig += 1
                    gh = float(rng.randint(60, 140))
                    cap, ch = _text_lines(
                        rng, rng.randint(1, 2), colw, LogicalRole.CAPTION, CAPTION_H, BODY_GAP, f"Figure {n_fig}:"
                    )
                    parts = [("graphic", 0.0, gh, "figure")] + [
                        (r, y + gh + 6, hh, t, ww) for r, y, hh, t, ww in cap
                    ]
                    blocks.append(_Block("figure", gh + 6 + ch, SPACE_BLOCK, parts))
                else:
                    n_tab += 1
                    gh = float(rng.randint(50, 100))
                    cap, ch = _text_lines(
                        rng, rng.randint(1, 2), colw, LogicalRole.CAPTION, CAPTION_H, BODY_GAP, f"Table {n_tab}:"
                    )
                    note = (LogicalRole.FOOTNOTE, ch + 6 + gh + 4, NOTE_H, "Note: " + _words(rng, 4), colw * 0.6)
                    parts = cap + [("graphic", ch + 6, gh, "table"), note]
                    blocks.append(_Block("table", ch + 6 + gh + 4 + NOTE_H, SPACE_BLOCK, parts))

    # -- placement --------------------------------------------------------------
    placed: list[tuple[_Block, int, float, float]] = []  # block, page, x, y
    title_lines: list[TextLine] = []
    top0 = MARGIN
    if cfg.title:
        n = rng.randint(1, 2)
        y = MARGIN
        for i in range(n):
            text = _words(rng, rng.randint(3, 6)).title()
            tw = round((PAGE_W - 2 * MARGIN) * rng.uniform(0.75, 0.95), 2)
            x = (PAGE_W - tw) / 2
            title_lines.append(w.line(0, x, y, tw, TITLE_H, text))
            y += TITLE_H + TITLE_GAP
        top0 = y - TITLE_GAP + 16.0

    page, col = 0, 0
    y = top0
    main_on_page = bool(title_lines)
    for b in blocks:
        while True:
            at_top = y == (top0 if page == 0 else MARGIN)
            need = b.height + (0.0 if at_top else b.space)
            if y + need <= BOTTOM:
                break
            col += 1
            if col == cfg.columns:
                col, page = 0, page + 1
                main_on_page = False
            y = MARGIN if page > 0 else top0
            if page >= cfg.pages:
                break
        if page >= cfg.pages:
            break
        if b.kind in ("figure", "table") and not main_on_page:
            continue
        y0 = y if y == (top0 if page == 0 else MARGIN) else y + b.space
        x0 = MARGIN + col * (colw + GUTTER)
        placed.append((b, page, x0, y0))
        y = y0 + b.height
        if b.kind in ("heading", "paragraph"):
            main_on_page = True
    n_pages = max(1, min(cfg.pages, (placed[-1][1] + 1) if placed else 1))

    # -- materialize elements and truth ----------------------------------------------
    regions: list[Region] = []
    main_chain: list[int] = []
    graphical_groups: list[tuple[int, ...]] = []
    seq: list[int] = []
    toc_children: dict[int, list[int]] = {ROOT: []}
    hier_children: dict[int, list[int]] = {ROOT: []}
    stack: list[tuple[int, int]] = []  # (depth, region id)
    current = ROOT

    def text_region(lines: list[TextLine], role: LogicalRole) -> Region:
        r = Region(lines[0].id, role, union_all(ln.bbox for ln in lines), lines[0].page, tuple(ln.id for ln in lines))
        regions.append(r)
        return r

    if title_lines:
        r = text_region(title_lines, LogicalRole.TITLE)
        main_chain.append(r.id)
        seq.append(r.id)
        hier_children[ROOT].append(r.id)

    for b, pg, x0, y0 in placed:
        if b.kind in ("heading", "paragraph"):
            lines = [w.line(pg, x0, y0 + yy, ww, hh, t) for _, yy, hh, t, ww in b.parts]
            r = text_region(lines, b.parts[0][0])
            main_chain.append(r.id)
            seq.append(r.id)
            if b.kind == "heading":
                while stack and stack[-1][0] >= b.heading:
                    stack.pop()
                parent = stack[-1][1] if stack else ROOT
                toc_children.setdefault(parent, []).append(r.id)
                hier_children.setdefault(parent, []).append(r.id)
                stack.append((b.heading, r.id))
                current = r.id
            else:
                hier_children.setdefault(current, []).append(r.id)
            continue
        obj = None
        linked: list[Region] = []
        run: list[TextLine] = []
        run_role = None
        for part in b.parts + [("graphic-end",)]:
            if part[0] in ("graphic", "graphic-end") or part[0] is not run_role:
                if run:
                    linked.append(text_region(run, run_role))
                run, run_role = [], None
            if part[0] == "graphic":
                _, yy, hh, cls = part
                obj = w.graphic(pg, x0, y0 + yy, colw, hh, cls)
                if cls == "table":
                    # cell text inside the table box; the detector must drop it
                    for k in range(rng.randint(1, 3)):
                        w.line(pg, x0 + 8, y0 + yy + 6 + 12 * k, colw * 0.5, BODY_H, _words(rng, 3))
            elif part[0] != "graphic-end":
                role, yy, hh, t, ww = part
                run_role = role
                run.append(w.line(pg, x0, y0 + yy, ww, hh, t))
        g = Region(obj.id, LogicalRole.FIGURE if obj.cls == "figure" else LogicalRole.TABLE, obj.bbox, obj.page, graphic=obj.id)
        regions.append(g)
        linked.sort(key=lambda r: (r.page, r.bbox.y1, r.bbox.x1, r.id))
        members = (g.id, *(r.id for r in linked))
        graphical_groups.append(members)
        seq.extend(members)
        hier_children.setdefault(current, []).append(g.id)
        hier_children[g.id] = [r.id for r in linked]

    footer_groups = []
    if cfg.footers:
        for p in range(n_pages):
            text = str(p + 1)
            fw = CHAR_W * len(text) + 2
            ln = w.line(p, (PAGE_W - fw) / 2, FOOTER_Y, fw, NOTE_H, text)
            r = text_region([ln], LogicalRole.FOOTER)
            footer_groups.append((r.id,))
            seq.append(r.id)
            hier_children.setdefault(current, []).append(r.id)

    doc = Document(
        tuple(Page(i, PAGE_W, PAGE_H) for i in range(n_pages)),
        tuple(w.lines),
        tuple(w.graphics),
    )
    rmap = {r.id: r for r in regions}
    texts = {ln.id: ln.text for ln in w.lines}

    def tree(rid: int, children: dict[int, list[int]], payload: bool) -> TreeNode:
        kids = tuple(tree(c, children, payload) for c in children.get(rid, []))
        if rid == ROOT or not payload:
            return TreeNode(rid, kids)
        r = rmap[rid]
        return TreeNode(rid, kids, r.role, " ".join(texts[i] for i in r.lines))

    key = lambda g: (rmap[g[0]].page, rmap[g[0]].bbox.y1, rmap[g[0]].bbox.x1, g[0])  # noqa: E731
    text_groups = sorted(([tuple(main_chain)] if main_chain else []) + footer_groups, key=key)
    groups = [ReadingOrderGroup(GroupCategory.TEXT, g) for g in text_groups]
    groups += [ReadingOrderGroup(GroupCategory.GRAPHICAL, g) for g in sorted(graphical_groups, key=key)]
    truth = Structure(
        regions=tuple(
            sorted((r for r in regions if not r.is_graphical), key=lambda r: (r.page, r.bbox.y1, r.bbox.x1, r.id))
        )
        + tuple(rmap[g.id] for g in w.graphics),
        groups=tuple(groups),
        toc=tree(ROOT, toc_children, False),
        hierarchy=tree(ROOT, hier_children, True),
        reading_order=tuple(seq),
    )
    return SynthDocument(doc, truth, cfg)


def corpus_config(seed: int, max_pages: int = 5, max_columns: int = 3, max_depth: int = 4) -> SynthConfig:
    """Derive varied generation knobs from a seed (used for benchmark corpora)."""
    rng = random.Random(10_000 + seed)
    return SynthConfig(
        seed=seed,
        pages=rng.randint(1, max_pages),
        columns=rng.randint(1, max_columns),
        max_depth=rng.randint(1, max_depth),
        headings=(2, 12),
        paragraphs=(1, 3),
        figure_probability=rng.choice((0.0, 0.15, 0.3)),
        title=rng.random() < 0.8,
    )


def write(sd: SynthDocument, out_dir: str | Path, stem: str, scores: bool = True) -> Path:
    """Write ``<stem>.json`` (document + ground truth) and oracle score files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.json"
    io.write_json(io.bundle_to_dict(sd.doc, gt=sd.truth), path)
    if scores:
        write_oracle_files(sd.truth, sd.doc, out_dir / "scores" / stem)
    return path
