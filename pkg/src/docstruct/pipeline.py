"""Stage orchestration: Detect -> Order -> Construct over a document."""
from __future__ import annotations

from dataclasses import replace

from .construct import assemble_hierarchy, build_toc, headings_in_order
from .detect import detect
from .model import Document, Structure
from .order import OrderResult, order, reading_sequence
from .scoring import Scorer


def run_detect(doc: Document, scorer: Scorer) -> Structure:
    return Structure(regions=tuple(detect(doc, scorer)))


def run_order(doc: Document, pred: Structure, scorer: Scorer) -> Structure:
    result = order(doc, pred.regions, scorer)
    seq = reading_sequence(result, pred.region_map())
    return replace(pred, groups=result.groups, reading_order=tuple(seq))


def run_construct(doc: Document, pred: Structure, scorer: Scorer) -> Structure:
    result = OrderResult(pred.groups)
    rmap = pred.region_map()
    headings = headings_in_order(pred.regions, result)
    parent_m, sibling_m = scorer.toc_relations(doc, [rmap[h] for h in headings])
    toc = build_toc(headings, parent_m, sibling_m)
    texts = {ln.id: ln.text for ln in doc.lines}
    hierarchy = assemble_hierarchy(pred.regions, result, toc, texts)
    return replace(pred, toc=toc, hierarchy=hierarchy)


def run_pipeline(doc: Document, scorer: Scorer) -> Structure:
    pred = run_detect(doc, scorer)
    pred = run_order(doc, pred, scorer)
    return run_construct(doc, pred, scorer)
