"""JSON serialization for documents, structure blocks and score matrices."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .model import (
    ROOT,
    RELATION_LABELS,
    BBox,
    Document,
    GraphicalObject,
    GroupCategory,
    LogicalRole,
    Page,
    ReadingOrderGroup,
    Region,
    RelationTypeDistribution,
    ScoreMatrix,
    Structure,
    TextLine,
    TreeNode,
)


class FormatError(ValueError):
    """Raised when a JSON payload does not match the expected schema."""


def _get(obj: Any, key: str, where: str):
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    if key not in obj:
        raise FormatError(f"{where}: missing field '{key}'")
    return obj[key]


def _bbox(value: Any, where: str) -> BBox:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise FormatError(f"{where}: bbox must be a list of 4 numbers")
    return BBox(*(_num(v, where) for v in value))


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _role(value: Any, where: str) -> LogicalRole:
    try:
        return LogicalRole(value)
    except ValueError:
        raise FormatError(f"{where}: unknown role {value!r}") from None


# -- document -----------------------------------------------------------------

def document_from_dict(data: dict) -> Document:
    pages = tuple(
        Page(
            _int(_get(p, "index", f"pages[{i}]"), f"pages[{i}].index"),
            _num(_get(p, "width", f"pages[{i}]"), f"pages[{i}].width"),
            _num(_get(p, "height", f"pages[{i}]"), f"pages[{i}].height"),
        )
        for i, p in enumerate(_get(data, "pages", "document"))
    )
    lines = tuple(
        TextLine(
            _int(_get(ln, "id", f"lines[{i}]"), f"lines[{i}].id"),
            _int(_get(ln, "page", f"lines[{i}]"), f"lines[{i}].page"),
            _bbox(_get(ln, "bbox", f"lines[{i}]"), f"lines[{i}].bbox"),
            str(ln.get("text", "")),
        )
        for i, ln in enumerate(data.get("lines", []))
    )
    graphics = tuple(
        GraphicalObject(
            _int(_get(g, "id", f"graphics[{i}]"), f"graphics[{i}].id"),
            _int(_get(g, "page", f"graphics[{i}]"), f"graphics[{i}].page"),
            _bbox(_get(g, "bbox", f"graphics[{i}]"), f"graphics[{i}].bbox"),
            str(g.get("class", "figure")),
        )
        for i, g in enumerate(data.get("graphics", []))
    )
    return Document(pages, lines, graphics)


def document_to_dict(doc: Document) -> dict:
    return {
        "pages": [{"index": p.index, "width": p.width, "height": p.height} for p in doc.pages],
        "lines": [
            {"id": ln.id, "page": ln.page, "bbox": ln.bbox.as_list(), "text": ln.text}
            for ln in doc.lines
        ],
        "graphics": [
            {"id": g.id, "page": g.page, "bbox": g.bbox.as_list(), "class": g.cls}
            for g in doc.graphics
        ],
    }


# -- trees --------------------------------------------------------------------

def tree_to_dict(node: TreeNode, payload: bool = False) -> dict:
    out: dict[str, Any] = {"id": node.id}
    if payload:
        out["role"] = node.role.value if node.role is not None else None
        out["text"] = node.text
    out["children"] = [tree_to_dict(c, payload) for c in node.children]
    return out


def tree_from_dict(data: dict, where: str = "tree") -> TreeNode:
    ident = _int(_get(data, "id", where), f"{where}.id")
    role = data.get("role")
    children = tuple(
        tree_from_dict(c, f"{where}.children[{i}]") for i, c in enumerate(data.get("children", []))
    )
    return TreeNode(
        ident,
        children,
        None if role is None else _role(role, f"{where}.role"),
        str(data.get("text", "")),
    )


# -- structure blocks ---------------------------------------------------------

def region_to_dict(r: Region) -> dict:
    return {
        "id": r.id,
        "role": r.role.value,
        "page": r.page,
        "lines": list(r.lines),
        "graphic": r.graphic,
        "bbox": r.bbox.as_list(),
    }


def region_from_dict(data: dict, where: str) -> Region:
    graphic = data.get("graphic")
    return Region(
        id=_int(_get(data, "id", where), f"{where}.id"),
        role=_role(_get(data, "role", where), f"{where}.role"),
        bbox=_bbox(_get(data, "bbox", where), f"{where}.bbox"),
        page=_int(data.get("page", 0), f"{where}.page"),
        lines=tuple(_int(v, f"{where}.lines") for v in data.get("lines", [])),
        graphic=None if graphic is None else _int(graphic, f"{where}.graphic"),
    )


def structure_to_dict(s: Structure) -> dict:
    out: dict[str, Any] = {"regions": [region_to_dict(r) for r in s.regions]}
    if s.groups:
        out["groups"] = [
            {"category": g.category.value, "members": list(g.members)} for g in s.groups
        ]
    if s.reading_order is not None:
        out["reading_order"] = list(s.reading_order)
    if s.toc is not None:
        out["toc"] = tree_to_dict(s.toc)
    if s.hierarchy is not None:
        out["hierarchy"] = tree_to_dict(s.hierarchy, payload=True)
    return out


def structure_from_dict(data: dict, where: str = "structure") -> Structure:
    regions = tuple(
        region_from_dict(r, f"{where}.regions[{i}]") for i, r in enumerate(data.get("regions", []))
    )
    groups = []
    for i, g in enumerate(data.get("groups", [])):
        w = f"{where}.groups[{i}]"
        try:
            cat = GroupCategory(_get(g, "category", w))
        except ValueError:
            raise FormatError(f"{w}.category: unknown category {g['category']!r}") from None
        groups.append(ReadingOrderGroup(cat, tuple(_int(m, f"{w}.members") for m in _get(g, "members", w))))
    toc = data.get("toc")
    hierarchy = data.get("hierarchy")
    ro = data.get("reading_order")
    return Structure(
        regions=regions,
        groups=tuple(groups),
        toc=None if toc is None else tree_from_dict(toc, f"{where}.toc"),
        hierarchy=None if hierarchy is None else tree_from_dict(hierarchy, f"{where}.hierarchy"),
        reading_order=None if ro is None else tuple(ro),
    )


# -- files --------------------------------------------------------------------

def read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def write_json(data: Any, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def load_bundle(path: str | Path) -> tuple[Document, Structure | None, Structure | None, dict]:
    """Read a document file; returns (document, ground truth, prediction, raw dict)."""
    data = read_json(path)
    try:
        doc = document_from_dict(data)
        gt = data.get("ground_truth")
        pred = data.get("prediction")
        return (
            doc,
            None if gt is None else structure_from_dict(gt, "ground_truth"),
            None if pred is None else structure_from_dict(pred, "prediction"),
            data,
        )
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def bundle_to_dict(doc: Document, gt: Structure | None = None, pred: Structure | None = None) -> dict:
    out = document_to_dict(doc)
    if gt is not None:
        out["ground_truth"] = structure_to_dict(gt)
    if pred is not None:
        out["prediction"] = structure_to_dict(pred)
    return out


# -- score matrices -----------------------------------------------------------

def _check_finite(rows, where: str) -> None:
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise FormatError(f"{where}: non-finite entry at (row {i}, col {j}): {v!r}")


def scores_to_dict(m: ScoreMatrix) -> dict:
    out: dict[str, Any] = {"kind": m.kind, "ids": list(m.ids)}
    if m.cols != m.ids:
        out["cols"] = list(m.cols)
    out["rows"] = [list(r) for r in m.rows]
    return out


def scores_from_dict(data: dict, where: str = "scores", known_ids=None) -> ScoreMatrix:
    ids = [_int(v, f"{where}.ids") for v in _get(data, "ids", where)]
    cols = [_int(v, f"{where}.cols") for v in data.get("cols", ids)]
    rows = _get(data, "rows", where)
    if len(set(ids)) != len(ids):
        raise FormatError(f"{where}: duplicate ids")
    if not isinstance(rows, list) or len(rows) != len(ids):
        raise FormatError(f"{where}: shape mismatch: {len(ids)} ids but {len(rows)} rows")
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != len(cols):
            got = len(row) if isinstance(row, list) else "non-list"
            raise FormatError(f"{where}: shape mismatch: row {i} has {got} entries, expected {len(cols)}")
    _check_finite(rows, where)
    for i, row in enumerate(rows):
        if any(v < 0 for v in row):
            raise FormatError(f"{where}: negative score in row {i}")
    if known_ids is not None:
        unknown = sorted(set(ids) - set(known_ids) | (set(cols) - set(known_ids) - {ROOT}))
        if unknown:
            raise FormatError(f"{where}: unknown ids {unknown}")
    return ScoreMatrix(
        tuple(ids),
        tuple(tuple(float(v) for v in r) for r in rows),
        cols=tuple(cols),
        kind=str(data.get("kind", "")),
    )


def store_scores(m: ScoreMatrix, path: str | Path) -> None:
    write_json(scores_to_dict(m), path)


def load_scores(path: str | Path, known_ids=None) -> ScoreMatrix:
    return scores_from_dict(read_json(path), str(path), known_ids)


def relation_types_to_dict(ids, dist: RelationTypeDistribution) -> dict:
    ids = list(ids)
    uniform = (1 / 3, 1 / 3, 1 / 3)
    probs = [[list(dist.probs.get((a, b), uniform)) for b in ids] for a in ids]
    labels = [
        [dist.label(a, b).value if (a, b) in dist.probs else "none" for b in ids] for a in ids
    ]
    return {"kind": "inter-relation-type", "ids": ids, "rows": probs, "labels": labels}


def relation_types_from_dict(data: dict, where: str = "relation-types") -> RelationTypeDistribution:
    ids = [_int(v, f"{where}.ids") for v in _get(data, "ids", where)]
    n = len(ids)
    rows = data.get("rows")
    labels = data.get("labels")
    probs: dict[tuple[int, int], tuple[float, float, float]] = {}
    if rows is not None:
        if len(rows) != n or any(len(r) != n for r in rows):
            raise FormatError(f"{where}: shape mismatch, expected {n}x{n}x3")
        for i, row in enumerate(rows):
            for j, p in enumerate(row):
                if len(p) != 3:
                    raise FormatError(f"{where}: pair ({i}, {j}) needs 3 probabilities")
                _check_finite([p], f"{where}[{i}][{j}]")
                probs[(ids[i], ids[j])] = tuple(float(v) for v in p)
    elif labels is not None:
        names = [lab.value for lab in RELATION_LABELS]
        if len(labels) != n or any(len(r) != n for r in labels):
            raise FormatError(f"{where}: shape mismatch, expected {n}x{n} labels")
        for i, row in enumerate(labels):
            for j, tag in enumerate(row):
                if tag not in names:
                    raise FormatError(f"{where}: unknown label {tag!r} at ({i}, {j})")
                probs[(ids[i], ids[j])] = tuple(1.0 if t == tag else 0.0 for t in names)
    else:
        raise FormatError(f"{where}: needs 'rows' or 'labels'")
    return RelationTypeDistribution(probs)


def roles_to_dict(roles: dict[int, LogicalRole]) -> dict:
    ids = sorted(roles)
    return {"kind": "role", "ids": ids, "roles": [roles[i].value for i in ids]}


def roles_from_dict(data: dict, where: str = "roles") -> dict[int, LogicalRole]:
    ids = [_int(v, f"{where}.ids") for v in _get(data, "ids", where)]
    roles = _get(data, "roles", where)
    if len(roles) != len(ids):
        raise FormatError(f"{where}: shape mismatch: {len(ids)} ids but {len(roles)} roles")
    return {i: _role(r, f"{where}.roles") for i, r in zip(ids, roles)}
