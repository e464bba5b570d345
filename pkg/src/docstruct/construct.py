"""Construct stage: serial TOC tree insertion and hierarchy assembly."""
from __future__ import annotations

from typing import Mapping, Sequence

from .model import ROOT, LogicalRole, Region, ScoreMatrix, TreeNode, empty_tree
from .order import OrderResult, reading_sequence
from .scoring import restrict_parent


def rightmost_path(t: TreeNode) -> list[TreeNode]:
    """ROOT followed by the last child of each node down to the deepest one."""
    path = [t]
    while path[-1].children:
        path.append(path[-1].children[-1])
    return path


def _attach(path: Sequence[TreeNode], m: int, node: TreeNode) -> TreeNode:
    """Rebuild the spine with ``node`` appended as the last child of ``path[m]``."""
    target = path[m]
    new = TreeNode(target.id, target.children + (node,), target.role, target.text)
    for k in range(m - 1, -1, -1):
        up = path[k]
        new = TreeNode(up.id, up.children[:-1] + (new,), up.role, up.text)
    return new


class _Lookup:
    def __init__(self, m: ScoreMatrix, name: str):
        self.rows = m.row_index()
        self.cols = m.col_index()
        self.m = m
        self.name = name

    def __call__(self, a: int, b: int) -> float:
        try:
            return self.m.rows[self.rows[a]][self.cols[b]]
        except KeyError:
            raise KeyError(f"{self.name} score missing for pair ({a}, {b})") from None


def _combined_scores(path: Sequence[TreeNode], sec: int, parent, sibling) -> list[float]:
    nodes = [n.id for n in path]
    shifted = nodes[1:] + [sec]
    return [parent(sec, p) * sibling(sec, s) for p, s in zip(nodes, shifted)]


def insert_node(t: TreeNode, sec: int, parent_m: ScoreMatrix, sibling_m: ScoreMatrix) -> TreeNode:
    """Insert heading ``sec`` as the last child of the best node on the rightmost path.

    Attaching under path node ``m`` makes path node ``m + 1`` the left
    sibling (or nothing, scored by the self column, for the deepest node);
    the candidate's score is parent score times sibling score. Ties go to the
    shallowest node.
    """
    path = rightmost_path(t)
    scores = _combined_scores(path, sec, _Lookup(parent_m, "parent"), _Lookup(sibling_m, "sibling"))
    best = 0
    for m in range(1, len(scores)):
        if scores[m] > scores[best]:
            best = m
    return _attach(path, best, TreeNode(sec))


def build_toc(headings: Sequence[int], parent_m: ScoreMatrix, sibling_m: ScoreMatrix) -> TreeNode:
    """Insert ``headings`` (reading order) one by one into a ROOT-only tree."""
    t = empty_tree()
    if not headings:
        return t
    if ROOT not in parent_m.cols:
        parent_m = restrict_parent(parent_m, headings)
    for sec in headings:
        t = insert_node(t, sec, parent_m, sibling_m)
    return t


def region_text(r: Region, texts: Mapping[int, str]) -> str:
    return " ".join(texts.get(i, "") for i in r.lines)


def headings_in_order(regions: Sequence[Region], order: OrderResult) -> list[int]:
    """Section-heading regions in reading sequence, skipping any bound to a graphic."""
    rmap = {r.id: r for r in regions}
    bound = {m for g in order.graphical_groups() for m in g.members[1:]}
    return [
        rid
        for rid in reading_sequence(order, rmap)
        if rmap[rid].role is LogicalRole.SECTION and rid not in bound
    ]


def assemble_hierarchy(
    regions: Sequence[Region],
    order: OrderResult,
    toc: TreeNode,
    texts: Mapping[int, str] | None = None,
) -> TreeNode:
    """Hang every region off the TOC spine.

    A non-heading region becomes a child of the nearest preceding heading in
    the reading sequence (ROOT before the first heading); regions linked to a
    graphical object become children of that object. Siblings keep reading
    order.
    """
    texts = texts or {}
    rmap = {r.id: r for r in regions}
    seq = reading_sequence(order, rmap)
    pos = {rid: i for i, rid in enumerate(seq)}
    toc_children: dict[int, list[int]] = {}
    headings = set()
    for node in toc.preorder():
        if node.id != ROOT:
            if node.id not in rmap:
                raise KeyError(f"TOC node {node.id} is not a known region")
            headings.add(node.id)
        toc_children[node.id] = [c.id for c in node.children]

    owner = {}
    for g in order.graphical_groups():
        for m in g.members[1:]:
            owner[m] = g.members[0]
    attached: dict[int, list[int]] = {}
    current = ROOT
    for rid in seq:
        if rid in headings:
            current = rid
        elif rid in owner:
            attached.setdefault(owner[rid], []).append(rid)
        else:
            attached.setdefault(current, []).append(rid)

    def build(rid: int) -> TreeNode:
        kids = toc_children.get(rid, []) + attached.get(rid, [])
        kids.sort(key=lambda k: pos[k])
        if rid == ROOT:
            return TreeNode(ROOT, tuple(build(k) for k in kids))
        r = rmap[rid]
        return TreeNode(rid, tuple(build(k) for k in kids), r.role, region_text(r, texts))

    return build(ROOT)
