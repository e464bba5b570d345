"""Ordered labelled tree edit distance (Zhang & Shasha keyroot dynamic program)."""
from __future__ import annotations

from typing import Any, Callable

NodeCost = Callable[[Any, Any], float]


def _default_cost(a, b) -> float:
    return 0.0 if a.id == b.id else 1.0


def _postorder(root) -> tuple[list, list[int]]:
    """Nodes in postorder and, for each, the postorder index of its leftmost leaf.

    A subtree is contiguous in postorder and starts at its leftmost leaf.
    """
    nodes: list = []
    leftmost: list[int] = []
    stack = [(root, -1)]
    while stack:
        node, start = stack.pop()
        if start >= 0 or not node.children:
            leftmost.append(start if start >= 0 else len(nodes))
            nodes.append(node)
        else:
            stack.append((node, len(nodes)))
            for c in reversed(node.children):
                stack.append((c, -1))
    return nodes, leftmost


def _keyroots(leftmost: list[int]) -> list[int]:
    last: dict[int, int] = {}
    for i, lm in enumerate(leftmost):
        last[lm] = i
    return sorted(last.values())


def tree_edit_distance(t1, t2, node_cost: NodeCost | None = None) -> float:
    """Minimum cost to edit ``t1`` into ``t2``.

    Insertions and deletions cost 1; relabelling a node costs
    ``node_cost(a, b)`` (default: 0 for equal ids, else 1). Trees are any
    objects with a ``children`` sequence.
    """
    cost = node_cost or _default_cost
    a, la = _postorder(t1)
    b, lb = _postorder(t2)
    td = [[0.0] * len(b) for _ in a]
    for i in _keyroots(la):
        for j in _keyroots(lb):
            ioff, joff = la[i] - 1, lb[j] - 1
            m, n = i - la[i] + 2, j - lb[j] + 2
            fd = [[0.0] * n for _ in range(m)]
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, m):
                xi = x + ioff
                for y in range(1, n):
                    yj = y + joff
                    if la[xi] == la[i] and lb[yj] == lb[j]:
                        fd[x][y] = min(
                            fd[x - 1][y] + 1,
                            fd[x][y - 1] + 1,
                            fd[x - 1][y - 1] + cost(a[xi], b[yj]),
                        )
                        td[xi][yj] = fd[x][y]
                    else:
                        p, q = la[xi] - 1 - ioff, lb[yj] - 1 - joff
                        fd[x][y] = min(
                            fd[x - 1][y] + 1,
                            fd[x][y - 1] + 1,
                            fd[p][q] + td[xi][yj],
                        )
    return td[-1][-1]
