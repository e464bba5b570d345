"""Bounding-box algebra and the 18-d spatial compatibility feature."""
from __future__ import annotations

import math
from functools import reduce
from typing import Iterable

from .model import BBox


class DegenerateBoxError(ValueError):
    pass


def union_bbox(a: BBox, b: BBox) -> BBox:
    return BBox(min(a.x1, b.x1), min(a.y1, b.y1), max(a.x2, b.x2), max(a.y2, b.y2))


def union_all(boxes: Iterable[BBox]) -> BBox:
    return reduce(union_bbox, boxes)


def _check(box: BBox, name: str) -> None:
    if not (box.w > 0 and box.h > 0):
        raise DegenerateBoxError(f"degenerate box {name}={box.as_list()} (width and height must be > 0)")


def box_delta(a: BBox, b: BBox) -> tuple[float, ...]:
    """Normalized center offsets and log size ratios between two boxes (6 values)."""
    _check(a, "a")
    _check(b, "b")
    return (
        (a.xc - b.xc) / a.w,
        (a.yc - b.yc) / a.h,
        math.log(a.w / b.w),
        math.log(a.h / b.h),
        (b.xc - a.xc) / b.w,
        (b.yc - a.yc) / b.h,
    )


def spatial_compatibility(a: BBox, b: BBox) -> tuple[float, ...]:
    """Concatenate delta(a, b), delta(a, a|b), delta(b, a|b) into 18 values."""
    u = union_bbox(a, b)
    return box_delta(a, b) + box_delta(a, u) + box_delta(b, u)


def x_overlap(a: BBox, b: BBox) -> float:
    return max(0.0, min(a.x2, b.x2) - max(a.x1, b.x1))


def same_column(a: BBox, b: BBox, ratio: float = 0.5) -> bool:
    """Horizontal intervals overlap by at least ``ratio`` of the narrower box."""
    narrow = min(a.w, b.w)
    if narrow <= 0:
        return a.x1 <= b.x2 and b.x1 <= a.x2
    return x_overlap(a, b) >= ratio * narrow


def iou(a: BBox, b: BBox) -> float:
    iw = max(0.0, min(a.x2, b.x2) - max(a.x1, b.x1))
    ih = max(0.0, min(a.y2, b.y2) - max(a.y1, b.y1))
    inter = iw * ih
    union = a.w * a.h + b.w * b.h - inter
    return inter / union if union > 0 else 0.0
