"""Axis-aligned box arithmetic: IoU, NMS, and box normalization.

Boxes use corner format (x1, y1, x2, y2) in pixel units. All operations
are pure functions and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from symscene import kernels
from symscene.errors import InvalidInputError

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel rectangle with x1 <= x2, y1 <= y2, all finite."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidInputError(f"box coordinates must be finite, got {coords}")
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise InvalidInputError(f"box corners out of order: {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)


@dataclass(frozen=True)
class NormalizedBox:
    """Box expressed as ratios in [0, 1] (tolerance 1e-9), u1 <= u2, v1 <= v2."""

    u1: float
    v1: float
    u2: float
    v2: float

    def __post_init__(self):
        coords = (self.u1, self.v1, self.u2, self.v2)
        for c in coords:
            if not math.isfinite(c) or c < -_NORM_TOL or c > 1.0 + _NORM_TOL:
                raise InvalidInputError(f"normalized components must lie in [0, 1]: {coords}")
        if self.u1 > self.u2 or self.v1 > self.v2:
            raise InvalidInputError(f"normalized corners out of order: {coords}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.u1, self.v1, self.u2, self.v2)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes.

    Two zero-area boxes have IoU 0 by definition (a zero-area box carries
    no spatial evidence, and this avoids 0/0).
    """
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    if iw <= 0:
        return 0.0
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if ih <= 0:
        return 0.0
    inter = iw * ih
    union = (a.area + b.area) - inter
    if union <= 0:
        return 0.0
    return inter / union


def boxes_to_array(boxes: Sequence[BoundingBox]) -> np.ndarray:
    """Stack boxes into an (N, 4) float64 array in corner order."""
    out = np.empty((len(boxes), 4), dtype=np.float64)
    for i, b in enumerate(boxes):
        out[i, 0] = b.x1
        out[i, 1] = b.y1
        out[i, 2] = b.x2
        out[i, 3] = b.y2
    return out


def nms(
    dets: Sequence[tuple[BoundingBox, float]],
    iou_threshold: float,
    class_ids: Sequence[int] | None = None,
) -> list[int]:
    """Greedy non-maximum suppression.

    Boxes are visited in descending score order (equal scores: lower input
    index first); a box is suppressed when its IoU with an already-kept box
    exceeds ``iou_threshold``. When ``class_ids`` is given, suppression only
    happens between boxes sharing a class id.

    Returns kept input indices in descending score order.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise InvalidInputError(f"iou_threshold must lie in [0, 1], got {iou_threshold}")
    if len(dets) == 0:
        return []
    boxes = boxes_to_array([b for b, _ in dets])
    scores = np.asarray([s for _, s in dets], dtype=np.float64)
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("nms scores must be finite")
    if class_ids is not None and len(class_ids) != len(dets):
        raise InvalidInputError("class_ids length must match dets")

    order = np.argsort(-scores, kind="stable").astype(np.int64)
    if class_ids is None:
        kept = kernels.nms_keep(boxes, order, float(iou_threshold))
        return [int(i) for i in kept]

    ids = np.asarray(class_ids)
    kept_all: list[int] = []
    for cid in np.unique(ids):
        group = order[ids[order] == cid]
        kept_all.extend(int(i) for i in kernels.nms_keep(boxes, group, float(iou_threshold)))
    kept_all.sort(key=lambda i: (-scores[i], i))
    return kept_all


def normalize_global(b: BoundingBox, image_w: float, image_h: float) -> NormalizedBox:
    """Normalize a box to the image frame.

    Coordinates are clamped to [0, image dim] first: detectors emit
    slightly out-of-frame boxes and clamping keeps the [0, 1] invariant.
    """
    if not (image_w > 0 and image_h > 0):
        raise InvalidInputError(f"image dimensions must be positive, got {image_w}x{image_h}")
    x1 = min(max(b.x1, 0.0), image_w)
    x2 = min(max(b.x2, 0.0), image_w)
    y1 = min(max(b.y1, 0.0), image_h)
    y2 = min(max(b.y2, 0.0), image_h)
    return NormalizedBox(x1 / image_w, y1 / image_h, x2 / image_w, y2 / image_h)


def enveloping_box(boxes: Sequence[BoundingBox]) -> BoundingBox:
    """Smallest box containing every input box (componentwise min/max)."""
    if len(boxes) == 0:
        raise InvalidInputError("enveloping_box requires at least one box")
    return BoundingBox(
        min(b.x1 for b in boxes),
        min(b.y1 for b in boxes),
        max(b.x2 for b in boxes),
        max(b.y2 for b in boxes),
    )


def _relative_axis(lo: float, hi: float, env_lo: float, env_hi: float) -> tuple[float, float]:
    span = env_hi - env_lo
    if span <= 0:
        # Degenerate envelope axis: min edge maps to 0, max edge to 1,
        # preserving the b == envelope -> (0, 0, 1, 1) identity.
        return 0.0, 1.0
    return (lo - env_lo) / span, (hi - env_lo) / span


def normalize_relative(b: BoundingBox, envelope: BoundingBox) -> NormalizedBox:
    """Normalize a box to an enveloping box that contains it."""
    u1, u2 = _relative_axis(b.x1, b.x2, envelope.x1, envelope.x2)
    v1, v2 = _relative_axis(b.y1, b.y2, envelope.y1, envelope.y2)
    return NormalizedBox(u1, v1, u2, v2)
