"""Pure-numpy kernels; fallback used when the compiled extension is absent.

Both implementations must agree bit-for-bit: the arithmetic is written as
``inter / ((area_a + area_b) - inter)`` with the same operation order in
each, so the greedy suppression decisions are identical.
"""

import numpy as np

BACKEND = "python"


def nms_keep(boxes: np.ndarray, order: np.ndarray, iou_threshold: float) -> np.ndarray:
    """Greedy suppression over ``boxes`` visited in ``order``.

    Args:
        boxes: (N, 4) float64 corner boxes.
        order: (N,) int64 visit order (descending score, ties pre-broken).
        iou_threshold: boxes overlapping a kept box strictly above this
            are suppressed.

    Returns:
        Kept original indices, int64, in visit order.
    """
    x1, y1, x2, y2 = boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3]
    areas = (x2 - x1) * (y2 - y1)

    live = order.copy()
    keep = []
    while live.size > 0:
        i = live[0]
        keep.append(i)
        rest = live[1:]
        iw = np.minimum(x2[i], x2[rest]) - np.maximum(x1[i], x1[rest])
        ih = np.minimum(y2[i], y2[rest]) - np.maximum(y1[i], y1[rest])
        inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)
        union = (areas[i] + areas[rest]) - inter
        iou = np.zeros(rest.shape[0])
        np.divide(inter, union, out=iou, where=union > 0)
        live = rest[iou <= iou_threshold]
    return np.asarray(keep, dtype=np.int64)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two (N, 4) and (M, 4) corner-box arrays."""
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)
    union = (area_a[:, None] + area_b[None, :]) - inter
    out = np.zeros(inter.shape)
    np.divide(inter, union, out=out, where=union > 0)
    return out
