# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the greedy-suppression and pairwise-overlap loops.

Arithmetic mirrors ``_kernels_py`` expression-for-expression so both
backends produce bit-identical results.
"""

import numpy as np

BACKEND = "compiled"


def nms_keep(const double[:, ::1] boxes, const long long[::1] order, double iou_threshold):
    """Greedy suppression over ``boxes`` visited in ``order``.

    Returns kept original indices, int64, in visit order.
    """
    cdef Py_ssize_t n = order.shape[0]
    cdef unsigned char[::1] suppressed = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t oi, oj
    cdef long long i, j
    cdef double ax1, ay1, ax2, ay2, area_i
    cdef double iw, ih, inter, union, area_j

    keep = []
    for oi in range(n):
        if suppressed[oi]:
            continue
        i = order[oi]
        keep.append(i)
        ax1 = boxes[i, 0]
        ay1 = boxes[i, 1]
        ax2 = boxes[i, 2]
        ay2 = boxes[i, 3]
        area_i = (ax2 - ax1) * (ay2 - ay1)
        for oj in range(oi + 1, n):
            if suppressed[oj]:
                continue
            j = order[oj]
            iw = min(ax2, boxes[j, 2]) - max(ax1, boxes[j, 0])
            if iw <= 0:
                continue
            ih = min(ay2, boxes[j, 3]) - max(ay1, boxes[j, 1])
            if ih <= 0:
                continue
            inter = iw * ih
            area_j = (boxes[j, 2] - boxes[j, 0]) * (boxes[j, 3] - boxes[j, 1])
            union = (area_i + area_j) - inter
            if union > 0 and inter / union > iou_threshold:
                suppressed[oj] = 1
    return np.asarray(keep, dtype=np.int64)


def iou_matrix(const double[:, ::1] a, const double[:, ::1] b):
    """Pairwise IoU between two (N, 4) and (M, 4) corner-box arrays."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    out = np.zeros((na, nb))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double ax1, ay1, ax2, ay2, area_i
    cdef double iw, ih, inter, union

    for i in range(na):
        ax1 = a[i, 0]
        ay1 = a[i, 1]
        ax2 = a[i, 2]
        ay2 = a[i, 3]
        area_i = (ax2 - ax1) * (ay2 - ay1)
        for j in range(nb):
            iw = min(ax2, b[j, 2]) - max(ax1, b[j, 0])
            if iw <= 0:
                continue
            ih = min(ay2, b[j, 3]) - max(ay1, b[j, 1])
            if ih <= 0:
                continue
            inter = iw * ih
            union = (area_i + (b[j, 2] - b[j, 0]) * (b[j, 3] - b[j, 1])) - inter
            if union > 0:
                o[i, j] = inter / union
    return out
