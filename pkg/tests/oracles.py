"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written in plain Python (scalar arithmetic,
explicit loops, sorted() instead of argsort) so that agreement with the
numpy/compiled implementations is meaningful evidence rather than the same
code tested against itself.
"""


def iou_scalar(a, b):
    """IoU of two (x1, y1, x2, y2) tuples using plain float arithmetic."""
    ax1, ay1, ax2, ay2 = a
    bx1, by1, bx2, by2 = b
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    area_a = (ax2 - ax1) * (ay2 - ay1)
    area_b = (bx2 - bx1) * (by2 - by1)
    union = (area_a + area_b) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def nms_reference(boxes, scores, threshold):
    """Greedy suppression, O(n^2): visit by descending score (ties by lower
    index), keep the box, knock out every later box overlapping it by more
    than the threshold. Returns kept indices in visit order."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    kept = []
    suppressed = set()
    for pos, i in enumerate(order):
        if i in suppressed:
            continue
        kept.append(i)
        for j in order[pos + 1 :]:
            if j not in suppressed and iou_scalar(boxes[i], boxes[j]) > threshold:
                suppressed.add(j)
    return kept


def greedy_match_reference(pred_boxes, confidences, gt_boxes, threshold):
    """Step-by-step simulation of greedy detection matching.

    Predictions in confidence-descending order (ties by lower index) each
    claim the unclaimed ground truth with the highest IoU when that IoU
    reaches the threshold; ground-truth ties go to the lower index.
    """
    order = sorted(range(len(confidences)), key=lambda i: (-confidences[i], i))
    claimed = set()
    pairs = []
    for pi in order:
        best_gi = None
        best_iou = -1.0
        for gi, g in enumerate(gt_boxes):
            if gi in claimed:
                continue
            value = iou_scalar(pred_boxes[pi], g)
            if value > best_iou:
                best_gi, best_iou = gi, value
        if best_gi is not None and best_iou >= threshold:
            claimed.add(best_gi)
            pairs.append((pi, best_gi))
    return pairs


def ap_101_point(confidences, is_tp, total_gts):
    """101-point interpolated average precision.

    Samples the precision envelope at recall 0.00, 0.01, ..., 1.00 and
    averages. Used as an independent check on the all-point integral; the
    two differ by at most the envelope's variation over one grid step.
    """
    order = sorted(range(len(confidences)), key=lambda i: (-confidences[i], i))
    tp = 0
    fp = 0
    curve = []
    for i in order:
        if is_tp[i]:
            tp += 1
        else:
            fp += 1
        curve.append((tp / total_gts, tp / (tp + fp)))
    total = 0.0
    for step in range(101):
        r = step / 100.0
        total += max((p for rec, p in curve if rec >= r), default=0.0)
    return total / 101.0


def jaccard_sets(a, b):
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)
