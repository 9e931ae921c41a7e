"""Detection and per-object label metrics.

Detection quality is class-agnostic: predictions match ground truth by box
overlap alone (greedy, confidence-descending, IoU at or above a threshold).
Class and attribute quality are then scored over the matched pairs only.

File formats (one JSON object per line):

    ground truth: {"image_id": ..., "objects": [{"box": [x1,y1,x2,y2],
                   "class_index": i, "attribute_indices": [..]}]}
    predictions:  the scene format from the detection module, image_id required
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from symscene import kernels
from symscene.detection import Detection, scene_from_json
from symscene.errors import InvalidInputError, ParseError, UndefinedMetricError
from symscene.geometry import BoundingBox, boxes_to_array


@dataclass(frozen=True)
class GroundTruthObject:
    box: BoundingBox
    class_index: int
    attribute_indices: frozenset[int]

    def __post_init__(self):
        if self.class_index < 0:
            raise InvalidInputError("class_index must be non-negative")
        attrs = frozenset(int(i) for i in self.attribute_indices)
        if any(i < 0 for i in attrs):
            raise InvalidInputError("attribute indices must be non-negative")
        object.__setattr__(self, "attribute_indices", attrs)


@dataclass(frozen=True)
class Matching:
    """Injective prediction-to-ground-truth assignment at one IoU threshold.

    ``pairs`` holds (prediction index, ground-truth index) in the order the
    greedy pass claimed them, i.e. prediction-confidence-descending.
    """

    pairs: tuple[tuple[int, int], ...]
    unmatched_preds: tuple[int, ...]
    unmatched_gts: tuple[int, ...]


@dataclass(frozen=True)
class LabelMetrics:
    """Accuracy / precision / recall / F1; None marks an undefined value."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None

    def as_tuple(self):
        return (self.accuracy, self.precision, self.recall, self.f1)


UNDEFINED_METRICS = LabelMetrics(None, None, None, None)


@dataclass(frozen=True)
class MatchCounts:
    matched: int
    unmatched_predictions: int
    unmatched_ground_truths: int


@dataclass(frozen=True)
class EvalReport:
    ap: float
    ar: float
    class_metrics: LabelMetrics
    attribute_metrics: LabelMetrics
    counts: MatchCounts

    def to_dict(self) -> dict:
        return {
            "ap": self.ap,
            "ar": self.ar,
            "class": {
                "accuracy": self.class_metrics.accuracy,
                "precision": self.class_metrics.precision,
                "recall": self.class_metrics.recall,
                "f1": self.class_metrics.f1,
            },
            "attribute": {
                "accuracy": self.attribute_metrics.accuracy,
                "precision": self.attribute_metrics.precision,
                "recall": self.attribute_metrics.recall,
                "f1": self.attribute_metrics.f1,
            },
            "counts": {
                "matched": self.counts.matched,
                "unmatched_predictions": self.counts.unmatched_predictions,
                "unmatched_ground_truths": self.counts.unmatched_ground_truths,
            },
        }


def match(
    preds: list[tuple[BoundingBox, float]],
    gts: list[GroundTruthObject],
    iou_threshold: float,
) -> Matching:
    """Greedy class-agnostic matching.

    Predictions are visited in confidence-descending order (ties by lower
    index); each claims the still-unclaimed ground truth with the highest
    IoU, provided that IoU is at or above the threshold. Ground-truth ties
    break toward the lower index.
    """
    if not 0.0 <= iou_threshold <= 1.0:
        raise InvalidInputError(f"iou_threshold must be within [0, 1], got {iou_threshold}")
    if not preds or not gts:
        return Matching(
            pairs=(),
            unmatched_preds=tuple(range(len(preds))),
            unmatched_gts=tuple(range(len(gts))),
        )
    confidences = np.array([float(c) for _, c in preds])
    if not np.all(np.isfinite(confidences)):
        raise InvalidInputError("confidences must be finite")
    ious = kernels.iou_matrix(
        boxes_to_array([b for b, _ in preds]),
        boxes_to_array([g.box for g in gts]),
    )
    order = np.argsort(-confidences, kind="stable")
    claimed = np.zeros(len(gts), dtype=bool)
    pairs = []
    for pi in order:
        row = np.where(claimed, -1.0, ious[pi])
        gi = int(np.argmax(row))
        if row[gi] >= iou_threshold:
            claimed[gi] = True
            pairs.append((int(pi), gi))
    matched_preds = {pi for pi, _ in pairs}
    return Matching(
        pairs=tuple(pairs),
        unmatched_preds=tuple(i for i in range(len(preds)) if i not in matched_preds),
        unmatched_gts=tuple(i for i in range(len(gts)) if not claimed[i]),
    )


def _require_ground_truth(gts_by_image: dict) -> int:
    total = sum(len(g) for g in gts_by_image.values())
    if total == 0:
        raise UndefinedMetricError("no ground-truth objects: detection metrics are undefined")
    return total


def average_precision(
    preds_by_image: dict[str, list[tuple[BoundingBox, float]]],
    gts_by_image: dict[str, list[GroundTruthObject]],
    iou_threshold: float,
) -> float:
    """All-point interpolated area under the dataset precision-recall curve.

    Predictions are pooled across images and swept in confidence-descending
    order; the precision envelope is integrated over every recall step.
    """
    total_gts = _require_ground_truth(gts_by_image)
    confidences = []
    is_tp = []
    for image_id in sorted(set(preds_by_image) | set(gts_by_image)):
        preds = preds_by_image.get(image_id, [])
        matching = match(preds, gts_by_image.get(image_id, []), iou_threshold)
        matched = {pi for pi, _ in matching.pairs}
        for i, (_, conf) in enumerate(preds):
            confidences.append(conf)
            is_tp.append(i in matched)
    if not confidences:
        return 0.0
    order = np.argsort(-np.array(confidences), kind="stable")
    tp = np.array(is_tp)[order]
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(~tp)
    recall = cum_tp / total_gts
    precision = cum_tp / (cum_tp + cum_fp)

    mrec = np.concatenate(([0.0], recall, [1.0]))
    mpre = np.concatenate(([0.0], precision, [0.0]))
    for i in range(len(mpre) - 1, 0, -1):
        mpre[i - 1] = max(mpre[i - 1], mpre[i])
    steps = np.where(mrec[1:] != mrec[:-1])[0] + 1
    return float(np.sum((mrec[steps] - mrec[steps - 1]) * mpre[steps]))


def average_recall(
    preds_by_image: dict[str, list[tuple[BoundingBox, float]]],
    gts_by_image: dict[str, list[GroundTruthObject]],
    iou_threshold: float,
    max_dets: int = 100,
) -> float:
    """Fraction of ground truths matched keeping top max_dets predictions per image."""
    if max_dets < 1:
        raise InvalidInputError(f"max_dets must be positive, got {max_dets}")
    total_gts = _require_ground_truth(gts_by_image)
    matched_total = 0
    for image_id in sorted(set(preds_by_image) | set(gts_by_image)):
        preds = preds_by_image.get(image_id, [])
        if len(preds) > max_dets:
            order = np.argsort(-np.array([c for _, c in preds]), kind="stable")
            preds = [preds[i] for i in order[:max_dets]]
        matching = match(preds, gts_by_image.get(image_id, []), iou_threshold)
        matched_total += len(matching.pairs)
    return matched_total / total_gts


def _micro_prf(pred_labels: list[int], gt_labels: list[int]) -> LabelMetrics:
    """Micro-averaged one-vs-rest P/R/F1 over the labels present in the pairs.

    With single-label pairs and the label set restricted to labels that
    actually occur, micro precision, recall, and F1 all collapse to top-1
    accuracy; the sums are kept explicit so the definition stays auditable.
    """
    n = len(pred_labels)
    correct = sum(1 for p, g in zip(pred_labels, gt_labels) if p == g)
    labels = set(pred_labels) | set(gt_labels)
    tp = fp = fn = 0
    for label in labels:
        tp += sum(1 for p, g in zip(pred_labels, gt_labels) if p == label and g == label)
        fp += sum(1 for p, g in zip(pred_labels, gt_labels) if p == label and g != label)
        fn += sum(1 for p, g in zip(pred_labels, gt_labels) if g == label and p != label)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return LabelMetrics(accuracy=correct / n, precision=precision, recall=recall, f1=f1)


def class_metrics(
    matching: Matching, preds: list[Detection], gts: list[GroundTruthObject]
) -> LabelMetrics:
    """Top-1 class metrics over matched pairs; undefined markers when none match."""
    if not matching.pairs:
        return UNDEFINED_METRICS
    pred_labels = [int(np.argmax(preds[pi].class_scores)) for pi, _ in matching.pairs]
    gt_labels = [gts[gi].class_index for _, gi in matching.pairs]
    return _micro_prf(pred_labels, gt_labels)


def predicted_attribute_set(
    scores: np.ndarray, attr_threshold: float, attr_topk: int | None = None
) -> frozenset[int]:
    """Attribute indices an object is taken to predict.

    Threshold mode keeps scores strictly above attr_threshold. Top-k mode
    keeps the k best-scoring indices but still drops zero scores, so an
    object with fewer than k observed attributes is not padded with noise.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if attr_topk is not None:
        if attr_topk < 1:
            raise InvalidInputError(f"attr_topk must be positive, got {attr_topk}")
        k = min(attr_topk, len(scores))
        top = np.argsort(-scores, kind="stable")[:k]
        return frozenset(int(i) for i in top if scores[i] > 0.0)
    if not 0.0 <= attr_threshold <= 1.0:
        raise InvalidInputError(f"attr_threshold must be within [0, 1], got {attr_threshold}")
    return frozenset(int(i) for i in np.nonzero(scores > attr_threshold)[0])


def _attr_micro(pairs: list[tuple[frozenset[int], frozenset[int]]]) -> LabelMetrics:
    inter_total = sum(len(p & g) for p, g in pairs)
    pred_total = sum(len(p) for p in (p for p, _ in pairs))
    gt_total = sum(len(g) for g in (g for _, g in pairs))
    precision = inter_total / pred_total if pred_total else 0.0
    recall = inter_total / gt_total if gt_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    jaccard = [1.0 if not (p | g) else len(p & g) / len(p | g) for p, g in pairs]
    return LabelMetrics(
        accuracy=float(np.mean(jaccard)), precision=precision, recall=recall, f1=f1
    )


def attribute_metrics(
    matching: Matching,
    preds: list[Detection],
    gts: list[GroundTruthObject],
    attr_threshold: float = 0.5,
    attr_topk: int | None = None,
) -> LabelMetrics:
    """Multi-label attribute metrics over matched pairs.

    Micro precision sums intersection sizes over summed prediction-set
    sizes (recall likewise over ground-truth sets); accuracy is the mean
    Jaccard index, with a pair whose sets are both empty counting as 1.
    """
    if not matching.pairs:
        return UNDEFINED_METRICS
    pairs = [
        (
            predicted_attribute_set(preds[pi].attribute_scores, attr_threshold, attr_topk),
            gts[gi].attribute_indices,
        )
        for pi, gi in matching.pairs
    ]
    return _attr_micro(pairs)


def evaluate_dataset(
    preds_by_image: dict[str, list[Detection]],
    gts_by_image: dict[str, list[GroundTruthObject]],
    iou_threshold: float = 0.5,
    max_dets: int = 100,
    attr_threshold: float = 0.5,
    attr_topk: int | None = None,
) -> EvalReport:
    """Score a prediction set against ground truth, pooled across images.

    AP uses every prediction; AR truncates to the top max_dets per image.
    Class and attribute metrics pool matched pairs across all images.
    Raises UndefinedMetricError when the ground truth is empty.
    """
    _require_ground_truth(gts_by_image)
    boxes_by_image = {
        img: [(d.box, d.confidence) for d in dets] for img, dets in preds_by_image.items()
    }
    ap = average_precision(boxes_by_image, gts_by_image, iou_threshold)
    ar = average_recall(boxes_by_image, gts_by_image, iou_threshold, max_dets)

    class_pairs: list[tuple[int, int]] = []
    attr_pairs: list[tuple[frozenset[int], frozenset[int]]] = []
    matched = unmatched_preds = unmatched_gts = 0
    for image_id in sorted(set(preds_by_image) | set(gts_by_image)):
        dets = preds_by_image.get(image_id, [])
        gts = gts_by_image.get(image_id, [])
        matching = match(boxes_by_image.get(image_id, []), gts, iou_threshold)
        matched += len(matching.pairs)
        unmatched_preds += len(matching.unmatched_preds)
        unmatched_gts += len(matching.unmatched_gts)
        for pi, gi in matching.pairs:
            class_pairs.append((int(np.argmax(dets[pi].class_scores)), gts[gi].class_index))
            attr_pairs.append(
                (
                    predicted_attribute_set(
                        dets[pi].attribute_scores, attr_threshold, attr_topk
                    ),
                    gts[gi].attribute_indices,
                )
            )
    if class_pairs:
        cls = _micro_prf([p for p, _ in class_pairs], [g for _, g in class_pairs])
        attr = _attr_micro(attr_pairs)
    else:
        cls = UNDEFINED_METRICS
        attr = UNDEFINED_METRICS
    return EvalReport(
        ap=ap,
        ar=ar,
        class_metrics=cls,
        attribute_metrics=attr,
        counts=MatchCounts(matched, unmatched_preds, unmatched_gts),
    )


def load_ground_truth(
    path, num_classes: int, num_attributes: int
) -> dict[str, list[GroundTruthObject]]:
    """Read a ground-truth JSONL file, validating indices against the vocabulary sizes."""
    out: dict[str, list[GroundTruthObject]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line=lineno) from exc
            if "image_id" not in obj:
                raise ParseError("missing image_id", line=lineno)
            image_id = str(obj["image_id"])
            if image_id in out:
                raise ParseError(f"duplicate image_id {image_id!r}", line=lineno)
            objects = []
            for record in obj.get("objects", []):
                try:
                    box_vals = record["box"]
                    class_index = int(record["class_index"])
                    attr_indices = [int(i) for i in record.get("attribute_indices", [])]
                except (KeyError, TypeError, ValueError) as exc:
                    raise ParseError(f"bad object record: {exc}", line=lineno) from exc
                if len(box_vals) != 4:
                    raise ParseError("box must have 4 values", line=lineno)
                if not 0 <= class_index < num_classes:
                    raise ParseError(
                        f"class_index {class_index} outside [0, {num_classes})", line=lineno
                    )
                for i in attr_indices:
                    if not 0 <= i < num_attributes:
                        raise ParseError(
                            f"attribute index {i} outside [0, {num_attributes})", line=lineno
                        )
                try:
                    box = BoundingBox(*(float(v) for v in box_vals))
                except InvalidInputError as exc:
                    raise ParseError(str(exc), line=lineno) from exc
                objects.append(
                    GroundTruthObject(
                        box=box,
                        class_index=class_index,
                        attribute_indices=frozenset(attr_indices),
                    )
                )
            out[image_id] = objects
    return out


def load_predictions(
    path, num_classes: int, num_attributes: int
) -> dict[str, list[Detection]]:
    """Read a predictions JSONL file (scene format; image_id is mandatory here)."""
    out: dict[str, list[Detection]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line=lineno) from exc
            scene = scene_from_json(obj, num_classes, num_attributes, lineno=lineno)
            if scene.scene_id is None:
                raise ParseError("missing image_id", line=lineno)
            if scene.scene_id in out:
                raise ParseError(f"duplicate image_id {scene.scene_id!r}", line=lineno)
            out[scene.scene_id] = list(scene.detections)
    return out


def _fmt(value: float | None, width: int = 8) -> str:
    return f"{'--':<{width}}" if value is None else f"{value:<{width}.4f}"


def format_report_table(report: EvalReport) -> str:
    """Render a report as an aligned two-section text table plus a counts line."""
    header_groups = f"{'detection':<16}{'class':<32}{'attribute':<32}"
    header_cols = (
        f"{'AP':<8}{'AR':<8}"
        f"{'A':<8}{'P':<8}{'R':<8}{'F1':<8}"
        f"{'A':<8}{'P':<8}{'R':<8}{'F1':<8}"
    )
    values = (
        _fmt(report.ap)
        + _fmt(report.ar)
        + "".join(_fmt(v) for v in report.class_metrics.as_tuple())
        + "".join(_fmt(v) for v in report.attribute_metrics.as_tuple())
    )
    counts = report.counts
    tallies = (
        f"matched pairs: {counts.matched}   "
        f"unmatched predictions: {counts.unmatched_predictions}   "
        f"unmatched ground truths: {counts.unmatched_ground_truths}"
    )
    return "\n".join([header_groups, header_cols, values.rstrip(), tallies])
