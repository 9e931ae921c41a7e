"""Detection data model and post-processing: thresholding, NMS, top-k.

Scene files are UTF-8 with one JSON object per line:
``{"image_w": ..., "image_h": ..., "detections": [{"box": [x1, y1, x2, y2],
"class_scores": [...], "attribute_scores": [...]}], "captions": [...],
"image_id": ...}`` where captions and image_id are optional. Score vectors
may instead be given sparse as ``class_scores_sparse: [[index, score], ...]``
(likewise ``attribute_scores_sparse``) with unlisted entries 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from symscene.errors import InvalidInputError, ParseError
from symscene.geometry import BoundingBox, nms


@dataclass(frozen=True)
class Detection:
    """One detected object: box plus per-class and per-attribute scores."""

    box: BoundingBox
    class_scores: np.ndarray
    attribute_scores: np.ndarray

    def __post_init__(self):
        for name in ("class_scores", "attribute_scores"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise InvalidInputError(f"{name} must be a flat vector")
            if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 1):
                raise InvalidInputError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, arr)

    @property
    def confidence(self) -> float:
        """Detection confidence: the maximum class score."""
        return float(self.class_scores.max()) if self.class_scores.size else 0.0


@dataclass(frozen=True)
class Vocabulary:
    """Index <-> name tables for classes and attributes; names are unique."""

    class_names: list[str]
    attribute_names: list[str]

    def __post_init__(self):
        for kind, names in (("class", self.class_names), ("attribute", self.attribute_names)):
            if any(not n for n in names):
                raise InvalidInputError(f"{kind} names must be nonempty")
            if len(set(names)) != len(names):
                raise InvalidInputError(f"{kind} names must be unique")

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def num_attributes(self) -> int:
        return len(self.attribute_names)


@dataclass(frozen=True)
class TopK:
    """Top-scoring vocabulary entries, descending score, ties by index."""

    entries: list[tuple[int, float]]

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.entries]

    @property
    def scores(self) -> np.ndarray:
        return np.array([s for _, s in self.entries], dtype=np.float64)


@dataclass(frozen=True)
class Scene:
    """One image's worth of detections, with optional caption side channel."""

    image_w: float
    image_h: float
    detections: list[Detection]
    captions: list[str] | None = None
    scene_id: str | None = None

    def __post_init__(self):
        if not (self.image_w > 0 and self.image_h > 0):
            raise InvalidInputError(
                f"image dimensions must be positive, got {self.image_w}x{self.image_h}"
            )


def top_k(scores: np.ndarray, k: int) -> TopK:
    """The k largest entries of a score vector.

    Ties break by ascending index; if fewer than k entries are positive the
    result still has k entries (zeros included).
    """
    scores = np.asarray(scores, dtype=np.float64)
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    if k > scores.shape[0]:
        raise InvalidInputError(f"k={k} exceeds vector length {scores.shape[0]}")
    order = np.argsort(-scores, kind="stable")[:k]
    return TopK([(int(i), float(scores[i])) for i in order])


def normalized_topk_weights(t: TopK) -> np.ndarray:
    """Scores rescaled to sum to 1; all-zero scores give uniform weights."""
    scores = t.scores
    total = scores.sum()
    if total == 0:
        return np.full(scores.shape[0], 1.0 / scores.shape[0])
    return scores / total


def select_objects(
    scene: Scene,
    score_threshold: float,
    iou_threshold: float,
    max_objects: int,
    per_class: bool = False,
) -> list[Detection]:
    """Post-process a scene's detections.

    Detections with confidence strictly above ``score_threshold`` survive,
    then greedy NMS runs at ``iou_threshold`` (class-agnostic by default;
    ``per_class`` groups suppression by argmax class), and the result is
    truncated to the ``max_objects`` highest-confidence survivors,
    descending.
    """
    if not 0.0 <= score_threshold <= 1.0:
        raise InvalidInputError(f"score_threshold must lie in [0, 1], got {score_threshold}")
    if max_objects < 1:
        raise InvalidInputError(f"max_objects must be >= 1, got {max_objects}")
    candidates = [d for d in scene.detections if d.confidence > score_threshold]
    if not candidates:
        return []
    class_ids = None
    if per_class:
        class_ids = [int(np.argmax(d.class_scores)) for d in candidates]
    kept = nms(
        [(d.box, d.confidence) for d in candidates],
        iou_threshold,
        class_ids=class_ids,
    )
    return [candidates[i] for i in kept[:max_objects]]


def load_vocabulary_file(path: str) -> list[str]:
    """Read one label per line; labels may contain spaces."""
    names = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            name = raw.strip()
            if not name:
                raise ParseError("empty label", line=lineno)
            names.append(name)
    if not names:
        raise ParseError(f"vocabulary file {path!r} has no labels")
    return names


def load_vocabulary(classes_path: str, attributes_path: str) -> Vocabulary:
    return Vocabulary(
        class_names=load_vocabulary_file(classes_path),
        attribute_names=load_vocabulary_file(attributes_path),
    )


def _scores_from_json(obj: dict, key: str, length: int, lineno: int) -> np.ndarray:
    dense = obj.get(key)
    sparse = obj.get(f"{key}_sparse")
    if dense is not None:
        arr = np.asarray(dense, dtype=np.float64)
        if arr.shape != (length,):
            raise ParseError(f"{key} must have length {length}, got {arr.shape}", line=lineno)
        return arr
    if sparse is not None:
        arr = np.zeros(length)
        for pair in sparse:
            if len(pair) != 2:
                raise ParseError(f"{key}_sparse entries must be [index, score] pairs", line=lineno)
            idx, score = int(pair[0]), float(pair[1])
            if not 0 <= idx < length:
                raise ParseError(f"{key}_sparse index {idx} out of range [0, {length})", line=lineno)
            arr[idx] = score
        return arr
    raise ParseError(f"detection is missing {key} (dense or sparse)", line=lineno)


def scene_from_json(obj: dict, num_classes: int, num_attributes: int, lineno: int = 0) -> Scene:
    """Build a Scene from one decoded JSON object."""
    try:
        image_w = float(obj["image_w"])
        image_h = float(obj["image_h"])
        raw_dets = obj["detections"]
    except KeyError as exc:
        raise ParseError(f"scene is missing field {exc}", line=lineno)
    detections = []
    for d in raw_dets:
        box_vals = d.get("box")
        if box_vals is None or len(box_vals) != 4:
            raise ParseError("detection box must be [x1, y1, x2, y2]", line=lineno)
        try:
            det = Detection(
                box=BoundingBox(*(float(v) for v in box_vals)),
                class_scores=_scores_from_json(d, "class_scores", num_classes, lineno),
                attribute_scores=_scores_from_json(d, "attribute_scores", num_attributes, lineno),
            )
        except InvalidInputError as exc:
            raise ParseError(str(exc), line=lineno)
        detections.append(det)
    captions = obj.get("captions")
    if captions is not None:
        captions = [str(c) for c in captions]
    image_id = obj.get("image_id")
    return Scene(
        image_w=image_w,
        image_h=image_h,
        detections=detections,
        captions=captions,
        scene_id=None if image_id is None else str(image_id),
    )


def load_scenes(path: str, num_classes: int, num_attributes: int) -> list[Scene]:
    """Load a scene-per-line JSON file."""
    scenes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line=lineno)
            scenes.append(scene_from_json(obj, num_classes, num_attributes, lineno=lineno))
    return scenes
