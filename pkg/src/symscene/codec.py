"""Per-object and per-scene encodings at the three privacy tiers.

Every transmissible object vector has VECTOR_DIM = 2048 components.

Symbolic layout (PRIVATE), for top-k k and embedding dim d (defaults 5, 300):
    [0, k*d)            k class-name embeddings, rank order
    [k*d, (k+1)*d)      weighted sum of top-k attribute-name embeddings
    [(k+1)*d, +4)       image-normalized box
    [+4, +8)            envelope-normalized box
    rest                zeros

Raw layout (AT_RISK), for C classes and A attributes (defaults 1600, 400):
    [0, C)              class scores
    [C, C+A)            attribute scores
    [C+A, +4)           image-normalized box
    [+4, +8)            envelope-normalized box
    rest                zeros
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from symscene.detection import (
    Detection,
    Scene,
    TopK,
    Vocabulary,
    normalized_topk_weights,
    select_objects,
    top_k,
)
from symscene.embeddings import EmbeddingTable, embed_label
from symscene.errors import ConfigError, EncodingError, InvalidInputError
from symscene.geometry import BoundingBox, NormalizedBox, enveloping_box, normalize_global, normalize_relative

VECTOR_DIM = 2048
BOX_BLOCK = 8

UNRECOVERABLE = "unrecoverable"


class PrivacyTier(enum.IntEnum):
    """What leaves the device; higher is more private."""

    NOT_PRIVATE = 0  # raw image (no encoder in this toolkit)
    AT_RISK = 1      # full score distributions
    PRIVATE = 2      # symbolic representation only


@dataclass(frozen=True)
class ObjectEncoding:
    """One object's 2048-component wire vector and its privacy tier."""

    vector: np.ndarray
    tier: PrivacyTier

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.shape != (VECTOR_DIM,):
            raise InvalidInputError(f"encoding vector must have shape ({VECTOR_DIM},)")
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class TextualEncoding:
    """Rank-ordered class and attribute words for a sentence-level encoder."""

    class_words: list[str]
    attribute_words: list[str]


@dataclass(frozen=True)
class SceneEncoding:
    """The per-scene unit that crosses the wire."""

    scene_id: str
    tier: PrivacyTier
    objects: np.ndarray  # (N, VECTOR_DIM)
    captions: list[str] | None = None

    def __post_init__(self):
        obj = np.asarray(self.objects)
        if obj.ndim != 2 or obj.shape[1] != VECTOR_DIM:
            raise InvalidInputError(f"objects must be an (N, {VECTOR_DIM}) matrix")
        object.__setattr__(self, "objects", obj)

    @property
    def num_objects(self) -> int:
        return int(self.objects.shape[0])


def symbolic_offsets(k: int, dim: int) -> tuple[int, int, int]:
    """(class block end, attribute block end, box block end) for the symbolic layout."""
    class_end = k * dim
    attr_end = class_end + dim
    box_end = attr_end + BOX_BLOCK
    if box_end > VECTOR_DIM:
        raise ConfigError(
            f"symbolic layout overflows: {k}*{dim} + {dim} + {BOX_BLOCK} = {box_end} > {VECTOR_DIM}"
        )
    return class_end, attr_end, box_end


def raw_offsets(num_classes: int, num_attributes: int) -> tuple[int, int, int]:
    """(class block end, attribute block end, box block end) for the raw layout."""
    class_end = num_classes
    attr_end = class_end + num_attributes
    box_end = attr_end + BOX_BLOCK
    if box_end > VECTOR_DIM:
        raise ConfigError(
            f"raw layout overflows: {num_classes} + {num_attributes} + {BOX_BLOCK} = "
            f"{box_end} > {VECTOR_DIM}"
        )
    return class_end, attr_end, box_end


def _box_blocks(
    box: BoundingBox, scene_envelope: BoundingBox, image_w: float, image_h: float
) -> np.ndarray:
    global_box = normalize_global(box, image_w, image_h)
    relative_box = normalize_relative(box, scene_envelope)
    return np.array(global_box.as_tuple() + relative_box.as_tuple())


def encode_symbolic(
    d: Detection,
    scene_envelope: BoundingBox,
    image_w: float,
    image_h: float,
    vocab: Vocabulary,
    table: EmbeddingTable,
    k: int = 5,
    weight_norm: bool = True,
) -> ObjectEncoding:
    """Encode one detection as a PRIVATE symbolic vector.

    The class block concatenates the embeddings of the top-k class names in
    rank order; the attribute block is the sum of the top-k attribute-name
    embeddings weighted by their scores (normalized to sum to 1 unless
    ``weight_norm`` is off); then the two normalized boxes and zero padding.
    """
    if len(d.class_scores) != vocab.num_classes:
        raise InvalidInputError(
            f"detection has {len(d.class_scores)} class scores, vocabulary has {vocab.num_classes}"
        )
    if len(d.attribute_scores) != vocab.num_attributes:
        raise InvalidInputError(
            f"detection has {len(d.attribute_scores)} attribute scores, "
            f"vocabulary has {vocab.num_attributes}"
        )
    class_end, attr_end, box_end = symbolic_offsets(k, table.dim)
    vec = np.zeros(VECTOR_DIM)

    top_classes = top_k(d.class_scores, k)
    for slot, index in enumerate(top_classes.indices):
        emb = embed_label(table, vocab.class_names[index]).vector
        vec[slot * table.dim : (slot + 1) * table.dim] = emb

    top_attrs = top_k(d.attribute_scores, k)
    weights = normalized_topk_weights(top_attrs) if weight_norm else top_attrs.scores
    attr_block = np.zeros(table.dim)
    for weight, index in zip(weights, top_attrs.indices):
        attr_block += weight * embed_label(table, vocab.attribute_names[index]).vector
    vec[class_end:attr_end] = attr_block

    vec[attr_end:box_end] = _box_blocks(d.box, scene_envelope, image_w, image_h)
    return ObjectEncoding(vector=vec, tier=PrivacyTier.PRIVATE)


def encode_raw(
    d: Detection,
    scene_envelope: BoundingBox,
    image_w: float,
    image_h: float,
) -> ObjectEncoding:
    """Encode one detection as an AT_RISK raw-score vector."""
    class_end, attr_end, box_end = raw_offsets(len(d.class_scores), len(d.attribute_scores))
    vec = np.zeros(VECTOR_DIM)
    vec[:class_end] = d.class_scores
    vec[class_end:attr_end] = d.attribute_scores
    vec[attr_end:box_end] = _box_blocks(d.box, scene_envelope, image_w, image_h)
    return ObjectEncoding(vector=vec, tier=PrivacyTier.AT_RISK)


def encode_textual(d: Detection, vocab: Vocabulary, k: int = 5) -> TextualEncoding:
    """Top-k class and attribute names in rank order, as word sequences."""
    if len(d.class_scores) != vocab.num_classes:
        raise InvalidInputError(
            f"detection has {len(d.class_scores)} class scores, vocabulary has {vocab.num_classes}"
        )
    if len(d.attribute_scores) != vocab.num_attributes:
        raise InvalidInputError(
            f"detection has {len(d.attribute_scores)} attribute scores, "
            f"vocabulary has {vocab.num_attributes}"
        )
    return TextualEncoding(
        class_words=[vocab.class_names[i] for i in top_k(d.class_scores, k).indices],
        attribute_words=[vocab.attribute_names[i] for i in top_k(d.attribute_scores, k).indices],
    )


def encode_scene(
    scene: Scene,
    mode: str,
    vocab: Vocabulary,
    table: EmbeddingTable | None,
    config,
    scene_id: str | None = None,
) -> SceneEncoding:
    """Select a scene's objects and encode each one.

    ``mode`` is 'symbolic' or 'raw'. The envelope for relative box
    normalization is computed once over the selected objects' boxes. Rows
    come out in confidence-descending order. Captions are copied through
    untouched when ``config.include_captions`` is set.
    """
    if mode not in ("symbolic", "raw"):
        raise InvalidInputError(f"mode must be 'symbolic' or 'raw', got {mode!r}")
    if mode == "symbolic" and table is None:
        raise InvalidInputError("symbolic encoding requires an embedding table")
    selected = select_objects(
        scene, config.score_threshold, config.iou_threshold, config.max_objects
    )
    tier = PrivacyTier.PRIVATE if mode == "symbolic" else PrivacyTier.AT_RISK
    rows = np.zeros((len(selected), VECTOR_DIM))
    if selected:
        envelope = enveloping_box([d.box for d in selected])
        for i, det in enumerate(selected):
            try:
                if mode == "symbolic":
                    enc = encode_symbolic(
                        det,
                        envelope,
                        scene.image_w,
                        scene.image_h,
                        vocab,
                        table,
                        k=config.top_k,
                        weight_norm=config.weight_norm,
                    )
                else:
                    enc = encode_raw(det, envelope, scene.image_w, scene.image_h)
            except (InvalidInputError, ConfigError) as exc:
                raise EncodingError(str(exc), object_index=i) from exc
            rows[i] = enc.vector
    captions = scene.captions if config.include_captions else None
    return SceneEncoding(
        scene_id=scene_id if scene_id is not None else (scene.scene_id or ""),
        tier=tier,
        objects=rows,
        captions=captions,
    )


def encode_scene_textual(scene: Scene, vocab: Vocabulary, config) -> list[TextualEncoding]:
    """Textual encodings for a scene's selected objects, confidence order."""
    selected = select_objects(
        scene, config.score_threshold, config.iou_threshold, config.max_objects
    )
    return [encode_textual(d, vocab, k=config.top_k) for d in selected]


def build_embedding_matrix(table: EmbeddingTable, names: list[str]) -> np.ndarray:
    """Stack embed_label vectors for a name list into a (len(names), dim) matrix."""
    out = np.empty((len(names), table.dim))
    for i, name in enumerate(names):
        out[i] = embed_label(table, name).vector
    return out


@dataclass(frozen=True)
class SymbolicInversion:
    """What a symbolic vector reveals: names by similarity plus the two boxes."""

    class_names: list[str]
    attribute_ranking: list[tuple[str, float]]
    global_box: NormalizedBox
    relative_box: NormalizedBox


def invert_symbolic(
    enc: ObjectEncoding,
    vocab: Vocabulary,
    table: EmbeddingTable,
    k: int = 5,
    class_matrix: np.ndarray | None = None,
    attribute_matrix: np.ndarray | None = None,
) -> SymbolicInversion:
    """Recover what a symbolic vector exposes.

    Each class slot maps to the vocabulary name whose embedding is most
    cosine-similar (zero-norm slots report 'unrecoverable'); the attribute
    block yields the full vocabulary ranked by cosine similarity, with no
    unique-recovery claim; the box blocks are read off directly.

    Precomputed ``class_matrix``/``attribute_matrix`` (from
    build_embedding_matrix) avoid re-embedding the vocabulary per call.
    """
    if enc.tier != PrivacyTier.PRIVATE:
        raise InvalidInputError(f"inversion applies to PRIVATE encodings, got {enc.tier.name}")
    class_end, attr_end, box_end = symbolic_offsets(k, table.dim)
    if class_matrix is None:
        class_matrix = build_embedding_matrix(table, vocab.class_names)
    if attribute_matrix is None:
        attribute_matrix = build_embedding_matrix(table, vocab.attribute_names)

    class_norms = np.linalg.norm(class_matrix, axis=1)
    names = []
    for slot in range(k):
        seg = enc.vector[slot * table.dim : (slot + 1) * table.dim]
        seg_norm = np.linalg.norm(seg)
        if seg_norm == 0:
            names.append(UNRECOVERABLE)
            continue
        sims = class_matrix @ seg / seg_norm
        np.divide(sims, class_norms, out=sims, where=class_norms > 0)
        sims[class_norms == 0] = -np.inf
        names.append(vocab.class_names[int(np.argmax(sims))])

    attr_norms = np.linalg.norm(attribute_matrix, axis=1)
    attr_seg = enc.vector[class_end:attr_end]
    attr_seg_norm = np.linalg.norm(attr_seg)
    if attr_seg_norm == 0:
        ranking = [(name, 0.0) for name in vocab.attribute_names]
    else:
        sims = attribute_matrix @ attr_seg / attr_seg_norm
        np.divide(sims, attr_norms, out=sims, where=attr_norms > 0)
        order = np.argsort(-sims, kind="stable")
        ranking = [(vocab.attribute_names[int(i)], float(sims[i])) for i in order]

    boxes = enc.vector[attr_end:box_end]
    return SymbolicInversion(
        class_names=names,
        attribute_ranking=ranking,
        global_box=NormalizedBox(*boxes[:4]),
        relative_box=NormalizedBox(*boxes[4:8]),
    )
