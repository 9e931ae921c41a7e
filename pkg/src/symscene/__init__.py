"""Privacy-tiered scene encodings for edge-to-cloud visual pipelines.

Detections stay on the device; what leaves is either a raw score layout
(AT_RISK) or a symbolic layout built from label embeddings and normalized
boxes (PRIVATE), both padded to a fixed 2048-component vector. The package
covers box geometry and suppression, embedding lookup, scene encoding and
inversion, detection/label metrics, a binary wire format, and a TCP
client/server pair that enforces a privacy-tier policy.
"""

from symscene import errors
from symscene.codec import (
    VECTOR_DIM,
    ObjectEncoding,
    PrivacyTier,
    SceneEncoding,
    SymbolicInversion,
    TextualEncoding,
    build_embedding_matrix,
    encode_raw,
    encode_scene,
    encode_scene_textual,
    encode_symbolic,
    encode_textual,
    invert_symbolic,
)
from symscene.config import Config, load_config_file, resolve_config
from symscene.detection import (
    Detection,
    Scene,
    TopK,
    Vocabulary,
    load_scenes,
    load_vocabulary,
    normalized_topk_weights,
    select_objects,
    top_k,
)
from symscene.embeddings import EmbeddingTable, LabelEmbedding, embed_label, load_table
from symscene.evaluation import (
    EvalReport,
    GroundTruthObject,
    LabelMetrics,
    Matching,
    attribute_metrics,
    average_precision,
    average_recall,
    class_metrics,
    evaluate_dataset,
    format_report_table,
    load_ground_truth,
    load_predictions,
    match,
)
from symscene.geometry import (
    BoundingBox,
    NormalizedBox,
    enveloping_box,
    iou,
    nms,
    normalize_global,
    normalize_relative,
)
from symscene.kernels import backend
from symscene.transport import FrameServer, FrameStatus, ServerPolicy, send, send_bytes
from symscene.wire import decode_frame, encode_frame, iter_frames, split_frames

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "Config",
    "Detection",
    "EmbeddingTable",
    "EvalReport",
    "FrameServer",
    "FrameStatus",
    "GroundTruthObject",
    "LabelEmbedding",
    "LabelMetrics",
    "Matching",
    "NormalizedBox",
    "ObjectEncoding",
    "PrivacyTier",
    "Scene",
    "SceneEncoding",
    "ServerPolicy",
    "SymbolicInversion",
    "TextualEncoding",
    "TopK",
    "VECTOR_DIM",
    "Vocabulary",
    "attribute_metrics",
    "average_precision",
    "average_recall",
    "backend",
    "build_embedding_matrix",
    "class_metrics",
    "decode_frame",
    "embed_label",
    "encode_frame",
    "encode_raw",
    "encode_scene",
    "encode_scene_textual",
    "encode_symbolic",
    "encode_textual",
    "enveloping_box",
    "errors",
    "evaluate_dataset",
    "format_report_table",
    "invert_symbolic",
    "iou",
    "iter_frames",
    "load_config_file",
    "load_ground_truth",
    "load_predictions",
    "load_scenes",
    "load_table",
    "load_vocabulary",
    "match",
    "nms",
    "normalize_global",
    "normalize_relative",
    "normalized_topk_weights",
    "resolve_config",
    "select_objects",
    "send",
    "send_bytes",
    "split_frames",
    "top_k",
]
