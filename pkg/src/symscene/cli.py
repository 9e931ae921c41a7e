"""Command-line entry point.

Subcommands: encode, eval, serve, send, invert. Usage problems (bad flags,
missing files, invalid configuration) exit with status 2; runtime failures
(unparseable data, network errors, undefined metrics) exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from symscene import codec, transport, wire
from symscene.config import Config, resolve_config
from symscene.detection import load_scenes, load_vocabulary
from symscene.embeddings import load_table
from symscene.errors import ConfigError, SymsceneError
from symscene.evaluation import (
    evaluate_dataset,
    format_report_table,
    load_ground_truth,
    load_predictions,
)

_TIER_NAMES = {
    "at-risk": codec.PrivacyTier.AT_RISK,
    "private": codec.PrivacyTier.PRIVATE,
}


def _add_config_flags(sub: argparse.ArgumentParser):
    group = sub.add_argument_group("configuration")
    group.add_argument("--config", help="key=value config file (or set SYMSCENE_CONFIG)")
    group.add_argument("--num-classes", type=int)
    group.add_argument("--num-attributes", type=int)
    group.add_argument("--embedding-dim", type=int)
    group.add_argument("--top-k", type=int)
    group.add_argument("--score-threshold", type=float)
    group.add_argument("--iou-threshold", type=float)
    group.add_argument("--max-objects", type=int)
    group.add_argument("--attr-threshold", type=float)
    group.add_argument("--no-weight-norm", action="store_true",
                       help="use raw top-k attribute scores as weights")
    group.add_argument("--include-captions", action="store_true",
                       help="carry scene captions in encoded frames")


def _load_config(args) -> Config:
    overrides = {
        "num_classes": args.num_classes,
        "num_attributes": args.num_attributes,
        "embedding_dim": args.embedding_dim,
        "top_k": args.top_k,
        "score_threshold": args.score_threshold,
        "iou_threshold": args.iou_threshold,
        "max_objects": args.max_objects,
        "attr_threshold": args.attr_threshold,
        "weight_norm": False if args.no_weight_norm else None,
        "include_captions": True if args.include_captions else None,
    }
    config = resolve_config(args.config, overrides)
    if args.verbose:
        for key, value in sorted(config.as_dict().items()):
            print(f"# config {key}={value}", file=sys.stderr)
    return config


def _load_vocab_checked(args, config: Config):
    vocab = load_vocabulary(args.classes, args.attributes)
    if vocab.num_classes != config.num_classes:
        raise ConfigError(
            f"class file has {vocab.num_classes} entries, config says {config.num_classes}"
        )
    if vocab.num_attributes != config.num_attributes:
        raise ConfigError(
            f"attribute file has {vocab.num_attributes} entries, "
            f"config says {config.num_attributes}"
        )
    return vocab


def _load_table_checked(path, config: Config):
    table = load_table(path)
    if table.dim != config.embedding_dim:
        raise ConfigError(
            f"embedding file has dimension {table.dim}, config says {config.embedding_dim}"
        )
    return table


def _parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"address must look like host:port, got {text!r}")
    try:
        return host, int(port)
    except ValueError:
        raise ConfigError(f"bad port in address {text!r}") from None


def _scene_label(scene, index: int) -> str:
    return scene.scene_id if scene.scene_id is not None else f"scene-{index:04d}"


def cmd_encode(args) -> int:
    config = _load_config(args)
    vocab = _load_vocab_checked(args, config)
    scenes = load_scenes(args.scenes, config.num_classes, config.num_attributes)
    if args.mode == "textual":
        lines = []
        for i, scene in enumerate(scenes):
            objects = codec.encode_scene_textual(scene, vocab, config)
            lines.append(json.dumps({
                "scene_id": _scene_label(scene, i),
                "objects": [
                    {"class_words": t.class_words, "attribute_words": t.attribute_words}
                    for t in objects
                ],
            }))
        Path(args.output).write_text("\n".join(lines) + "\n", encoding="utf-8")
        return 0
    table = None
    if args.mode == "symbolic":
        if args.embeddings is None:
            raise ConfigError("--embeddings is required for symbolic mode")
        table = _load_table_checked(args.embeddings, config)
    blob = bytearray()
    for i, scene in enumerate(scenes):
        enc = codec.encode_scene(
            scene, args.mode, vocab, table, config, scene_id=_scene_label(scene, i)
        )
        blob += wire.encode_frame(enc)
    Path(args.output).write_bytes(bytes(blob))
    if args.verbose:
        print(f"# wrote {len(scenes)} frame(s), {len(blob)} bytes", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args)
    preds = load_predictions(args.predictions, config.num_classes, config.num_attributes)
    gts = load_ground_truth(args.ground_truth, config.num_classes, config.num_attributes)
    report = evaluate_dataset(
        preds,
        gts,
        iou_threshold=config.iou_threshold,
        max_dets=args.max_dets,
        attr_threshold=config.attr_threshold,
        attr_topk=args.attr_topk,
    )
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(format_report_table(report))
    return 0


def cmd_serve(args) -> int:
    host, port = _parse_address(args.bind)
    policy = transport.ServerPolicy(
        minimum_tier=_TIER_NAMES[args.min_tier],
        max_objects=args.max_objects,
        max_frame_bytes=args.max_frame_bytes,
    )
    server = transport.FrameServer(host, port, policy, record_dir=args.record)
    bound = server.address
    print(f"listening on {bound[0]}:{bound[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def cmd_send(args) -> int:
    blobs = []
    for path in args.input:
        blobs.extend(wire.split_frames(Path(path).read_bytes()))
    statuses = transport.send_bytes(_parse_address(args.addr), blobs)
    rejected = 0
    for i, status in enumerate(statuses):
        label = status.name.lower().replace("_", "-")
        print(f"frame {i}: {label}")
        if status != transport.FrameStatus.ACCEPTED:
            rejected += 1
    return 1 if rejected else 0


def cmd_invert(args) -> int:
    config = _load_config(args)
    vocab = _load_vocab_checked(args, config)
    table = _load_table_checked(args.embeddings, config)
    class_matrix = codec.build_embedding_matrix(table, vocab.class_names)
    attribute_matrix = codec.build_embedding_matrix(table, vocab.attribute_names)
    out = []
    for frame in wire.iter_frames(Path(args.input).read_bytes()):
        for idx in range(frame.num_objects):
            enc = codec.ObjectEncoding(vector=frame.objects[idx], tier=frame.tier)
            inv = codec.invert_symbolic(
                enc,
                vocab,
                table,
                k=config.top_k,
                class_matrix=class_matrix,
                attribute_matrix=attribute_matrix,
            )
            out.append(json.dumps({
                "scene_id": frame.scene_id,
                "object": idx,
                "class_names": inv.class_names,
                "top_attributes": [
                    [name, sim] for name, sim in inv.attribute_ranking[: config.top_k]
                ],
                "global_box": list(inv.global_box.as_tuple()),
                "relative_box": list(inv.relative_box.as_tuple()),
            }))
    text = "\n".join(out) + ("\n" if out else "")
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symscene",
        description="Encode detection scenes as privacy-tiered vectors, "
                    "ship them, and score predictions.",
    )
    parser.add_argument("--verbose", action="store_true", help="log details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="turn a scenes file into wire frames")
    p.add_argument("--scenes", required=True, help="scene JSONL file")
    p.add_argument("--classes", required=True, help="class vocabulary, one name per line")
    p.add_argument("--attributes", required=True, help="attribute vocabulary file")
    p.add_argument("--embeddings", help="word embedding text file (symbolic mode)")
    p.add_argument("--mode", choices=("symbolic", "raw", "textual"), default="symbolic")
    p.add_argument("--output", required=True, help="output path (.symv or .jsonl)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--predictions", required=True, help="prediction JSONL file")
    p.add_argument("--ground-truth", required=True, help="ground-truth JSONL file")
    p.add_argument("--max-dets", type=int, default=100,
                   help="per-image prediction budget for average recall")
    p.add_argument("--attr-topk", type=int,
                   help="score attributes by top-k sets instead of thresholding")
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="listen for frames and record accepted ones")
    p.add_argument("--bind", required=True, help="host:port (port 0 picks a free port)")
    p.add_argument("--min-tier", choices=sorted(_TIER_NAMES), default="private")
    p.add_argument("--max-objects", type=int, default=100)
    p.add_argument("--max-frame-bytes", type=int, default=16 * 1024 * 1024)
    p.add_argument("--record", help="directory for accepted frames (.symv each)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("send", help="ship frame files to a server")
    p.add_argument("--addr", required=True, help="server host:port")
    p.add_argument("--input", required=True, nargs="+", help=".symv file(s) to send")
    p.set_defaults(func=cmd_send)

    p = sub.add_parser("invert", help="report what symbolic frames reveal")
    p.add_argument("--input", required=True, help=".symv file of symbolic frames")
    p.add_argument("--classes", required=True)
    p.add_argument("--attributes", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--output", help="write JSONL here instead of stdout")
    _add_config_flags(p)
    p.set_defaults(func=cmd_invert)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SymsceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
