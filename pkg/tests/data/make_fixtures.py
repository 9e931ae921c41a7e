"""Regenerate the derived fixture files in this directory.

Run from the repository root after an intentional change to the toy
vocabulary, scenes, or encoder behavior:

    python3 tests/data/make_fixtures.py

Writes embeddings_toy.txt (seeded random vectors over every vocabulary
token) and golden_scene.symv (the symbolic encoding of scenes_toy.jsonl
under fixture.cfg, used as a byte-level regression anchor).
"""

from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
DIM = 6
SEED = 7


def write_embeddings():
    tokens = []
    for name in ("classes_toy.txt", "attributes_toy.txt"):
        for line in (HERE / name).read_text().splitlines():
            for token in line.strip().lower().split():
                if token and token not in tokens:
                    tokens.append(token)
    rng = np.random.default_rng(SEED)
    lines = []
    for token in tokens:
        vec = rng.normal(size=DIM)
        lines.append(token + " " + " ".join(f"{v:.6f}" for v in vec))
    (HERE / "embeddings_toy.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"embeddings_toy.txt: {len(tokens)} tokens, dim {DIM}")


def write_golden():
    from symscene import codec, wire
    from symscene.config import load_config_file, Config
    from symscene.detection import load_scenes, load_vocabulary
    from symscene.embeddings import load_table

    config = Config(**load_config_file(HERE / "fixture.cfg"))
    vocab = load_vocabulary(HERE / "classes_toy.txt", HERE / "attributes_toy.txt")
    table = load_table(HERE / "embeddings_toy.txt")
    scenes = load_scenes(HERE / "scenes_toy.jsonl", config.num_classes, config.num_attributes)
    blob = bytearray()
    for i, scene in enumerate(scenes):
        scene_id = scene.scene_id or f"scene-{i:04d}"
        enc = codec.encode_scene(scene, "symbolic", vocab, table, config, scene_id=scene_id)
        blob += wire.encode_frame(enc)
    (HERE / "golden_scene.symv").write_bytes(bytes(blob))
    print(f"golden_scene.symv: {len(scenes)} frames, {len(blob)} bytes")


if __name__ == "__main__":
    write_embeddings()
    write_golden()
