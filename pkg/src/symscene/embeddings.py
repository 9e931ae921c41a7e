"""Word-embedding table loading and label-name resolution.

The table file is the common pretrained-embedding text layout: UTF-8, one
``<token> <float> ... <float>`` entry per line, space-delimited, no header.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from symscene.errors import InvalidInputError, ParseError


@dataclass(frozen=True)
class EmbeddingTable:
    """Read-only token -> vector map; every vector has length ``dim``."""

    dim: int
    entries: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError(f"embedding dim must be positive, got {self.dim}")

    @classmethod
    def from_entries(cls, entries: dict[str, np.ndarray]) -> "EmbeddingTable":
        """Build a table from in-memory vectors, validating shape and finiteness."""
        if not entries:
            raise InvalidInputError("embedding table must have at least one entry")
        frozen: dict[str, np.ndarray] = {}
        dim = None
        for token, vec in entries.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.ndim != 1:
                raise InvalidInputError(f"token {token!r}: expected a 1-d vector")
            if dim is None:
                dim = arr.shape[0]
            elif arr.shape[0] != dim:
                raise InvalidInputError(f"token {token!r}: expected a length-{dim} vector")
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"token {token!r}: vector has non-finite components")
            arr = arr.copy()
            arr.flags.writeable = False
            frozen[token.lower()] = arr
        return cls(dim=int(dim), entries=frozen)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class LabelEmbedding:
    """Resolved label vector plus the tokens that were not in the table."""

    vector: np.ndarray
    oov_tokens: tuple[str, ...] = ()


def load_table(path: str) -> EmbeddingTable:
    """Load an embedding table from a text file.

    The dimension is inferred from the first entry; later lines must match
    it. Duplicate tokens keep the last occurrence. Blank lines are skipped.
    """
    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            token, values = parts[0], parts[1:]
            if dim is None:
                if not values:
                    raise ParseError("entry has a token but no values", line=lineno)
                dim = len(values)
            elif len(values) != dim:
                raise ParseError(
                    f"expected {dim} values after token {token!r}, got {len(values)}",
                    line=lineno,
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"unparseable float in entry {token!r}: {exc}", line=lineno)
            if not np.all(np.isfinite(vec)):
                raise ParseError(f"non-finite value in entry {token!r}", line=lineno)
            vec.flags.writeable = False
            entries[token.lower()] = vec
    if dim is None:
        raise ParseError(f"embedding file {path!r} has no entries")
    return EmbeddingTable(dim=dim, entries=entries)


def embed_label(table: EmbeddingTable, name: str) -> LabelEmbedding:
    """Resolve a (possibly multi-word) label name to one vector.

    The name is lowercased and split on whitespace; the result is the mean
    of the found tokens' vectors. Unfound tokens are skipped and reported;
    a fully out-of-vocabulary name yields the zero vector.
    """
    tokens = name.lower().split()
    if not tokens:
        raise InvalidInputError("label name must be nonempty")
    found = []
    oov = []
    for tok in tokens:
        vec = table.entries.get(tok)
        if vec is None:
            oov.append(tok)
        else:
            found.append(vec)
    if not found:
        return LabelEmbedding(np.zeros(table.dim), tuple(oov))
    if len(found) == 1:
        return LabelEmbedding(found[0], tuple(oov))
    return LabelEmbedding(np.mean(found, axis=0), tuple(oov))
