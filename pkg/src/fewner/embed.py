"""Per-token embedding tables: L2 normalization, binary store, hashing featurizer.

Store format (FSEMB1, little-endian): magic ``FSEMB1``, u32 dim, u32 sentence
count, then per sentence a u32 token count followed by token_count*dim float32
values. A sidecar ``<path>.manifest`` records provenance and the corpus digest.

Normalization happens once, when a table is built or loaded; distance code
downstream never re-normalizes.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import TaggedSentence

log = logging.getLogger(__name__)

MAGIC = b"FSEMB1"

# Vectors whose norm is already this close to 1 are left bit-identical, which
# makes normalization idempotent and the store round trip exact.
_UNIT_TOL = 1e-6


class EmbeddingFormatError(ValueError):
    """Corrupt, truncated, or misaligned embedding store."""


def l2_normalize(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Scale a vector to unit Euclidean norm.

    A zero vector is returned unchanged (logged as degenerate); a vector that
    is already unit-norm within 1e-6 is returned unchanged so repeated
    normalization is a no-op at float32 precision.
    """
    arr = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite components")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        log.warning("degenerate zero vector left unnormalized")
        return arr
    if abs(norm - 1.0) <= _UNIT_TOL:
        return arr
    return arr / norm


@dataclass(frozen=True)
class EmbeddingTable:
    """One float32 matrix of shape (tokens, dim) per sentence."""

    dim: int
    vectors: tuple[np.ndarray, ...]
    provenance: str = ""

    @classmethod
    def build(
        cls,
        arrays: Sequence[np.ndarray],
        dim: int,
        provenance: str = "",
        normalize: bool = True,
    ) -> "EmbeddingTable":
        out: list[np.ndarray] = []
        zero_rows = 0
        for i, arr in enumerate(arrays):
            a = np.asarray(arr, dtype=np.float32)
            if a.ndim != 2 or a.shape[1] != dim:
                raise ValueError(f"sentence {i}: expected shape (*, {dim}), got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"sentence {i}: non-finite embedding values")
            if normalize:
                a64 = a.astype(np.float64)
                norms = np.linalg.norm(a64, axis=1)
                zero_rows += int(np.count_nonzero(norms == 0.0))
                scale = (norms > 0.0) & (np.abs(norms - 1.0) > _UNIT_TOL)
                if np.any(scale):
                    a = a.copy()
                    a[scale] = (a64[scale] / norms[scale, None]).astype(np.float32)
            a.setflags(write=False)
            out.append(a)
        if zero_rows:
            log.warning("%d zero vectors left unnormalized", zero_rows)
        return cls(dim=dim, vectors=tuple(out), provenance=provenance)


def corpus_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _manifest_path(path: str | Path) -> Path:
    return Path(str(path) + ".manifest")


def write_embeddings(
    table: EmbeddingTable,
    path: str | Path,
    corpus_sha256: str = "",
) -> None:
    """Write the table in FSEMB1 format plus its sidecar manifest."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", table.dim, len(table.vectors)))
        for arr in table.vectors:
            f.write(struct.pack("<I", arr.shape[0]))
            f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    manifest = [
        "format=FSEMB1",
        f"dim={table.dim}",
        f"sentences={len(table.vectors)}",
        f"provenance={table.provenance}",
        f"corpus_sha256={corpus_sha256}",
    ]
    _manifest_path(path).write_text("\n".join(manifest) + "\n", encoding="utf-8")


def read_manifest(path: str | Path) -> dict[str, str]:
    """Read an embedding sidecar manifest; missing file yields an empty dict."""
    mpath = _manifest_path(path)
    if not mpath.exists():
        return {}
    fields: dict[str, str] = {}
    for raw in mpath.read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    return fields


def load_embeddings(path: str | Path, corpus: Sequence[TaggedSentence]) -> EmbeddingTable:
    """Load an FSEMB1 file and check it is aligned to the corpus token-for-token."""
    path = Path(path)
    data = path.read_bytes()
    header = struct.calcsize("<II")
    if len(data) < len(MAGIC) + header:
        raise EmbeddingFormatError(f"{path}: truncated or empty embedding file")
    if data[: len(MAGIC)] != MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic, not an FSEMB1 file")
    dim, n_sentences = struct.unpack_from("<II", data, len(MAGIC))
    if dim < 1:
        raise EmbeddingFormatError(f"{path}: dimension {dim} is invalid")
    if n_sentences != len(corpus):
        raise EmbeddingFormatError(
            f"{path}: file has {n_sentences} sentences, corpus has {len(corpus)}"
        )

    offset = len(MAGIC) + header
    arrays: list[np.ndarray] = []
    for i in range(n_sentences):
        if offset + 4 > len(data):
            raise EmbeddingFormatError(f"{path}: truncated at sentence {i}")
        (n_tokens,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if n_tokens != len(corpus[i].tokens):
            raise EmbeddingFormatError(
                f"{path}: sentence {i} has {n_tokens} vectors for "
                f"{len(corpus[i].tokens)} tokens"
            )
        nbytes = n_tokens * dim * 4
        if offset + nbytes > len(data):
            raise EmbeddingFormatError(f"{path}: truncated inside sentence {i}")
        arr = np.frombuffer(data, dtype="<f4", count=n_tokens * dim, offset=offset)
        arrays.append(arr.reshape(n_tokens, dim))
        offset += nbytes
    if offset != len(data):
        raise EmbeddingFormatError(
            f"{path}: {len(data) - offset} trailing bytes; dimension or counts are inconsistent"
        )
    if any(not np.all(np.isfinite(a)) for a in arrays):
        raise EmbeddingFormatError(f"{path}: non-finite embedding values")
    provenance = read_manifest(path).get("provenance", "")
    return EmbeddingTable.build(arrays, dim, provenance=provenance, normalize=True)


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def hash_featurize(
    corpus: Sequence[TaggedSentence],
    dim: int,
    window: int = 1,
) -> EmbeddingTable:
    """Deterministic signed feature hashing of tokens into unit vectors.

    Features per token: lowercase identity, character 3-grams of the
    boundary-marked token, and neighbor identities at offsets 1..window
    weighted by 1/(1+offset). Buckets and signs come from FNV-1a 64 over the
    UTF-8 feature string, so tables are bit-identical across platforms.
    """
    if dim < 8:
        raise ValueError(f"dim must be at least 8, got {dim}")
    if window < 0:
        raise ValueError(f"window must be non-negative, got {window}")

    slots: dict[bytes, tuple[int, float]] = {}

    def slot(key: bytes) -> tuple[int, float]:
        cached = slots.get(key)
        if cached is None:
            h = _fnv1a64(key)
            cached = ((h >> 1) % dim, 1.0 if (h & 1) == 0 else -1.0)
            slots[key] = cached
        return cached

    arrays: list[np.ndarray] = []
    for sentence in corpus:
        lowered = [t.lower() for t in sentence.tokens]
        mat = np.zeros((len(lowered), dim), dtype=np.float64)
        for t, token in enumerate(lowered):
            row = mat[t]
            idx, sign = slot(b"w=" + token.encode("utf-8"))
            row[idx] += sign
            marked = f"^{token}$"
            for i in range(len(marked) - 2):
                idx, sign = slot(b"g=" + marked[i : i + 3].encode("utf-8"))
                row[idx] += sign
            for off in range(1, window + 1):
                weight = 1.0 / (1.0 + off)
                if t - off >= 0:
                    idx, sign = slot(f"c[-{off}]={lowered[t - off]}".encode("utf-8"))
                    row[idx] += sign * weight
                if t + off < len(lowered):
                    idx, sign = slot(f"c[+{off}]={lowered[t + off]}".encode("utf-8"))
                    row[idx] += sign * weight
        arrays.append(mat)
    return EmbeddingTable.build(arrays, dim, provenance="hash-featurizer", normalize=True)
