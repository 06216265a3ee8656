"""Token-level nearest-neighbor classification over a labeled support set.

Every support token is an entry; a query token is labeled with the tag of its
nearest entry under squared Euclidean distance, per-class minima first. The
softmax of negative per-class minima doubles as the emission distribution for
the structured decoder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import OUTSIDE, TagLabel
from .embed import EmbeddingTable
from .sampler import SupportSet


@dataclass(frozen=True)
class EmissionRow:
    """Per-state probabilities and the per-state minimum distances behind them."""

    probs: Mapping[TagLabel, float]
    min_dists: Mapping[TagLabel, float]


@dataclass(frozen=True)
class SupportIndex:
    """Support tokens grouped by tag state, in deterministic state order.

    States are O first, then I-<class> in the support set's class order
    (ascending span frequency, ties lexicographic); ties in distance resolve
    toward the earlier state. B- support tags are pooled with same-class I-.
    """

    states: tuple[TagLabel, ...]
    by_class: Mapping[TagLabel, np.ndarray]
    dim: int

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(s.cls for s in self.states if not s.is_outside)


def build_support_index(
    support: SupportSet,
    table: EmbeddingTable,
    classes: Sequence[str] | None = None,
) -> SupportIndex:
    """Collect support-token vectors per tag state.

    ``classes`` overrides the state set (order preserved); every requested
    state, including O, must have at least one support token.
    """
    if not support.sentences:
        raise ValueError("empty support set")
    if classes is None:
        present = [c for c in support.class_order if support.counts.get(c, 0) > 0]
        classes = sorted(present, key=lambda c: (support.counts[c], c))
    states: tuple[TagLabel, ...] = (OUTSIDE,) + tuple(TagLabel.inside(c) for c in classes)

    buckets: dict[TagLabel, list[np.ndarray]] = {state: [] for state in states}
    for sid, sentence in zip(support.source_ids, support.sentences):
        if sid >= len(table.vectors):
            raise ValueError(
                f"support sentence {sid} is missing from the embedding table "
                f"({len(table.vectors)} sentences)"
            )
        vectors = table.vectors[sid]
        if vectors.shape[0] != len(sentence.tokens):
            raise ValueError(
                f"support sentence {sid}: {vectors.shape[0]} vectors for "
                f"{len(sentence.tokens)} tokens"
            )
        for t, tag in enumerate(sentence.tags):
            state = OUTSIDE if tag.is_outside else TagLabel.inside(tag.cls)
            if state in buckets:
                buckets[state].append(vectors[t])
    empty = [str(state) for state in states if not buckets[state]]
    if empty:
        raise ValueError(f"no support tokens for state(s): {', '.join(empty)}")
    by_class = {
        state: np.vstack(rows).astype(np.float64) for state, rows in buckets.items()
    }
    return SupportIndex(states=states, by_class=by_class, dim=table.dim)


def sq_euclidean(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.shape != bv.shape:
        raise ValueError(f"dimension mismatch: {av.shape} vs {bv.shape}")
    diff = av - bv
    return float(np.dot(diff, diff))


def _distance_vector(query: np.ndarray, index: SupportIndex) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (index.dim,):
        raise ValueError(f"query shape {q.shape} does not match index dim {index.dim}")
    return np.array(
        [
            float(np.min(np.sum((index.by_class[state] - q) ** 2, axis=1)))
            for state in index.states
        ]
    )


def class_distances(query: np.ndarray, index: SupportIndex) -> dict[TagLabel, float]:
    """Minimum squared distance from the query to each tag state's support tokens."""
    dists = _distance_vector(query, index)
    return dict(zip(index.states, dists.tolist()))


def nearest_tag(query: np.ndarray, index: SupportIndex) -> TagLabel:
    """Tag state with the nearest support token; ties go to the earlier state (O first)."""
    dists = _distance_vector(query, index)
    return index.states[int(np.argmin(dists))]


def emissions(query: np.ndarray, index: SupportIndex) -> EmissionRow:
    """Softmax over negative per-state minimum distances, computed stably."""
    dists = _distance_vector(query, index)
    weights = np.exp(dists.min() - dists)
    probs = weights / weights.sum()
    return EmissionRow(
        probs=dict(zip(index.states, probs.tolist())),
        min_dists=dict(zip(index.states, dists.tolist())),
    )


def emission_rows(vectors: np.ndarray, index: SupportIndex) -> list[EmissionRow]:
    return [emissions(v, index) for v in vectors]


def nnshot_predict(vectors: np.ndarray, index: SupportIndex) -> list[TagLabel]:
    """Independent per-token nearest-neighbor tags for one sentence."""
    return [nearest_tag(v, index) for v in vectors]
