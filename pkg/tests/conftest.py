"""Shared random-instance generators and oracles for property and acceptance tests."""

from __future__ import annotations

import itertools
import random

import numpy as np

from fewner.corpus import OUTSIDE, TagLabel, TagScheme, TaggedSentence
from fewner.knn import EmissionRow
from fewner.transitions import ExpandedTransitions

CLASS_POOL = ["PER", "LOC", "ORG", "MISC", "DATE", "GPE"]


def random_io_sentence(
    rng: random.Random,
    classes: list[str],
    max_len: int = 12,
    entity_rate: float = 0.35,
) -> TaggedSentence:
    length = rng.randint(1, max_len)
    tokens = [f"w{rng.randrange(60)}" for _ in range(length)]
    tags: list[TagLabel] = []
    for _ in range(length):
        if classes and rng.random() < entity_rate:
            tags.append(TagLabel.inside(rng.choice(classes)))
        else:
            tags.append(OUTSIDE)
    return TaggedSentence(tuple(tokens), tuple(tags), TagScheme.IO)


def random_io_corpus(
    rng: random.Random,
    n_sentences: int,
    n_classes: int | None = None,
    max_len: int = 12,
) -> list[TaggedSentence]:
    if n_classes is None:
        n_classes = rng.randint(1, len(CLASS_POOL))
    classes = CLASS_POOL[:n_classes]
    return [random_io_sentence(rng, classes, max_len=max_len) for _ in range(n_sentences)]


def random_bio_sentence(
    rng: random.Random,
    classes: list[str],
    max_segments: int = 6,
    no_adjacent_same_class: bool = True,
) -> TaggedSentence:
    """Segments of O-runs and entities; consecutive entities get distinct classes."""
    tags: list[TagLabel] = []
    prev_entity: str | None = None
    for _ in range(rng.randint(1, max_segments)):
        if rng.random() < 0.45:
            tags.extend([OUTSIDE] * rng.randint(1, 3))
            prev_entity = None
        else:
            choices = classes
            if no_adjacent_same_class and prev_entity is not None:
                choices = [c for c in classes if c != prev_entity]
                if not choices:
                    tags.append(OUTSIDE)
                    prev_entity = None
                    continue
            cls = rng.choice(choices)
            length = rng.randint(1, 3)
            tags.append(TagLabel.begin(cls))
            tags.extend([TagLabel.inside(cls)] * (length - 1))
            prev_entity = cls
    if not tags:
        tags = [OUTSIDE]
    tokens = tuple(f"w{rng.randrange(60)}" for _ in tags)
    return TaggedSentence(tokens, tuple(tags), TagScheme.BIO)


# Per-class vocabularies share no characters, and every word starts with a
# long class-specific prefix, so same-class words always share several
# character trigrams while cross-class words share none: nearest-token
# retrieval is unambiguous by construction.
_ENTITY_WORDS = {
    "ONE": ("a", "bcd"),
    "TWO": ("e", "fgh"),
    "THREE": ("i", "jkl"),
}
_FILLER_WORDS = ("o", "pqrstuv")


def _word(prefix_letter: str, suffix_letters: str, i: int) -> str:
    suffix = "".join(
        suffix_letters[(i // len(suffix_letters) ** j) % len(suffix_letters)]
        for j in range(3)
    )
    return prefix_letter * 4 + suffix


def separable_corpus(
    rng: random.Random,
    n_sentences: int,
    classes: tuple[str, ...] = ("ONE", "TWO", "THREE"),
) -> list[TaggedSentence]:
    sentences = []
    for _ in range(n_sentences):
        tokens: list[str] = []
        tags: list[TagLabel] = []
        for _ in range(rng.randint(2, 4)):
            tokens.append(_word(*_FILLER_WORDS, rng.randrange(300)))
            tags.append(OUTSIDE)
        for _ in range(rng.randint(1, 2)):
            cls = rng.choice(classes)
            for _ in range(rng.randint(1, 2)):
                tokens.append(_word(*_ENTITY_WORDS[cls], rng.randrange(200)))
                tags.append(TagLabel.inside(cls))
            tokens.append(_word(*_FILLER_WORDS, rng.randrange(300)))
            tags.append(OUTSIDE)
        sentences.append(TaggedSentence(tuple(tokens), tuple(tags), TagScheme.IO))
    return sentences


def unique_token_corpus(n_sentences: int) -> list[TaggedSentence]:
    """Every token string is globally unique, so hashed vectors are distinct."""
    sentences = []
    counter = 0
    classes = ("PER", "LOC")
    for i in range(n_sentences):
        tokens, tags = [], []
        for j in range(4):
            tokens.append(f"u{counter}x")
            counter += 1
            if j == 1:
                tags.append(TagLabel.inside(classes[i % 2]))
            else:
                tags.append(OUTSIDE)
        sentences.append(TaggedSentence(tuple(tokens), tuple(tags), TagScheme.IO))
    return sentences


def random_support_index(rng: np.random.Generator, n_classes: int, dim: int):
    """A support index over random unit vectors, one sentence per class bucket."""
    from collections import Counter

    from fewner.corpus import compute_tag_set, to_spans
    from fewner.embed import EmbeddingTable
    from fewner.knn import build_support_index
    from fewner.sampler import SupportSet

    classes = [f"C{i}" for i in range(n_classes)]
    sentences, arrays = [], []
    for cls in [None] + classes:
        n_tokens = int(rng.integers(1, 4))
        tokens = tuple(f"t{j}" for j in range(n_tokens))
        tag = OUTSIDE if cls is None else TagLabel.inside(cls)
        sentences.append(TaggedSentence(tokens, (tag,) * n_tokens, TagScheme.IO))
        vecs = rng.normal(size=(n_tokens, dim))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        arrays.append(vecs.astype(np.float32))
    table = EmbeddingTable.build(arrays, dim)
    counts = Counter()
    for s in sentences:
        counts.update(sp.cls for sp in to_spans(s))
    support = SupportSet(
        sentences=tuple(sentences),
        k=1,
        counts=dict(counts),
        source_ids=tuple(range(len(sentences))),
        seed=0,
        class_order=compute_tag_set(sentences).classes,
    )
    return build_support_index(support, table)


def random_expanded(rng: np.random.Generator, n_classes: int) -> ExpandedTransitions:
    """Random row-stochastic transition matrix (START row cannot reach END)."""
    size = n_classes + 2
    mat = np.zeros((size, size))
    mat[0, : size - 1] = rng.dirichlet(np.ones(size - 1))
    for i in range(1, size):
        mat[i] = rng.dirichlet(np.ones(size))
    return ExpandedTransitions(
        classes=tuple(f"C{i}" for i in range(n_classes)), matrix=mat
    )


def random_emission_rows(
    rng: np.random.Generator, states: tuple[TagLabel, ...], n_tokens: int
) -> list[EmissionRow]:
    rows = []
    for _ in range(n_tokens):
        probs = rng.dirichlet(np.ones(len(states)))
        rows.append(
            EmissionRow(
                probs=dict(zip(states, probs.tolist())),
                min_dists=dict(zip(states, (-np.log(probs)).tolist())),
            )
        )
    return rows


def brute_force_viterbi(
    rows: list[EmissionRow], trans: ExpandedTransitions
) -> tuple[list[TagLabel], float]:
    """Exhaustive enumeration of every path; the oracle for the decoder."""
    states = trans.states
    n_states = len(states)
    em = np.array([[row.probs[s] for s in states] for row in rows])
    with np.errstate(divide="ignore"):
        log_em = np.log(em)
        log_start = np.log(trans.start_probs())
        log_inner = np.log(trans.inner())
        log_end = np.log(trans.end_probs())
    best_path: tuple[int, ...] | None = None
    best_score = -np.inf
    for path in itertools.product(range(n_states), repeat=len(rows)):
        score = log_start[path[0]] + log_em[0, path[0]]
        for t in range(1, len(rows)):
            score += log_inner[path[t - 1], path[t]] + log_em[t, path[t]]
        score += log_end[path[-1]]
        if score > best_score:
            best_path, best_score = path, score
    assert best_path is not None
    return [states[i] for i in best_path], float(best_score)
