"""Greedy K-shot support-set sampling and evaluation-episode construction.

Classes are processed in ascending span-frequency order; sentences containing
the current class are drawn uniformly without replacement until the class has
K entity spans, and every draw credits all classes it contains. Draws use the
stdlib Mersenne Twister seeded explicitly, so results are bit-reproducible
across platforms.
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import TaggedSentence, compute_tag_set, to_spans

log = logging.getLogger(__name__)

# LCG step used to derive the test-draw stream from the episode seed.
_MIX_MUL = 6364136223846793005
_MIX_ADD = 1442695040888963407


@dataclass(frozen=True)
class SupportSet:
    """K-shot labeled sentences with per-class entity-span counts."""

    sentences: tuple[TaggedSentence, ...]
    k: int
    counts: Mapping[str, int]
    source_ids: tuple[int, ...]
    seed: int
    class_order: tuple[str, ...]
    shortfalls: tuple[str, ...] = ()


@dataclass(frozen=True)
class Episode:
    """A sampled support set plus a disjoint sampled test set."""

    support: SupportSet
    test: tuple[TaggedSentence, ...]
    test_ids: tuple[int, ...]
    test_shortfalls: tuple[str, ...] = ()


def _span_counts(pool: Sequence[TaggedSentence]) -> list[Counter[str]]:
    return [Counter(span.cls for span in to_spans(s)) for s in pool]


def _check_single_scheme(pool: Sequence[TaggedSentence]) -> None:
    schemes = {s.scheme for s in pool}
    if len(schemes) > 1:
        raise ValueError(f"pool mixes tagging schemes: {sorted(x.value for x in schemes)}")


def greedy_sample(
    pool: Sequence[TaggedSentence],
    k: int,
    seed: int,
    max_sentences: int | None = None,
) -> SupportSet:
    """Sample a K-shot support set from the pool.

    A class that runs out of unselected sentences before reaching k spans is
    recorded as a shortfall rather than aborting the sample. ``max_sentences``
    caps the selection size (used for episode test sets); a cap hit is also
    recorded as a shortfall for every class still below k.
    """
    if not pool:
        raise ValueError("empty pool")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    _check_single_scheme(pool)

    tag_set = compute_tag_set(pool)
    per_sentence = _span_counts(pool)
    rng = random.Random(seed)

    selected: list[int] = []
    selected_set: set[int] = set()
    counts: dict[str, int] = {c: 0 for c in tag_set.classes}
    shortfalls: list[str] = []

    capped = False
    for cls in tag_set.classes:
        while counts[cls] < k:
            if max_sentences is not None and len(selected) >= max_sentences:
                capped = True
                break
            candidates = [
                i
                for i in range(len(pool))
                if i not in selected_set and per_sentence[i][cls] > 0
            ]
            if not candidates:
                shortfalls.append(cls)
                break
            pick = candidates[rng.randrange(len(candidates))]
            selected.append(pick)
            selected_set.add(pick)
            for name, n in per_sentence[pick].items():
                counts[name] += n
        if capped:
            shortfalls.extend(c for c in tag_set.classes if counts[c] < k and c not in shortfalls)
            break

    if shortfalls:
        log.warning(
            "sampling shortfall (k=%d, seed=%d) for classes: %s",
            k,
            seed,
            ", ".join(shortfalls),
        )
    return SupportSet(
        sentences=tuple(pool[i] for i in selected),
        k=k,
        counts=counts,
        source_ids=tuple(selected),
        seed=seed,
        class_order=tag_set.classes,
        shortfalls=tuple(shortfalls),
    )


def build_episode(
    pool: Sequence[TaggedSentence],
    k: int,
    test_size: int = 30,
    seed: int = 0,
) -> Episode:
    """Sample a support set, then a disjoint K-shot test set from the remainder.

    The test set reuses the greedy procedure over the remaining sentences,
    capped at ``test_size`` sentences; its draws come from a stream derived
    from the episode seed. A remainder without any entity falls back to a
    uniform draw of up to ``test_size`` sentences so the test set is never
    empty.
    """
    if test_size < 1:
        raise ValueError(f"test_size must be positive, got {test_size}")
    support = greedy_sample(pool, k, seed)
    taken = set(support.source_ids)
    remaining = [i for i in range(len(pool)) if i not in taken]
    if not remaining:
        raise ValueError("support consumed the whole pool; no test remainder")

    test_seed = (seed * _MIX_MUL + _MIX_ADD) % (1 << 64)
    sub_pool = [pool[i] for i in remaining]
    drawn = greedy_sample(sub_pool, k, test_seed, max_sentences=test_size)
    test_local = list(drawn.source_ids)
    if not test_local:
        rng = random.Random(test_seed)
        test_local = sorted(rng.sample(range(len(sub_pool)), min(test_size, len(sub_pool))))
    test_ids = tuple(remaining[j] for j in test_local)
    # classes the support consumed entirely are shortfalls for the test set too
    consumed = [
        c for c in support.class_order if c not in compute_tag_set(sub_pool).counts
    ]
    shortfalls = tuple(dict.fromkeys(list(drawn.shortfalls) + consumed))
    if consumed:
        log.warning(
            "test draw (seed=%d): no remaining sentences for classes: %s",
            seed,
            ", ".join(consumed),
        )
    return Episode(
        support=support,
        test=tuple(pool[i] for i in test_ids),
        test_ids=test_ids,
        test_shortfalls=shortfalls,
    )


def save_support_manifest(support: SupportSet, path: str | Path) -> None:
    """Write a line-oriented key=value manifest so the sample can be re-loaded or released."""
    lines = [
        "format=FSSUP1",
        f"seed={support.seed}",
        f"k={support.k}",
        f"class_order={','.join(support.class_order)}",
        f"sentences={','.join(str(i) for i in support.source_ids)}",
        f"shortfalls={','.join(support.shortfalls)}",
    ]
    for cls in support.class_order:
        lines.append(f"count.{cls}={support.counts.get(cls, 0)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_support_manifest(path: str | Path, pool: Sequence[TaggedSentence]) -> SupportSet:
    """Re-build a support set from its manifest against the pool it was sampled from.

    Counts are recomputed from the pool and checked against the manifest, so a
    manifest applied to the wrong corpus fails loudly instead of silently.
    """
    fields: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    if fields.get("format") != "FSSUP1":
        raise ValueError(f"{path}: not a support-set manifest")

    ids = tuple(int(x) for x in fields["sentences"].split(",") if x != "")
    for i in ids:
        if not (0 <= i < len(pool)):
            raise ValueError(f"{path}: sentence index {i} outside pool of {len(pool)}")
    per_sentence = _span_counts(pool)
    counts: Counter[str] = Counter()
    for i in ids:
        counts.update(per_sentence[i])
    class_order = tuple(x for x in fields["class_order"].split(",") if x != "")
    expected = {
        key[len("count.") :]: int(value)
        for key, value in fields.items()
        if key.startswith("count.")
    }
    for cls, n in expected.items():
        if counts.get(cls, 0) != n:
            raise ValueError(
                f"{path}: manifest count {cls}={n} does not match pool recount {counts.get(cls, 0)}"
            )
    full_counts = {c: counts.get(c, 0) for c in class_order} | dict(counts)
    return SupportSet(
        sentences=tuple(pool[i] for i in ids),
        k=int(fields["k"]),
        counts=full_counts,
        source_ids=ids,
        seed=int(fields.get("seed", "0")),
        class_order=class_order,
        shortfalls=tuple(x for x in fields.get("shortfalls", "").split(",") if x != ""),
    )
