"""Column-format NER corpora: parsing, tagging schemes, entity spans, label remapping.

The ingestion contract is the classic two-column format: one token per line,
the last whitespace-separated column is the tag, a blank line ends a sentence.
Middle columns (POS, chunk, ...) are ignored so multi-column corpora load as-is.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

log = logging.getLogger(__name__)


class ParseError(ValueError):
    """Malformed column-format input."""


class TagScheme(Enum):
    BIO = "BIO"
    IO = "IO"


@dataclass(frozen=True, slots=True)
class TagLabel:
    """Per-token label: ``O``, ``I-<class>``, or ``B-<class>`` (BIO only)."""

    prefix: str
    cls: str = ""

    def __post_init__(self) -> None:
        if self.prefix not in ("O", "B", "I"):
            raise ValueError(f"bad tag prefix {self.prefix!r}")
        if self.prefix == "O" and self.cls:
            raise ValueError("O tag carries no entity class")
        if self.prefix != "O" and not self.cls:
            raise ValueError(f"{self.prefix}- tag needs a non-empty entity class")

    @classmethod
    def outside(cls) -> "TagLabel":
        return cls("O")

    @classmethod
    def inside(cls, name: str) -> "TagLabel":
        return cls("I", name)

    @classmethod
    def begin(cls, name: str) -> "TagLabel":
        return cls("B", name)

    @classmethod
    def from_string(cls, text: str) -> "TagLabel":
        if text == "O":
            return cls("O")
        if len(text) >= 2 and text[0] in ("B", "I") and text[1] == "-":
            return cls(text[0], text[2:])
        raise ValueError(f"unrecognized tag {text!r}")

    @property
    def is_outside(self) -> bool:
        return self.prefix == "O"

    def __str__(self) -> str:
        return self.prefix if self.prefix == "O" else f"{self.prefix}-{self.cls}"


OUTSIDE = TagLabel.outside()


@dataclass(frozen=True, slots=True)
class TaggedSentence:
    """Tokens paired with per-token tags under a declared scheme.

    Construction validates the scheme: no B- tags under IO, and under BIO an
    I-x tag must continue a same-class entity opened by B-x or I-x.
    """

    tokens: tuple[str, ...]
    tags: tuple[TagLabel, ...]
    scheme: TagScheme

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"{len(self.tokens)} tokens vs {len(self.tags)} tags"
            )
        if not self.tokens:
            raise ValueError("empty sentence")
        prev: TagLabel | None = None
        for t, tag in enumerate(self.tags):
            if self.scheme is TagScheme.IO and tag.prefix == "B":
                raise ValueError(f"B- tag at position {t} under IO scheme")
            if self.scheme is TagScheme.BIO and tag.prefix == "I":
                if prev is None or prev.prefix == "O" or prev.cls != tag.cls:
                    raise ValueError(
                        f"I-{tag.cls} at position {t} has no same-class opener"
                    )
            prev = tag

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True, slots=True)
class EntitySpan:
    """Maximal entity mention: class plus inclusive token range."""

    cls: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if not (0 <= self.start <= self.end):
            raise ValueError(f"bad span bounds ({self.start}, {self.end})")


@dataclass(frozen=True)
class TagSet:
    """Entity classes of a corpus, ordered by ascending span frequency (ties lexicographic)."""

    classes: tuple[str, ...]
    counts: Mapping[str, int]


def repair_bio(tags: Sequence[TagLabel]) -> tuple[list[TagLabel], int]:
    """Promote orphan I-x tags to B-x so the sequence is BIO-valid.

    Returns the repaired tags and how many promotions were made.
    """
    out: list[TagLabel] = []
    repaired = 0
    prev: TagLabel | None = None
    for tag in tags:
        if tag.prefix == "I" and (
            prev is None or prev.prefix == "O" or prev.cls != tag.cls
        ):
            tag = TagLabel.begin(tag.cls)
            repaired += 1
        out.append(tag)
        prev = tag
    return out, repaired


def make_sentence(tokens: Sequence[str], tags: Sequence[TagLabel]) -> TaggedSentence:
    """Build a sentence from raw tags, detecting the scheme and repairing BIO."""
    scheme = TagScheme.BIO if any(t.prefix == "B" for t in tags) else TagScheme.IO
    if scheme is TagScheme.BIO:
        tags, _ = repair_bio(tags)
    return TaggedSentence(tuple(tokens), tuple(tags), scheme)


def parse_conll(text: str) -> list[TaggedSentence]:
    """Parse whitespace-column text into sentences.

    The scheme is auto-detected over the whole input: any B- tag means BIO,
    otherwise IO. Under BIO, I-x tags without a same-class opener are promoted
    to B-x (conlleval convention) and counted in a single warning.
    """
    groups: list[list[tuple[int, str, str]]] = []
    current: list[tuple[int, str, str]] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            if current:
                groups.append(current)
                current = []
            continue
        cols = line.split()
        if len(cols) < 2:
            raise ParseError(f"line {lineno}: expected at least 2 columns, got {len(cols)}")
        current.append((lineno, cols[0], cols[-1]))
    if current:
        groups.append(current)

    parsed: list[tuple[list[str], list[TagLabel]]] = []
    saw_begin = False
    for group in groups:
        tokens: list[str] = []
        tags: list[TagLabel] = []
        for lineno, token, raw in group:
            try:
                tag = TagLabel.from_string(raw)
            except ValueError as err:
                raise ParseError(f"line {lineno}: {err}") from None
            saw_begin = saw_begin or tag.prefix == "B"
            tokens.append(token)
            tags.append(tag)
        parsed.append((tokens, tags))

    scheme = TagScheme.BIO if saw_begin else TagScheme.IO
    sentences: list[TaggedSentence] = []
    repaired_total = 0
    for tokens, tags in parsed:
        if scheme is TagScheme.BIO:
            tags, repaired = repair_bio(tags)
            repaired_total += repaired
        sentences.append(TaggedSentence(tuple(tokens), tuple(tags), scheme))
    if repaired_total:
        log.warning("promoted %d orphan I- tags to B- while parsing", repaired_total)
    return sentences


def render_conll(sentences: Iterable[TaggedSentence]) -> str:
    """Serialize sentences back to two-column text (token TAB tag).

    parse_conll recovers tokens and tags exactly; the scheme is re-detected,
    so a BIO corpus that happens to contain no B- tag reads back as IO.
    """
    blocks = []
    for sentence in sentences:
        blocks.append(
            "\n".join(f"{tok}\t{tag}" for tok, tag in zip(sentence.tokens, sentence.tags))
        )
    return "\n\n".join(blocks) + "\n"


def to_io(sentence: TaggedSentence) -> TaggedSentence:
    """Convert a BIO sentence to IO by collapsing B- into I-.

    Lossy: adjacent same-class entities merge into one run.
    """
    if sentence.scheme is not TagScheme.BIO:
        raise ValueError("to_io expects a BIO sentence")
    tags = tuple(
        TagLabel.inside(t.cls) if t.prefix == "B" else t for t in sentence.tags
    )
    return TaggedSentence(sentence.tokens, tags, TagScheme.IO)


def ensure_io(sentence: TaggedSentence) -> TaggedSentence:
    return sentence if sentence.scheme is TagScheme.IO else to_io(sentence)


def to_spans(sentence: TaggedSentence) -> list[EntitySpan]:
    """Extract entity spans in start order.

    Under IO a span is a maximal run of same-class I- tags; under BIO each
    B- opens a span extended by following same-class I- tags.
    """
    spans: list[EntitySpan] = []
    open_cls: str | None = None
    start = 0
    for t, tag in enumerate(sentence.tags):
        if tag.prefix == "O":
            if open_cls is not None:
                spans.append(EntitySpan(open_cls, start, t - 1))
                open_cls = None
        elif tag.prefix == "B":
            if open_cls is not None:
                spans.append(EntitySpan(open_cls, start, t - 1))
            open_cls, start = tag.cls, t
        else:  # I
            if open_cls != tag.cls:
                # IO class change starts a new run; valid BIO never hits this
                # with a mismatched open span.
                if open_cls is not None:
                    spans.append(EntitySpan(open_cls, start, t - 1))
                open_cls, start = tag.cls, t
    if open_cls is not None:
        spans.append(EntitySpan(open_cls, start, len(sentence.tags) - 1))
    return spans


def compute_tag_set(corpus: Sequence[TaggedSentence]) -> TagSet:
    """Count entity spans per class; order classes by ascending count, ties lexicographic."""
    counts: Counter[str] = Counter()
    for sentence in corpus:
        for span in to_spans(sentence):
            counts[span.cls] += 1
    ordered = tuple(sorted(counts, key=lambda c: (counts[c], c)))
    return TagSet(classes=ordered, counts=dict(counts))


def remap_for_extension(
    corpus: Sequence[TaggedSentence],
    target_classes: Iterable[str],
    mode: str,
) -> list[TaggedSentence]:
    """Erase entity tags by class for the tag-set-extension setup.

    mode="train" erases every tag whose class is in target_classes (the target
    group is hidden from training); mode="test" erases every tag whose class is
    NOT in target_classes (only the target group is evaluated).
    """
    targets = frozenset(target_classes)
    if not targets:
        raise ValueError("target_classes must be non-empty")
    if mode not in ("train", "test"):
        raise ValueError(f"mode must be 'train' or 'test', got {mode!r}")
    out: list[TaggedSentence] = []
    for sentence in corpus:
        tags = tuple(
            OUTSIDE
            if not tag.is_outside
            and ((tag.cls in targets) if mode == "train" else (tag.cls not in targets))
            else tag
            for tag in sentence.tags
        )
        out.append(TaggedSentence(sentence.tokens, tags, sentence.scheme))
    return out
