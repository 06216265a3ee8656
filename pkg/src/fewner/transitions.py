"""Abstract tag-transition estimation, expansion to a target tag set, temperature.

Transitions are counted on a source corpus over three abstract entity states
(O, I, I-Other) plus START/END boundaries, normalized into row distributions,
and expanded to any target class list by evenly splitting each abstract
probability over its matching target cells. A temperature exponent then
rescales rows to the emission scale.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import OUTSIDE, TagLabel, TaggedSentence, TagScheme

log = logging.getLogger(__name__)

START = "START"
END = "END"
ABS_O = "O"
ABS_I = "I"
ABS_I_OTHER = "I-Other"

_START_SUCC = (ABS_O, ABS_I)
_O_SUCC = (ABS_O, ABS_I, END)
_I_SUCC = (ABS_O, ABS_I, ABS_I_OTHER, END)


@dataclass(frozen=True)
class TransitionCounts:
    """Raw counts of abstract transitions, including START/END boundaries."""

    counts: Mapping[tuple[str, str], int]

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class AbstractTransitions:
    """Row distributions out of START, O, and I over abstract successors."""

    from_start: Mapping[str, float]
    from_o: Mapping[str, float]
    from_i: Mapping[str, float]
    mode: str = "outgoing"


@dataclass(frozen=True)
class ExpandedTransitions:
    """Concrete transition matrix over START, O, and I-<class> states.

    Rows are START, O, I-c1..I-cN; columns are O, I-c1..I-cN, END. There is
    no START column and no END row by construction.
    """

    classes: tuple[str, ...]
    matrix: np.ndarray
    tau: float = 1.0
    mode: str = "outgoing"

    @property
    def states(self) -> tuple[TagLabel, ...]:
        return (OUTSIDE,) + tuple(TagLabel.inside(c) for c in self.classes)

    def start_probs(self) -> np.ndarray:
        """P(first state), one entry per state."""
        return self.matrix[0, :-1]

    def inner(self) -> np.ndarray:
        """State-to-state block, rows and columns in state order."""
        return self.matrix[1:, :-1]

    def end_probs(self) -> np.ndarray:
        """P(END | state), one entry per state."""
        return self.matrix[1:, -1]

    def row_states(self) -> tuple[str, ...]:
        return (START,) + tuple(str(s) for s in self.states)

    def col_states(self) -> tuple[str, ...]:
        return tuple(str(s) for s in self.states) + (END,)


def _abstract_pair(prev: TagLabel | None, cur: TagLabel | None) -> tuple[str, str]:
    if prev is None:  # sentence start
        return (START, ABS_O if cur.is_outside else ABS_I)
    if cur is None:  # sentence end
        return (ABS_O if prev.is_outside else ABS_I, END)
    if prev.is_outside:
        return (ABS_O, ABS_O if cur.is_outside else ABS_I)
    if cur.is_outside:
        return (ABS_I, ABS_O)
    return (ABS_I, ABS_I if prev.cls == cur.cls else ABS_I_OTHER)


def count_abstract(corpus: Sequence[TaggedSentence]) -> TransitionCounts:
    """Count abstract transitions over an IO corpus, with START/END boundaries.

    Every sentence of length T contributes exactly T+1 transitions.
    """
    counts: dict[tuple[str, str], int] = {}
    for i, sentence in enumerate(corpus):
        if sentence.scheme is not TagScheme.IO:
            raise ValueError(f"sentence {i} is not IO-tagged; convert with to_io first")
        prev: TagLabel | None = None
        for tag in sentence.tags:
            pair = _abstract_pair(prev, tag)
            counts[pair] = counts.get(pair, 0) + 1
            prev = tag
        pair = _abstract_pair(prev, None)
        counts[pair] = counts.get(pair, 0) + 1
    return TransitionCounts(counts=counts)


def _normalize_row(
    counts: Mapping[tuple[str, str], int],
    source: str,
    successors: tuple[str, ...],
) -> dict[str, float]:
    raw = {y: counts.get((source, y), 0) for y in successors}
    total = sum(raw.values())
    if total == 0:
        return {y: 1.0 / len(successors) for y in successors}
    return {y: n / total for y, n in raw.items()}


def estimate_abstract(counts: TransitionCounts, mode: str = "outgoing") -> AbstractTransitions:
    """Turn counts into abstract transition probabilities.

    mode="outgoing" (default) divides each count by its row's outgoing total,
    so every row is a distribution and the expanded matrix stays row-stochastic.
    mode="incoming" divides by the destination tag's incoming total instead;
    those rows are generally NOT distributions and are kept only for fidelity
    experiments. Outgoing rows with no observations fall back to uniform over
    their legal successors.
    """
    if not counts.counts or counts.total() == 0:
        raise ValueError("empty transition counts")
    if mode == "outgoing":
        return AbstractTransitions(
            from_start=_normalize_row(counts.counts, START, _START_SUCC),
            from_o=_normalize_row(counts.counts, ABS_O, _O_SUCC),
            from_i=_normalize_row(counts.counts, ABS_I, _I_SUCC),
            mode=mode,
        )
    if mode != "incoming":
        raise ValueError(f"unknown mode {mode!r}")
    incoming: dict[str, int] = {}
    for (_, y), n in counts.counts.items():
        incoming[y] = incoming.get(y, 0) + n

    def row(source: str, successors: tuple[str, ...]) -> dict[str, float]:
        return {
            y: (counts.counts.get((source, y), 0) / incoming[y]) if incoming.get(y) else 0.0
            for y in successors
        }

    return AbstractTransitions(
        from_start=row(START, _START_SUCC),
        from_o=row(ABS_O, _O_SUCC),
        from_i=row(ABS_I, _I_SUCC),
        mode=mode,
    )


def expand(abstract: AbstractTransitions, classes: Sequence[str]) -> ExpandedTransitions:
    """Evenly split abstract probabilities over a concrete target class list.

    O->entity mass splits 1/N per class, entity->different-entity mass splits
    1/(N-1) per other class. With a single class the I-Other mass has nowhere
    to go and is folded into the self-transition (logged).
    """
    n = len(classes)
    if n < 1:
        raise ValueError("need at least one target class")
    if len(set(classes)) != n:
        raise ValueError("duplicate class names")
    size = n + 2  # rows START,O,I-c...; cols O,I-c...,END
    mat = np.zeros((size, size), dtype=np.float64)

    p_s, p_o, p_i = abstract.from_start, abstract.from_o, abstract.from_i
    # START row
    mat[0, 0] = p_s[ABS_O]
    mat[0, 1 : n + 1] = p_s[ABS_I] / n
    # O row
    mat[1, 0] = p_o[ABS_O]
    mat[1, 1 : n + 1] = p_o[ABS_I] / n
    mat[1, n + 1] = p_o[END]
    # I-c rows
    self_p = p_i[ABS_I]
    if n == 1:
        self_p += p_i[ABS_I_OTHER]
        if p_i[ABS_I_OTHER] > 0:
            log.warning(
                "single target class: folding cross-entity mass %.6g into the self-transition",
                p_i[ABS_I_OTHER],
            )
    for i in range(n):
        row = 2 + i
        mat[row, 0] = p_i[ABS_O]
        if n > 1:
            mat[row, 1 : n + 1] = p_i[ABS_I_OTHER] / (n - 1)
        mat[row, 1 + i] = self_p
        mat[row, n + 1] = p_i[END]
    return ExpandedTransitions(
        classes=tuple(classes), matrix=mat, tau=1.0, mode=abstract.mode
    )


def apply_temperature(trans: ExpandedTransitions, tau: float) -> ExpandedTransitions:
    """Raise every probability to the power tau and renormalize each row.

    Zeros stay zero, so tau only reshapes mass over a row's support; small tau
    flattens rows toward uniform-over-support. Rows that are entirely zero are
    left untouched.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    mat = np.zeros_like(trans.matrix)
    positive = trans.matrix > 0
    mat[positive] = trans.matrix[positive] ** tau
    sums = mat.sum(axis=1, keepdims=True)
    rows = sums[:, 0] > 0
    mat[rows] /= sums[rows]
    return ExpandedTransitions(
        classes=trans.classes, matrix=mat, tau=tau, mode=trans.mode
    )


def uniform_transitions(classes: Sequence[str]) -> ExpandedTransitions:
    """Uniform rows (START over states; states over states plus END).

    Decoding with this matrix reduces to per-token emission argmax, which is
    the no-transition ablation.
    """
    n = len(classes)
    size = n + 2
    mat = np.zeros((size, size), dtype=np.float64)
    mat[0, : n + 1] = 1.0 / (n + 1)
    mat[1:, :] = 1.0 / (n + 2)
    return ExpandedTransitions(classes=tuple(classes), matrix=mat, tau=1.0, mode="uniform")


def save_transitions(
    obj: AbstractTransitions | ExpandedTransitions, path: str | Path
) -> None:
    """Serialize transitions to a line-oriented text file for reuse and inspection."""
    lines = ["format=FSTRANS1"]
    if isinstance(obj, AbstractTransitions):
        lines.append("kind=abstract")
        lines.append(f"mode={obj.mode}")
        for name, row in (("start", obj.from_start), ("o", obj.from_o), ("i", obj.from_i)):
            for key, value in row.items():
                lines.append(f"{name}.{key}={value!r}")
    else:
        lines.append("kind=expanded")
        lines.append(f"mode={obj.mode}")
        lines.append(f"classes={','.join(obj.classes)}")
        lines.append(f"tau={obj.tau!r}")
        lines.append(f"cols={','.join(obj.col_states())}")
        for name, row in zip(obj.row_states(), obj.matrix):
            lines.append(f"row.{name}=" + " ".join(repr(float(x)) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_transitions(path: str | Path) -> AbstractTransitions | ExpandedTransitions:
    fields: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    if fields.get("format") != "FSTRANS1":
        raise ValueError(f"{path}: not a transitions file")
    mode = fields.get("mode", "outgoing")
    kind = fields.get("kind")
    if kind == "abstract":
        def row(name: str, successors: tuple[str, ...]) -> dict[str, float]:
            return {y: float(fields[f"{name}.{y}"]) for y in successors}

        return AbstractTransitions(
            from_start=row("start", _START_SUCC),
            from_o=row("o", _O_SUCC),
            from_i=row("i", _I_SUCC),
            mode=mode,
        )
    if kind == "expanded":
        classes = tuple(c for c in fields["classes"].split(",") if c != "")
        size = len(classes) + 2
        mat = np.zeros((size, size), dtype=np.float64)
        row_names = (START, "O") + tuple(f"I-{c}" for c in classes)
        for i, name in enumerate(row_names):
            mat[i] = [float(x) for x in fields[f"row.{name}"].split()]
        return ExpandedTransitions(
            classes=classes, matrix=mat, tau=float(fields.get("tau", "1.0")), mode=mode
        )
    raise ValueError(f"{path}: unknown transitions kind {kind!r}")
