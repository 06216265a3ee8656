"""Viterbi decoding of nearest-neighbor emissions under expanded transitions.

Scores are log p(state | token) + log p(state | previous state) summed along
the sentence, including the START prior and the END transition. Computation is
in log space with explicit -inf for structural zeros; ties at each backpointer
resolve toward the lower state index (O is index 0).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import TagLabel
from .knn import EmissionRow
from .transitions import ExpandedTransitions

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecodingConfig:
    """Temperature for the transition matrix and the no-transition ablation switch."""

    tau: float = 1.0
    use_transitions: bool = True

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")


def _emission_matrix(
    rows: Sequence[EmissionRow], states: tuple[TagLabel, ...]
) -> np.ndarray:
    state_set = set(states)
    out = np.empty((len(rows), len(states)), dtype=np.float64)
    for t, row in enumerate(rows):
        if set(row.probs) != state_set:
            raise ValueError(
                f"emission row {t} covers states "
                f"{sorted(str(s) for s in row.probs)} but transitions define "
                f"{sorted(str(s) for s in states)}"
            )
        out[t] = [row.probs[s] for s in states]
    return out


def viterbi_path(
    emissions: Sequence[EmissionRow], trans: ExpandedTransitions
) -> tuple[list[TagLabel], float]:
    """Best tag sequence and its log score.

    If every complete path has zero probability, falls back to per-token
    emission argmax (logged) with score -inf.
    """
    if not emissions:
        raise ValueError("empty emission sequence")
    states = trans.states
    em = _emission_matrix(emissions, states)
    with np.errstate(divide="ignore"):
        log_em = np.log(em)
        log_start = np.log(trans.start_probs())
        log_inner = np.log(trans.inner())
        log_end = np.log(trans.end_probs())

    n_tokens, n_states = em.shape
    delta = log_em[0] + log_start
    pointers = np.zeros((n_tokens, n_states), dtype=np.int64)
    for t in range(1, n_tokens):
        scores = delta[:, None] + log_inner
        pointers[t] = np.argmax(scores, axis=0)
        delta = log_em[t] + np.max(scores, axis=0)
    final = delta + log_end
    best_last = int(np.argmax(final))
    best_score = float(final[best_last])

    if best_score == -np.inf:
        log.warning(
            "all paths have zero probability; falling back to per-token emission argmax"
        )
        return [states[int(np.argmax(em[t]))] for t in range(n_tokens)], -np.inf

    path = [best_last]
    for t in range(n_tokens - 1, 0, -1):
        path.append(int(pointers[t, path[-1]]))
    path.reverse()
    return [states[i] for i in path], best_score


def viterbi(
    emissions: Sequence[EmissionRow], trans: ExpandedTransitions
) -> list[TagLabel]:
    """Best tag sequence under emissions and transitions."""
    return viterbi_path(emissions, trans)[0]
