"""Span-level micro F1 and multi-run aggregation.

A predicted span counts as correct only when class, start, and end all match a
gold span (exact-boundary matching). Rates with a zero denominator are 0, and
F1 is the harmonic mean with the 0/0 -> 0 convention.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import TagLabel, TaggedSentence, make_sentence, to_spans


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    gold_count: int
    pred_count: int
    correct_count: int


@dataclass(frozen=True)
class EvalReport:
    micro: ClassScores
    per_class: Mapping[str, ClassScores]


@dataclass(frozen=True)
class AggregateReport:
    mean_f1: float
    std_f1: float
    runs: tuple[EvalReport, ...]


def _rate(num: int, denom: int) -> float:
    return num / denom if denom else 0.0


def _scores(gold: int, pred: int, correct: int) -> ClassScores:
    precision = _rate(correct, pred)
    recall = _rate(correct, gold)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClassScores(precision, recall, f1, gold, pred, correct)


def span_micro_f1(
    gold: Sequence[TaggedSentence],
    pred: Sequence[Sequence[TagLabel]],
) -> EvalReport:
    """Score predicted tag sequences against gold sentences at the span level."""
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions for {len(gold)} gold sentences")
    gold_counts: dict[str, int] = {}
    pred_counts: dict[str, int] = {}
    correct_counts: dict[str, int] = {}
    for i, (gold_sentence, tags) in enumerate(zip(gold, pred)):
        if len(tags) != len(gold_sentence.tokens):
            raise ValueError(
                f"sentence {i}: {len(tags)} predicted tags for "
                f"{len(gold_sentence.tokens)} tokens"
            )
        gold_spans = {(s.cls, s.start, s.end) for s in to_spans(gold_sentence)}
        pred_sentence = make_sentence(gold_sentence.tokens, tuple(tags))
        pred_spans = {(s.cls, s.start, s.end) for s in to_spans(pred_sentence)}
        for cls, *_ in gold_spans:
            gold_counts[cls] = gold_counts.get(cls, 0) + 1
        for cls, *_ in pred_spans:
            pred_counts[cls] = pred_counts.get(cls, 0) + 1
        for cls, *_ in gold_spans & pred_spans:
            correct_counts[cls] = correct_counts.get(cls, 0) + 1

    classes = sorted(set(gold_counts) | set(pred_counts))
    per_class = {
        cls: _scores(
            gold_counts.get(cls, 0), pred_counts.get(cls, 0), correct_counts.get(cls, 0)
        )
        for cls in classes
    }
    micro = _scores(
        sum(gold_counts.values()), sum(pred_counts.values()), sum(correct_counts.values())
    )
    return EvalReport(micro=micro, per_class=per_class)


def aggregate(reports: Sequence[EvalReport]) -> AggregateReport:
    """Mean and sample standard deviation (n-1) of micro F1 across runs."""
    if not reports:
        raise ValueError("no reports to aggregate")
    f1s = [r.micro.f1 for r in reports]
    mean = statistics.fmean(f1s)
    std = statistics.stdev(f1s) if len(f1s) > 1 else 0.0
    return AggregateReport(mean_f1=mean, std_f1=std, runs=tuple(reports))


def render_report(report: EvalReport) -> str:
    """Per-class and micro P/R/F1 as a fixed-width text table."""
    lines = [f"{'class':<16} {'P':>7} {'R':>7} {'F1':>7} {'gold':>6} {'pred':>6} {'ok':>6}"]
    for cls, s in report.per_class.items():
        lines.append(
            f"{cls:<16} {s.precision:7.4f} {s.recall:7.4f} {s.f1:7.4f} "
            f"{s.gold_count:6d} {s.pred_count:6d} {s.correct_count:6d}"
        )
    m = report.micro
    lines.append(
        f"{'micro':<16} {m.precision:7.4f} {m.recall:7.4f} {m.f1:7.4f} "
        f"{m.gold_count:6d} {m.pred_count:6d} {m.correct_count:6d}"
    )
    return "\n".join(lines)


def render_aggregate(agg: AggregateReport, label: str = "") -> str:
    """Mean +/- std over runs, F1 in percent, one line per run below."""
    head = f"{label}: " if label else ""
    lines = [
        f"{head}micro F1 = {100 * agg.mean_f1:.1f} ± {100 * agg.std_f1:.1f} "
        f"({len(agg.runs)} runs)"
    ]
    for i, run in enumerate(agg.runs):
        lines.append(f"  run {i}: F1 = {100 * run.micro.f1:.2f}")
    return "\n".join(lines)


def write_report_kv(agg: AggregateReport, path: str | Path) -> None:
    """Machine-readable key=value dump of an aggregate report."""
    lines = [
        "format=FSREPORT1",
        f"runs={len(agg.runs)}",
        f"mean_f1={agg.mean_f1!r}",
        f"std_f1={agg.std_f1!r}",
    ]
    for i, run in enumerate(agg.runs):
        m = run.micro
        lines.append(f"run.{i}.micro={m.precision!r} {m.recall!r} {m.f1!r}")
        lines.append(
            f"run.{i}.counts={m.gold_count} {m.pred_count} {m.correct_count}"
        )
        for cls, s in run.per_class.items():
            lines.append(f"run.{i}.class.{cls}={s.precision!r} {s.recall!r} {s.f1!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
