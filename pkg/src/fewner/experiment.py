"""Experiment orchestration: configs, prediction runs, and the three pipelines.

Pipelines: tag-set extension (hide a class group during transition estimation,
evaluate only on it), domain transfer (transitions from a source corpus,
supports from the target dev split), and episode evaluation (many sampled
support/test pairs from one pool). Every run is a pure function of the config
and the input files.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from . import corpus as corpus_mod
from .corpus import TaggedSentence, TagLabel, TagScheme, parse_conll, remap_for_extension
from .decode import DecodingConfig, viterbi
from .embed import EmbeddingTable, hash_featurize, load_embeddings
from .knn import build_support_index, emission_rows, nnshot_predict
from .metrics import AggregateReport, aggregate, span_micro_f1
from .sampler import SupportSet, build_episode, greedy_sample
from .transitions import (
    AbstractTransitions,
    ExpandedTransitions,
    apply_temperature,
    count_abstract,
    estimate_abstract,
    expand,
    uniform_transitions,
)

log = logging.getLogger(__name__)

MODES = ("tagset-extension", "domain-transfer", "episodes")

# Entity-class presets for the OntoNotes tag-set-extension split.
ONTONOTES_GROUPS: dict[str, tuple[str, ...]] = {
    "A": ("ORG", "NORP", "ORDINAL", "WORK_OF_ART", "QUANTITY", "LAW"),
    "B": ("GPE", "CARDINAL", "PERCENT", "TIME", "EVENT", "LANGUAGE"),
    "C": ("PERSON", "DATE", "MONEY", "LOC", "FAC", "PRODUCT"),
}


class StageError(RuntimeError):
    """A pipeline stage failed; the message is prefixed with the stage name."""


@contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except StageError:
        raise
    except Exception as err:
        raise StageError(f"{name}: {err}") from err


@dataclass
class ExperimentConfig:
    mode: str = "domain-transfer"
    k: int = 5
    n_support_sets: int = 5
    n_episodes: int = 100
    test_size: int = 30
    tau: float = 1.0
    use_transitions: bool = True
    transition_norm: str = "outgoing"
    scheme: TagScheme = TagScheme.IO
    seeds: tuple[int, ...] = ()
    seed: int = 0
    target_classes: tuple[str, ...] = ()
    source_train: str = ""
    dev: str = ""
    test: str = ""
    emb_dev: str = ""
    emb_test: str = ""
    hash_dim: int = 256
    hash_window: int = 1

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.mode == "tagset-extension" and not self.target_classes:
            raise ValueError("tagset-extension requires target_classes (or target_group)")
        if self.mode in ("tagset-extension", "domain-transfer"):
            if len(self.seeds) != self.n_support_sets:
                raise ValueError(
                    f"need {self.n_support_sets} seeds, got {len(self.seeds)}"
                )
            if not self.test:
                raise ValueError("test corpus path is required")
        if not self.source_train:
            raise ValueError("source_train corpus path is required")
        if not self.dev:
            raise ValueError("dev corpus path is required")

    @property
    def decoding(self) -> DecodingConfig:
        return DecodingConfig(tau=self.tau, use_transitions=self.use_transitions)


def parse_config(text: str) -> ExperimentConfig:
    """Parse the line-oriented key=value config shared by all subcommands."""
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = key.strip(), value.strip()
        if key == "mode":
            cfg.mode = value
        elif key == "k":
            cfg.k = int(value)
        elif key == "n_support_sets":
            cfg.n_support_sets = int(value)
        elif key == "n_episodes":
            cfg.n_episodes = int(value)
        elif key == "test_size":
            cfg.test_size = int(value)
        elif key == "tau":
            cfg.tau = float(value)
        elif key == "use_transitions":
            cfg.use_transitions = value.lower() in ("1", "true", "yes", "on")
        elif key == "transition_norm":
            cfg.transition_norm = value
        elif key == "scheme":
            cfg.scheme = TagScheme(value.upper())
        elif key == "seeds":
            cfg.seeds = tuple(int(x) for x in value.split(",") if x != "")
        elif key == "seed":
            cfg.seed = int(value)
        elif key == "target_classes":
            cfg.target_classes = tuple(x for x in value.split(",") if x != "")
        elif key == "target_group":
            if value not in ONTONOTES_GROUPS:
                raise ValueError(
                    f"config line {lineno}: unknown target_group {value!r} "
                    f"(known: {', '.join(ONTONOTES_GROUPS)})"
                )
            cfg.target_classes = ONTONOTES_GROUPS[value]
        elif key in ("source_train", "dev", "test", "emb_dev", "emb_test"):
            setattr(cfg, key, value)
        elif key == "hash_dim":
            cfg.hash_dim = int(value)
        elif key == "hash_window":
            cfg.hash_window = int(value)
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    if not cfg.seeds:
        cfg.seeds = tuple(range(cfg.n_support_sets))
    return cfg


def load_corpus(path: str | Path, scheme: TagScheme = TagScheme.IO) -> list[TaggedSentence]:
    """Parse a corpus file; under the default IO scheme, BIO input is converted."""
    sentences = parse_conll(Path(path).read_text(encoding="utf-8"))
    if scheme is TagScheme.IO:
        sentences = [corpus_mod.ensure_io(s) for s in sentences]
    return sentences


def table_for(
    path: str | Path,
    sentences: Sequence[TaggedSentence],
    emb_path: str,
    cfg: ExperimentConfig,
) -> EmbeddingTable:
    """Load exported embeddings when configured, else hash-featurize the corpus."""
    if emb_path:
        return load_embeddings(emb_path, sentences)
    log.info("no embedding file for %s; using hash featurizer (dim=%d)", path, cfg.hash_dim)
    return hash_featurize(sentences, cfg.hash_dim, cfg.hash_window)


def run_predict(
    support: SupportSet,
    support_table: EmbeddingTable,
    test: Sequence[TaggedSentence],
    test_table: EmbeddingTable,
    transitions: AbstractTransitions | ExpandedTransitions | None,
    decoding: DecodingConfig,
) -> list[list[TagLabel]]:
    """Nearest-neighbor emissions for every test token, decoded with or without transitions.

    Abstract transitions are expanded over the support's class set; an already
    expanded matrix must cover exactly that class set; None decodes under
    uniform transitions (equivalent to plain nearest-neighbor prediction).
    """
    missing = [i for i in support.source_ids if i >= len(support_table.vectors)]
    if missing:
        raise ValueError(f"support sentences without embeddings: {missing}")
    if len(test_table.vectors) != len(test):
        raise ValueError(
            f"test embedding table has {len(test_table.vectors)} sentences "
            f"for {len(test)} test sentences"
        )
    index = build_support_index(support, support_table)
    trans: ExpandedTransitions | None = None
    if decoding.use_transitions:
        if transitions is None:
            trans = uniform_transitions(index.class_names)
        elif isinstance(transitions, AbstractTransitions):
            trans = apply_temperature(expand(transitions, index.class_names), decoding.tau)
        else:
            if set(transitions.classes) != set(index.class_names):
                raise ValueError(
                    f"transition classes {sorted(transitions.classes)} do not match "
                    f"support classes {sorted(index.class_names)}"
                )
            trans = apply_temperature(transitions, decoding.tau)
    predictions: list[list[TagLabel]] = []
    for i in range(len(test)):
        vectors = test_table.vectors[i]
        if decoding.use_transitions:
            predictions.append(viterbi(emission_rows(vectors, index), trans))
        else:
            predictions.append(nnshot_predict(vectors, index))
    return predictions


def run_experiment(cfg: ExperimentConfig) -> AggregateReport:
    """Run the configured pipeline end to end and aggregate micro F1 over runs."""
    cfg.validate()

    with _stage("load-source"):
        source_train = load_corpus(cfg.source_train, cfg.scheme)
    with _stage("load-dev"):
        dev = load_corpus(cfg.dev, cfg.scheme)
    test: list[TaggedSentence] = []
    if cfg.mode != "episodes":
        with _stage("load-test"):
            test = load_corpus(cfg.test, cfg.scheme)

    if cfg.target_classes:
        with _stage("remap"):
            source_train = remap_for_extension(source_train, cfg.target_classes, "train")
            dev = remap_for_extension(dev, cfg.target_classes, "test")
            if test:
                test = remap_for_extension(test, cfg.target_classes, "test")

    with _stage("estimate-transitions"):
        io_train = [corpus_mod.ensure_io(s) for s in source_train]
        abstract = estimate_abstract(count_abstract(io_train), mode=cfg.transition_norm)

    with _stage("featurize-dev"):
        dev_table = table_for(cfg.dev, dev, cfg.emb_dev, cfg)

    if cfg.mode in ("tagset-extension", "domain-transfer"):
        with _stage("featurize-test"):
            test_table = table_for(cfg.test, test, cfg.emb_test, cfg)
        reports = []
        for seed in cfg.seeds:
            with _stage(f"run[seed={seed}]"):
                support = greedy_sample(dev, cfg.k, seed)
                predictions = run_predict(
                    support, dev_table, test, test_table, abstract, cfg.decoding
                )
                reports.append(span_micro_f1(test, predictions))
        return aggregate(reports)

    # episodes: support and test both sampled from the dev pool
    reports = []
    for e in range(cfg.n_episodes):
        with _stage(f"episode[{e}]"):
            episode = build_episode(dev, cfg.k, cfg.test_size, cfg.seed + e)
            episode_table = EmbeddingTable(
                dim=dev_table.dim,
                vectors=tuple(dev_table.vectors[i] for i in episode.test_ids),
                provenance=dev_table.provenance,
            )
            predictions = run_predict(
                episode.support,
                dev_table,
                episode.test,
                episode_table,
                abstract,
                cfg.decoding,
            )
            reports.append(span_micro_f1(episode.test, predictions))
    return aggregate(reports)
