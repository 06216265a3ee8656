"""Command-line interface.

Subcommands: featurize, sample-support, estimate-transitions, predict,
evaluate, run. Paths and knobs mirror the key=value config file accepted by
``run``; every subcommand exits nonzero with a stage-tagged message on error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .corpus import parse_conll, remap_for_extension, render_conll
from .decode import DecodingConfig
from .embed import corpus_digest, hash_featurize, load_embeddings, write_embeddings
from .experiment import (
    ONTONOTES_GROUPS,
    StageError,
    load_corpus,
    parse_config,
    run_experiment,
    run_predict,
)
from .metrics import aggregate, render_aggregate, render_report, span_micro_f1, write_report_kv
from .sampler import greedy_sample, load_support_manifest, save_support_manifest
from .transitions import (
    apply_temperature,
    count_abstract,
    estimate_abstract,
    expand,
    load_transitions,
    save_transitions,
)
from . import corpus as corpus_mod

log = logging.getLogger(__name__)


def _add_scheme(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scheme",
        choices=["io", "bio"],
        default="io",
        help="tagging scheme for loaded corpora; io converts BIO input (default: io)",
    )


def _scheme(args: argparse.Namespace):
    return corpus_mod.TagScheme(args.scheme.upper())


def _classes_arg(value: str) -> tuple[str, ...]:
    if value in ONTONOTES_GROUPS:
        return ONTONOTES_GROUPS[value]
    return tuple(x for x in value.split(",") if x != "")


def cmd_featurize(args: argparse.Namespace) -> int:
    text = Path(args.corpus).read_text(encoding="utf-8")
    sentences = parse_conll(text)
    table = hash_featurize(sentences, args.dim, args.window)
    write_embeddings(table, args.out, corpus_sha256=corpus_digest(text))
    print(f"wrote {len(table.vectors)} sentences x dim {table.dim} to {args.out}")
    return 0


def cmd_sample_support(args: argparse.Namespace) -> int:
    pool = load_corpus(args.corpus, _scheme(args))
    if args.target_classes:
        pool = remap_for_extension(pool, args.target_classes, "test")
    support = greedy_sample(pool, args.k, args.seed)
    save_support_manifest(support, args.out)
    counts = ", ".join(f"{c}={support.counts.get(c, 0)}" for c in support.class_order)
    print(f"sampled {len(support.sentences)} sentences (k={args.k}, seed={args.seed}): {counts}")
    if support.shortfalls:
        print(f"warning: shortfall for {', '.join(support.shortfalls)}", file=sys.stderr)
    return 0


def cmd_estimate_transitions(args: argparse.Namespace) -> int:
    sentences = load_corpus(args.corpus, corpus_mod.TagScheme.IO)
    if args.target_classes:
        sentences = remap_for_extension(sentences, args.target_classes, "train")
    abstract = estimate_abstract(count_abstract(sentences), mode=args.norm)
    if args.classes:
        expanded = apply_temperature(expand(abstract, args.classes), args.tau)
        save_transitions(expanded, args.out)
        print(f"wrote expanded transitions over {len(args.classes)} classes to {args.out}")
    else:
        save_transitions(abstract, args.out)
        print(f"wrote abstract transitions to {args.out}")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    scheme = _scheme(args)
    pool = load_corpus(args.support_corpus, scheme)
    if args.target_classes:
        pool = remap_for_extension(pool, args.target_classes, "test")
    support = load_support_manifest(args.support, pool)
    test = load_corpus(args.test_corpus, scheme)
    if args.target_classes:
        test = remap_for_extension(test, args.target_classes, "test")

    support_table = (
        load_embeddings(args.support_emb, pool)
        if args.support_emb
        else hash_featurize(pool, args.hash_dim, args.hash_window)
    )
    test_table = (
        load_embeddings(args.test_emb, test)
        if args.test_emb
        else hash_featurize(test, args.hash_dim, args.hash_window)
    )

    transitions = load_transitions(args.transitions) if args.transitions else None
    decoding = DecodingConfig(tau=args.tau, use_transitions=not args.no_transitions)
    predictions = run_predict(support, support_table, test, test_table, transitions, decoding)
    rendered = render_conll(
        [corpus_mod.make_sentence(s.tokens, tuple(p)) for s, p in zip(test, predictions)]
    )
    Path(args.out).write_text(rendered, encoding="utf-8")
    print(f"wrote predictions for {len(test)} sentences to {args.out}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    scheme = _scheme(args)
    gold = load_corpus(args.gold, scheme)
    pred = load_corpus(args.pred, scheme)
    if len(pred) != len(gold):
        raise StageError(
            f"evaluate: {len(pred)} predicted sentences for {len(gold)} gold sentences"
        )
    report = span_micro_f1(gold, [s.tags for s in pred])
    print(render_report(report))
    if args.kv:
        write_report_kv(aggregate([report]), args.kv)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    if args.tau is not None:
        cfg.tau = args.tau
    report = run_experiment(cfg)
    print(render_aggregate(report, label=cfg.mode))
    if args.out:
        Path(args.out + ".txt").write_text(
            render_aggregate(report, label=cfg.mode) + "\n", encoding="utf-8"
        )
        write_report_kv(report, args.out + ".kv")
        print(f"wrote {args.out}.txt and {args.out}.kv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fewner",
        description="Few-shot NER: nearest-neighbor emissions with Viterbi decoding "
        "over transitions transferred from a source corpus.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("featurize", help="hash-featurize a corpus into an embedding file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("sample-support", help="greedy-sample a K-shot support set")
    p.add_argument("--corpus", required=True, help="pool to sample from (dev split)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-classes", type=_classes_arg, default=(),
                   help="comma list or group preset (A/B/C); keeps only these classes")
    p.add_argument("--out", required=True, help="manifest file to write")
    _add_scheme(p)
    p.set_defaults(func=cmd_sample_support)

    p = sub.add_parser("estimate-transitions", help="estimate transitions from a source corpus")
    p.add_argument("--corpus", required=True, help="source training corpus")
    p.add_argument("--target-classes", type=_classes_arg, default=(),
                   help="classes to hide (mapped to O) before counting")
    p.add_argument("--classes", type=_classes_arg, default=(),
                   help="expand over these classes; omit to store abstract transitions")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--norm", choices=["outgoing", "incoming"], default="outgoing")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate_transitions)

    p = sub.add_parser("predict", help="tag a corpus with a sampled support set")
    p.add_argument("--support", required=True, help="support-set manifest")
    p.add_argument("--support-corpus", required=True, help="pool the manifest indexes into")
    p.add_argument("--support-emb", default="", help="embedding file for the pool")
    p.add_argument("--test-corpus", required=True)
    p.add_argument("--test-emb", default="", help="embedding file for the test corpus")
    p.add_argument("--transitions", default="", help="transitions file (abstract or expanded)")
    p.add_argument("--no-transitions", action="store_true",
                   help="plain nearest-neighbor prediction (no decoding)")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--target-classes", type=_classes_arg, default=())
    p.add_argument("--hash-dim", type=int, default=256)
    p.add_argument("--hash-window", type=int, default=1)
    p.add_argument("--out", required=True, help="predictions as two-column text")
    _add_scheme(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="span-level micro F1 of predictions vs gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--kv", default="", help="also write a key=value report file")
    _add_scheme(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--tau", type=float, default=None, help="override the config tau")
    p.add_argument("--out", default="", help="report file prefix (.txt and .kv)")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except StageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as err:
        print(f"error: {args.command}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
