"""Command-line interface.

Subcommands: ingest, select, train, rank, eval, run-all, synth.  Every flag
can also come from a flat ``key = value`` config file (``--config``); explicit
flags override the file.  Exit codes: 0 success (warnings allowed), 1 usage or
config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .classifier import load_filter, save_filter, train_filter
from .corpus import (
    EMPTY_STOPLIST,
    CorpusStats,
    StopList,
    group_judgments,
    load_documents,
    load_qrels,
    write_corpus_stats,
    write_qrels,
    write_tsv_documents,
)
from .errors import ConfigError, DataError, NoRelevantDocumentsError, NumericalError
from .evaluation import (
    aggregate_metrics,
    evaluate_topic,
    format_report,
    format_report_tsv,
    format_run_lines,
    rank_documents,
    read_run_file,
    write_run_file,
)
from .pipeline import (
    PROBE_STREAM,
    SAMPLING_STREAM,
    PipelineConfig,
    _parse_topics,
    build_config,
    build_training_set,
    index_documents,
    run_all,
    topic_rng,
)
from .selection import (
    build_design_matrix,
    rank_specific_terms,
    read_selection,
    select_terms,
    write_selection,
)
from .synthetic import SyntheticTopicModel, generate_corpus, train_test_models


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors map to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# Flags shared by the pipeline-shaped commands; dest names match
# PipelineConfig fields so the override dict can be built generically.
_OVERRIDE_FIELDS = (
    "training_docs",
    "test_docs",
    "reference_docs",
    "qrels",
    "stoplist",
    "out",
    "topics",
    "risk",
    "neg_samples",
    "seed",
    "epochs",
    "learning_rate",
    "weight_decay",
    "init_scale",
    "min_support",
    "max_candidates",
    "limit",
    "neg_pool",
    "probe",
    "n_probes",
    "run_tag",
    "docs_format",
)


def _parse_topic_list(value: str):
    return _parse_topics(value)


def _add_pipeline_flags(p: argparse.ArgumentParser, *, paths: bool) -> None:
    p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    if paths:
        p.add_argument("--training-docs", dest="training_docs", type=Path, default=None)
        p.add_argument("--test-docs", dest="test_docs", type=Path, default=None)
        p.add_argument("--reference-docs", dest="reference_docs", type=Path, default=None)
        p.add_argument("--qrels", type=Path, default=None)
    p.add_argument("--topics", type=_parse_topic_list, default=None, help="e.g. 351,352")
    p.add_argument("--risk", type=float, default=None)
    p.add_argument("--neg-samples", dest="neg_samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", dest="learning_rate", type=float, default=None)
    p.add_argument("--lambda", dest="weight_decay", type=float, default=None)
    p.add_argument("--init-scale", dest="init_scale", type=float, default=None)
    p.add_argument("--min-support", dest="min_support", type=int, default=None)
    p.add_argument("--max-candidates", dest="max_candidates", type=int, default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--stoplist", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--neg-pool", dest="neg_pool", choices=("unjudged", "judged"), default=None)
    p.add_argument("--probe", choices=("analytic", "monte-carlo"), default=None)
    p.add_argument("--n-probes", dest="n_probes", type=int, default=None)
    p.add_argument("--run-tag", dest="run_tag", type=str, default=None)
    p.add_argument("--format", dest="docs_format", choices=("auto", "trec", "tsv"), default=None)


def _config_from_args(args) -> PipelineConfig:
    overrides = {
        name: getattr(args, name)
        for name in _OVERRIDE_FIELDS
        if getattr(args, name, None) is not None
    }
    return build_config(getattr(args, "config", None), **overrides)


def _load_topic_inputs(cfg: PipelineConfig):
    if cfg.training_docs is None or cfg.qrels is None:
        raise ConfigError("this command needs --training-docs and --qrels (flag or config)")
    training = index_documents(load_documents(cfg.training_docs, cfg.docs_format))
    if cfg.reference_docs is None or Path(cfg.reference_docs) == Path(cfg.training_docs):
        stats = CorpusStats.from_documents(training.values())
    else:
        stats = CorpusStats.from_documents(load_documents(cfg.reference_docs, cfg.docs_format))
    judgments = group_judgments(load_qrels(cfg.qrels))
    stoplist = StopList.from_file(cfg.stoplist) if cfg.stoplist else EMPTY_STOPLIST
    return training, stats, judgments, stoplist


def _single_topic(args, cfg: PipelineConfig) -> int:
    if args.topic is not None:
        return args.topic
    if cfg.topics and len(cfg.topics) == 1:
        return cfg.topics[0]
    raise ConfigError("this command needs exactly one topic (--topic)")


def cmd_ingest(args) -> int:
    docs = load_documents(args.docs, args.docs_format or "auto")
    stats = CorpusStats.from_documents(docs)
    print(
        f"ingested {stats.doc_count} documents, {stats.total_tokens} tokens, "
        f"{len(stats.corpus_tf)} distinct terms"
    )
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_tsv_documents(docs, out / "corpus.tsv")
        write_corpus_stats(stats, out / "corpus_stats.tsv")
        print(f"wrote {out / 'corpus.tsv'} and {out / 'corpus_stats.tsv'}")
    return 0


def _build_topic_training_set(cfg, topic_id, training, judgments):
    rng = topic_rng(cfg.seed, topic_id, SAMPLING_STREAM)
    return build_training_set(
        judgments,
        training,
        topic_id,
        cfg.neg_samples,
        rng=rng,
        neg_pool=cfg.neg_pool,
    )


def cmd_select(args) -> int:
    cfg = _config_from_args(args)
    training, stats, judgments, stoplist = _load_topic_inputs(cfg)
    topic_id = _single_topic(args, cfg)
    try:
        training_set = _build_topic_training_set(cfg, topic_id, training, judgments)
    except NoRelevantDocumentsError as exc:
        warnings.warn(str(exc), stacklevel=1)
        return 0
    relevant = [doc for doc, label in training_set if label > 0]
    candidates = rank_specific_terms(
        relevant, stats, stoplist, min_support=cfg.min_support, max_candidates=cfg.max_candidates
    )
    matrix = build_design_matrix(training_set, candidates)
    result = select_terms(
        matrix,
        cfg.risk,
        probe=cfg.probe,
        n_probes=cfg.n_probes,
        rng=topic_rng(cfg.seed, topic_id, PROBE_STREAM),
        topic_id=topic_id,
    )
    print(
        f"topic {topic_id}: {len(candidates)} candidates, "
        f"{result.cut_index} terms kept at risk {cfg.risk}"
    )
    print(" ".join(result.selected_terms))
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "candidates.tsv").open("w", encoding="utf-8") as fh:
            for c in candidates:
                fh.write(f"{c.term}\t{c.support}\n")
        write_selection(result, out / "selection.tsv")
        print(f"wrote {out / 'candidates.tsv'} and {out / 'selection.tsv'}")
    return 0


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    training, _, judgments, _ = _load_topic_inputs(cfg)
    selection = read_selection(args.selection)
    topic_id = args.topic if args.topic is not None else selection.topic_id
    if topic_id is None:
        raise ConfigError("selection file carries no topic id; pass --topic")
    try:
        training_set = _build_topic_training_set(cfg, topic_id, training, judgments)
    except NoRelevantDocumentsError as exc:
        warnings.warn(str(exc), stacklevel=1)
        return 0
    vocabulary = selection.selected_terms
    if not vocabulary:
        raise DataError("selection file keeps zero terms; nothing to train on")
    model = train_filter(training_set, vocabulary, cfg.train_config(topic_id), topic_id)
    out = Path(args.out) if args.out is not None else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    save_filter(model, out / "model.txt")
    print(f"trained filter for topic {topic_id} on {len(training_set)} documents")
    print(f"wrote {out / 'model.txt'}")
    return 0


def cmd_rank(args) -> int:
    model = load_filter(args.model)
    docs = load_documents(args.docs, args.docs_format or "auto")
    run = rank_documents(
        model, docs, limit=args.limit or 1000, run_tag=args.run_tag or "topicfilter"
    )
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_run_file([run], out / "run.txt")
        print(f"ranked {len(run.entries)} documents; wrote {out / 'run.txt'}")
    else:
        for line in format_run_lines(run):
            print(line)
    return 0


def cmd_eval(args) -> int:
    runs = read_run_file(args.run)
    judgments = group_judgments(load_qrels(args.qrels))
    metrics = []
    for run in runs:
        labels = judgments.get(run.topic_id)
        if labels is None:
            continue
        relevant = {d for d, lab in labels.items() if lab > 0}
        metrics.append(evaluate_topic(run, relevant))
    if not metrics:
        raise DataError("no run topic matches the qrels")
    report = aggregate_metrics(metrics)
    text = format_report(report)
    print(text, end="")
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text, encoding="utf-8")
        (out / "report.tsv").write_text(format_report_tsv(report), encoding="utf-8")
        print(f"wrote {out / 'report.txt'} and {out / 'report.tsv'}")
    return 0


def cmd_run_all(args) -> int:
    cfg = _config_from_args(args)
    result = run_all(cfg)
    for r in result.results:
        print(
            f"topic {r.topic_id}: {len(r.candidates)} candidates, "
            f"{r.selection.cut_index} terms, AP {r.metrics.avg_precision:.4f}"
        )
    for topic_id in result.skipped:
        print(f"topic {topic_id}: skipped (no relevant training document)")
    for topic_id, message in result.failures:
        print(f"topic {topic_id}: FAILED ({message})")
    print()
    print(format_report(result.report), end="")
    print(f"outputs under {result.out_dir}")
    return 0


def cmd_synth(args) -> int:
    base = SyntheticTopicModel(
        topic_id=args.topic,
        n_planted=args.n_planted,
        relevant_rate=args.relevant_rate,
        irrelevant_rate=args.irrelevant_rate,
        background_vocab=args.vocab_size,
        n_relevant=args.train_relevant,
        n_irrelevant=args.train_irrelevant,
        mean_length=args.mean_length,
        seed=args.seed,
    )
    train_model, test_model = train_test_models(
        base, test_relevant=args.test_relevant, test_irrelevant=args.test_irrelevant
    )
    train_docs, train_judgments = generate_corpus(train_model)
    test_docs, test_judgments = generate_corpus(test_model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_tsv_documents(train_docs, out / "train.tsv")
    write_tsv_documents(test_docs, out / "test.tsv")
    write_qrels(train_judgments + test_judgments, out / "qrels.txt")
    # The imbalanced toy corpus ranks best with ridge-style training: weight
    # decay holds the unit out of saturation while the epoch budget lets the
    # discriminant weights converge.
    config_text = "\n".join(
        [
            "training_docs = train.tsv",
            "test_docs = test.tsv",
            "qrels = qrels.txt",
            "out = runs",
            f"seed = {args.seed}",
            f"risk = {args.risk if args.risk is not None else 0.05}",
            "epochs = 2000",
            "lr = 0.01",
            "lambda = 0.01",
            "",
        ]
    )
    (out / "synth.cfg").write_text(config_text, encoding="utf-8")
    print(
        f"wrote {len(train_docs)} training and {len(test_docs)} test documents, "
        f"{len(train_judgments) + len(test_judgments)} judgments under {out}"
    )
    print(f"run the pipeline with: topicfilter run-all --config {out / 'synth.cfg'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topicfilter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse a collection and report its statistics")
    p.add_argument("--docs", type=Path, required=True)
    p.add_argument("--format", dest="docs_format", choices=("auto", "trec", "tsv"), default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("select", help="mine and rank discriminant terms for one topic")
    _add_pipeline_flags(p, paths=True)
    p.add_argument("--topic", type=int, default=None)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", help="train the tanh-unit filter from a selection file")
    _add_pipeline_flags(p, paths=True)
    p.add_argument("--topic", type=int, default=None)
    p.add_argument("--selection", type=Path, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rank", help="rank a collection with a trained filter")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--docs", type=Path, required=True)
    p.add_argument("--format", dest="docs_format", choices=("auto", "trec", "tsv"), default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--run-tag", dest="run_tag", type=str, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="score a run file against qrels")
    p.add_argument("--run", type=Path, required=True)
    p.add_argument("--qrels", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run-all", help="run every topic end to end and aggregate")
    _add_pipeline_flags(p, paths=True)
    p.set_defaults(func=cmd_run_all)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus and config")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--topic", type=int, default=1)
    p.add_argument("--risk", type=float, default=None)
    p.add_argument("--n-planted", dest="n_planted", type=int, default=10)
    p.add_argument("--relevant-rate", dest="relevant_rate", type=float, default=0.3)
    p.add_argument("--irrelevant-rate", dest="irrelevant_rate", type=float, default=0.01)
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=2000)
    p.add_argument("--train-relevant", dest="train_relevant", type=int, default=60)
    p.add_argument("--train-irrelevant", dest="train_irrelevant", type=int, default=3000)
    p.add_argument("--test-relevant", dest="test_relevant", type=int, default=20)
    p.add_argument("--test-irrelevant", dest="test_irrelevant", type=int, default=2000)
    p.add_argument("--mean-length", dest="mean_length", type=int, default=120)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
