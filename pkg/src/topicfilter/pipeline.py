"""Per-topic orchestration: training sets, selection, training, ranking, scoring.

All randomness (negative sampling, the optional Monte-Carlo probe, optional
weight initialization) derives from one master seed combined with the topic id
and a per-purpose stream constant through ``numpy.random.SeedSequence``, so
topics are reproducible independently of execution order.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classifier import TopicFilter, TrainConfig, save_filter, train_filter
from .corpus import (
    EMPTY_STOPLIST,
    JUDGED_IRRELEVANT,
    RELEVANT,
    CorpusStats,
    Document,
    StopList,
    group_judgments,
    load_documents,
    load_qrels,
)
from .errors import ConfigError, DataError, NoRelevantDocumentsError, NumericalError
from .evaluation import (
    DEFAULT_RUN_TAG,
    MAX_RUN_ENTRIES,
    MetricsReport,
    RankedRun,
    TopicMetrics,
    aggregate_metrics,
    evaluate_topic,
    format_report,
    format_report_tsv,
    format_topic_metrics,
    rank_documents,
    write_run_file,
)
from .selection import (
    DEFAULT_MAX_CANDIDATES,
    DEFAULT_MIN_SUPPORT,
    DEFAULT_PROBES,
    DEFAULT_RISK,
    Candidate,
    SelectionResult,
    build_design_matrix,
    rank_specific_terms,
    select_terms,
    write_selection,
)

# Stream constants for the seed-splitting rule: child generator =
# default_rng(SeedSequence([master_seed, topic_id, stream])).
SAMPLING_STREAM = 0
PROBE_STREAM = 1
INIT_STREAM = 2

NEG_POOLS = ("unjudged", "judged")
DOC_FORMATS = ("auto", "trec", "tsv")


def topic_rng(master_seed: int, topic_id: int, stream: int) -> np.random.Generator:
    """Independent generator for one (topic, purpose) pair."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, topic_id, stream]))


def _derived_seed(master_seed: int, topic_id: int, stream: int) -> int:
    return int(np.random.SeedSequence([master_seed, topic_id, stream]).generate_state(1)[0])


@dataclass(frozen=True)
class PipelineConfig:
    """Everything run-all needs; mirrors the CLI flags plus the data paths."""

    training_docs: Path | None = None
    test_docs: Path | None = None
    reference_docs: Path | None = None
    qrels: Path | None = None
    stoplist: Path | None = None
    out: Path = Path("runs")
    topics: tuple[int, ...] | None = None
    risk: float = DEFAULT_RISK
    neg_samples: int = 3000
    seed: int = 0
    epochs: int = 20
    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    init_scale: float = 0.0
    min_support: int = DEFAULT_MIN_SUPPORT
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    limit: int = MAX_RUN_ENTRIES
    neg_pool: str = "unjudged"
    probe: str = "analytic"
    n_probes: int = DEFAULT_PROBES
    run_tag: str = DEFAULT_RUN_TAG
    docs_format: str = "auto"

    def __post_init__(self):
        if not 0.0 < self.risk < 1.0:
            raise ConfigError(f"risk must lie strictly between 0 and 1, got {self.risk}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.neg_samples < 1:
            raise ConfigError(f"neg_samples must be >= 1, got {self.neg_samples}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if not 1 <= self.limit <= MAX_RUN_ENTRIES:
            raise ConfigError(f"limit must lie in [1, {MAX_RUN_ENTRIES}], got {self.limit}")
        if self.neg_pool not in NEG_POOLS:
            raise ConfigError(f"neg_pool must be one of {NEG_POOLS}, got {self.neg_pool!r}")
        if self.docs_format not in DOC_FORMATS:
            raise ConfigError(f"docs_format must be one of {DOC_FORMATS}, got {self.docs_format!r}")

    def train_config(self, topic_id: int) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            max_epochs=self.epochs,
            weight_decay=self.weight_decay,
            init_scale=self.init_scale,
            seed=_derived_seed(self.seed, topic_id, INIT_STREAM),
        )


def _parse_topics(value: str) -> tuple[int, ...]:
    parts = [p for p in re.split(r"[,\s]+", value.strip()) if p]
    try:
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad topic list {value!r}: {exc}") from exc


# Config-file key -> (PipelineConfig field, caster).  Keys mirror the CLI
# flags with hyphens replaced by underscores.
_PATH_FIELDS = frozenset(
    {"training_docs", "test_docs", "reference_docs", "qrels", "stoplist", "out"}
)
_CONFIG_KEYS = {
    "training_docs": ("training_docs", Path),
    "test_docs": ("test_docs", Path),
    "reference_docs": ("reference_docs", Path),
    "qrels": ("qrels", Path),
    "stoplist": ("stoplist", Path),
    "out": ("out", Path),
    "topics": ("topics", _parse_topics),
    "risk": ("risk", float),
    "neg_samples": ("neg_samples", int),
    "seed": ("seed", int),
    "epochs": ("epochs", int),
    "lr": ("learning_rate", float),
    "lambda": ("weight_decay", float),
    "init_scale": ("init_scale", float),
    "min_support": ("min_support", int),
    "max_candidates": ("max_candidates", int),
    "limit": ("limit", int),
    "neg_pool": ("neg_pool", str),
    "probe": ("probe", str),
    "n_probes": ("n_probes", int),
    "run_tag": ("run_tag", str),
    "docs_format": ("docs_format", str),
}


def parse_config_file(path) -> dict[str, str]:
    """Read a flat ``key = value`` config file; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"expected 'key = value' at {path}:{lineno}: {raw!r}")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def build_config(config_file=None, **overrides) -> PipelineConfig:
    """Merge a config file with explicit overrides (overrides win).

    Relative paths in the file resolve against the file's directory; override
    paths are taken as given.  Unknown keys and bad values raise ConfigError.
    """
    values: dict[str, object] = {}
    if config_file is not None:
        config_file = Path(config_file)
        base = config_file.parent
        for key, sval in parse_config_file(config_file).items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r} in {config_file}")
            fieldname, cast = _CONFIG_KEYS[key]
            try:
                value = cast(sval)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad value for {key!r} in {config_file}: {exc}") from exc
            if fieldname in _PATH_FIELDS and not Path(value).is_absolute():
                value = base / value
            values[fieldname] = value
    for fieldname, value in overrides.items():
        if value is None:
            continue
        if fieldname in _PATH_FIELDS:
            value = Path(value)
        values[fieldname] = value
    try:
        return PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def index_documents(docs: Sequence[Document]) -> dict[str, Document]:
    return {doc.doc_id: doc for doc in docs}


def build_training_set(
    judgments: Mapping[int, Mapping[str, int]],
    docs: Mapping[str, Document],
    topic_id: int,
    n_irrelevant: int = 3000,
    *,
    rng: np.random.Generator,
    neg_pool: str = "unjudged",
    exclude_ids=frozenset(),
) -> list[tuple[Document, int]]:
    """Assemble one topic's labeled training set.

    Every available relevant document is taken (+1).  Negatives (-1) are
    ``min(n_irrelevant, pool size)`` documents sampled uniformly without
    replacement from the unjudged pool (documents with no judgment for this
    topic), or from the judged-irrelevant pool when ``neg_pool='judged'``.
    ``exclude_ids`` (normally the test collection) never enters the training
    set; an overlap with the relevant documents is an isolation violation.
    """
    if neg_pool not in NEG_POOLS:
        raise ConfigError(f"neg_pool must be one of {NEG_POOLS}, got {neg_pool!r}")
    exclude = set(exclude_ids)
    labels = judgments.get(topic_id, {})
    positive_ids = sorted(d for d, lab in labels.items() if lab == RELEVANT and d in docs)
    if not positive_ids:
        raise NoRelevantDocumentsError(f"topic {topic_id} has no relevant document to train on")
    leaked = [d for d in positive_ids if d in exclude]
    if leaked:
        raise DataError(
            f"train/test isolation violated for topic {topic_id}: {leaked[:3]}..."
        )
    if neg_pool == "unjudged":
        pool = sorted(d for d in docs.keys() if d not in labels and d not in exclude)
    else:
        pool = sorted(
            d
            for d, lab in labels.items()
            if lab == JUDGED_IRRELEVANT and d in docs and d not in exclude
        )
    if not pool:
        raise DataError(f"negative pool for topic {topic_id} is empty")
    k = min(n_irrelevant, len(pool))
    picks = rng.choice(len(pool), size=k, replace=False)
    training = [(docs[d], 1) for d in positive_ids]
    training.extend((docs[pool[int(i)]], -1) for i in picks)
    return training


@dataclass(frozen=True)
class TopicRunResult:
    """Everything one topic produced."""

    topic_id: int
    candidates: tuple[Candidate, ...]
    selection: SelectionResult
    filter: TopicFilter
    run: RankedRun
    metrics: TopicMetrics


def persist_topic_result(result: TopicRunResult, directory) -> None:
    """Write every per-topic artifact under one directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / "candidates.tsv").open("w", encoding="utf-8") as fh:
        for c in result.candidates:
            fh.write(f"{c.term}\t{c.support}\n")
    write_selection(result.selection, directory / "selection.tsv")
    save_filter(result.filter, directory / "model.txt")
    write_run_file([result.run], directory / "run.txt")
    (directory / "report.txt").write_text(
        format_topic_metrics(result.metrics), encoding="utf-8"
    )


def run_topic(
    topic_id: int,
    *,
    training_docs: Mapping[str, Document],
    test_docs: Mapping[str, Document],
    reference_stats: CorpusStats,
    judgments: Mapping[int, Mapping[str, int]],
    stoplist: StopList = EMPTY_STOPLIST,
    config: PipelineConfig = PipelineConfig(),
    out_dir=None,
) -> TopicRunResult:
    """Run the whole per-topic pipeline: sample, select, train, rank, score."""
    sampling = topic_rng(config.seed, topic_id, SAMPLING_STREAM)
    training_set = build_training_set(
        judgments,
        training_docs,
        topic_id,
        config.neg_samples,
        rng=sampling,
        neg_pool=config.neg_pool,
        exclude_ids=test_docs.keys(),
    )
    relevant_docs = [doc for doc, label in training_set if label > 0]
    candidates = tuple(
        rank_specific_terms(
            relevant_docs,
            reference_stats,
            stoplist,
            min_support=config.min_support,
            max_candidates=config.max_candidates,
        )
    )
    matrix = build_design_matrix(training_set, candidates)
    selection = select_terms(
        matrix,
        config.risk,
        probe=config.probe,
        n_probes=config.n_probes,
        rng=topic_rng(config.seed, topic_id, PROBE_STREAM),
        topic_id=topic_id,
    )
    vocabulary = selection.selected_terms
    if not vocabulary:
        raise DataError(f"probe cut kept zero terms for topic {topic_id}")
    filt = train_filter(training_set, vocabulary, config.train_config(topic_id), topic_id)
    run = rank_documents(filt, test_docs.values(), limit=config.limit, run_tag=config.run_tag)
    relevant_test = {
        d for d, lab in judgments.get(topic_id, {}).items() if lab == RELEVANT and d in test_docs
    }
    metrics = evaluate_topic(run, relevant_test)
    result = TopicRunResult(
        topic_id=topic_id,
        candidates=candidates,
        selection=selection,
        filter=filt,
        run=run,
        metrics=metrics,
    )
    if out_dir is not None:
        persist_topic_result(result, out_dir)
    return result


@dataclass(frozen=True)
class RunAllResult:
    report: MetricsReport
    results: tuple[TopicRunResult, ...]
    skipped: tuple[int, ...] = ()
    failures: tuple[tuple[int, str], ...] = ()
    out_dir: Path | None = None


def run_all(config: PipelineConfig) -> RunAllResult:
    """Run every topic, aggregate the metrics, and write the combined outputs.

    Topics without a relevant training document are skipped with a warning;
    topic hard-failures are recorded and the remaining topics still run.
    """
    for name in ("training_docs", "test_docs", "qrels"):
        if getattr(config, name) is None:
            raise ConfigError(f"config is missing {name}")
    training_docs = index_documents(load_documents(config.training_docs, config.docs_format))
    test_docs = index_documents(load_documents(config.test_docs, config.docs_format))
    if config.reference_docs is None or Path(config.reference_docs) == Path(config.training_docs):
        reference_stats = CorpusStats.from_documents(training_docs.values())
    else:
        reference_stats = CorpusStats.from_documents(
            load_documents(config.reference_docs, config.docs_format)
        )
    judgments = group_judgments(load_qrels(config.qrels))
    stoplist = StopList.from_file(config.stoplist) if config.stoplist else EMPTY_STOPLIST
    topics = config.topics if config.topics else tuple(sorted(judgments))
    if not topics:
        raise DataError("no topics found in the qrels")

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results: list[TopicRunResult] = []
    skipped: list[int] = []
    failures: list[tuple[int, str]] = []
    for topic_id in topics:
        try:
            results.append(
                run_topic(
                    topic_id,
                    training_docs=training_docs,
                    test_docs=test_docs,
                    reference_stats=reference_stats,
                    judgments=judgments,
                    stoplist=stoplist,
                    config=config,
                    out_dir=out_dir / f"topic_{topic_id}",
                )
            )
        except NoRelevantDocumentsError as exc:
            warnings.warn(f"skipping topic {topic_id}: {exc}", stacklevel=2)
            skipped.append(topic_id)
        except (DataError, NumericalError) as exc:
            failures.append((topic_id, str(exc)))
    if not results:
        raise DataError("no topic completed; nothing to aggregate")

    report = aggregate_metrics([r.metrics for r in results])
    write_run_file([r.run for r in results], out_dir / "combined.run")
    (out_dir / "report.txt").write_text(format_report(report), encoding="utf-8")
    (out_dir / "report.tsv").write_text(format_report_tsv(report), encoding="utf-8")
    with (out_dir / "summary.tsv").open("w", encoding="utf-8") as fh:
        fh.write("topic\tcandidates\tselected_terms\tavg_precision\n")
        for r in results:
            fh.write(
                f"{r.topic_id}\t{len(r.candidates)}\t{r.selection.cut_index}"
                f"\t{r.metrics.avg_precision:.6f}\n"
            )
    return RunAllResult(
        report=report,
        results=tuple(results),
        skipped=tuple(skipped),
        failures=tuple(failures),
        out_dir=out_dir,
    )
