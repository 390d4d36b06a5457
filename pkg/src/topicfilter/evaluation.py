"""Ranked runs and retrieval metrics.

Run files use the standard six-column submission format
(``topic Q0 doc_id rank score tag``) and the metric block mirrors the usual
trec_eval report: uninterpolated average precision, R-precision, interpolated
precision at the 11 standard recall levels, and precision at fixed depths.
Judged-irrelevant and unjudged documents both count as non-relevant.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from .classifier import TopicFilter
from .corpus import Document
from .errors import DataError, EmptyCollectionError, ParseError

MAX_RUN_ENTRIES = 1000
PRECISION_DEPTHS = (5, 10, 15, 20, 30, 100, 200, 500, 1000)
RECALL_LEVELS = tuple(i / 10 for i in range(11))

DEFAULT_RUN_TAG = "topicfilter"


class RunEntry(NamedTuple):
    rank: int
    doc_id: str
    score: float


@dataclass(frozen=True)
class RankedRun:
    """Ranked result list for one topic, at most MAX_RUN_ENTRIES long."""

    topic_id: int
    entries: tuple[RunEntry, ...]
    run_tag: str = DEFAULT_RUN_TAG

    def __post_init__(self):
        entries = tuple(RunEntry(*e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) > MAX_RUN_ENTRIES:
            raise ValueError(f"a run holds at most {MAX_RUN_ENTRIES} entries")
        seen = set()
        prev_score = None
        for i, entry in enumerate(entries):
            if entry.rank != i + 1:
                raise ValueError(f"ranks must be consecutive from 1, got {entry.rank} at {i}")
            if prev_score is not None and entry.score > prev_score:
                raise ValueError("scores must be non-increasing with rank")
            prev_score = entry.score
            if entry.doc_id in seen:
                raise ValueError(f"duplicate doc_id {entry.doc_id!r} in run")
            seen.add(entry.doc_id)

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]


def rank_documents(
    model: TopicFilter,
    docs: Iterable[Document],
    limit: int = MAX_RUN_ENTRIES,
    run_tag: str = DEFAULT_RUN_TAG,
) -> RankedRun:
    """Score every document and keep the top ``limit`` by decreasing output.

    Score ties are broken by ascending doc_id so the run is a pure function
    of the collection contents.  An empty collection gives an empty run.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if limit > MAX_RUN_ENTRIES:
        raise ValueError(f"limit must be <= {MAX_RUN_ENTRIES}, got {limit}")
    docs = list(docs)
    topic_id = model.topic_id if model.topic_id is not None else 0
    if not docs:
        return RankedRun(topic_id=topic_id, entries=(), run_tag=run_tag)
    scores = model.score_documents(docs)
    order = sorted(range(len(docs)), key=lambda i: (-scores[i], docs[i].doc_id))
    entries = tuple(
        RunEntry(rank, docs[i].doc_id, float(scores[i]))
        for rank, i in enumerate(order[:limit], start=1)
    )
    return RankedRun(topic_id=topic_id, entries=entries, run_tag=run_tag)


def _require_relevant(relevant_set) -> set[str]:
    relevant = set(relevant_set)
    if not relevant:
        raise DataError("metric undefined for an empty relevant set; topic is excluded")
    return relevant


def average_precision(run: RankedRun, relevant_set: Iterable[str]) -> float:
    """Uninterpolated average precision.

    Mean over the R relevant documents of the precision at each one's rank;
    relevant documents never retrieved contribute zero.
    """
    relevant = _require_relevant(relevant_set)
    hits = 0
    total = 0.0
    for i, entry in enumerate(run.entries):
        if entry.doc_id in relevant:
            hits += 1
            total += hits / (i + 1)
    return total / len(relevant)


def r_precision(run: RankedRun, relevant_set: Iterable[str]) -> float:
    """Precision at rank R = |relevant set|; short runs pad with non-relevant."""
    relevant = _require_relevant(relevant_set)
    depth = len(relevant)
    hits = sum(1 for e in run.entries[:depth] if e.doc_id in relevant)
    return hits / depth


def precision_at_k(run: RankedRun, relevant_set: Iterable[str], k: int) -> float:
    """Fraction of the top k that is relevant; short runs pad with non-relevant."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    relevant = _require_relevant(relevant_set)
    hits = sum(1 for e in run.entries[:k] if e.doc_id in relevant)
    return hits / k


def interpolated_precision(run: RankedRun, relevant_set: Iterable[str]) -> tuple[float, ...]:
    """Max precision at or beyond each of the 11 standard recall levels.

    Levels with no qualifying rank score zero.  Recall/level comparisons are
    safe in floats here: with at most 1000 ranks the rational gaps between
    distinct recall values dwarf rounding error.
    """
    relevant = _require_relevant(relevant_set)
    total = len(relevant)
    hits = 0
    points = []  # (recall, precision) after each rank
    for i, entry in enumerate(run.entries):
        if entry.doc_id in relevant:
            hits += 1
        points.append((hits / total, (hits) / (i + 1)))
    out = []
    for level in RECALL_LEVELS:
        best = 0.0
        for recall, precision in points:
            if recall >= level and precision > best:
                best = precision
        out.append(best)
    return tuple(out)


@dataclass(frozen=True)
class TopicMetrics:
    """The metric block for a single topic."""

    topic_id: int
    retrieved: int
    relevant_total: int
    relevant_retrieved: int
    avg_precision: float
    r_precision: float
    interpolated: tuple[float, ...]
    precision_at: Mapping[int, float]


def evaluate_topic(run: RankedRun, relevant_set: Iterable[str]) -> TopicMetrics:
    """Score one run against the relevant set for its topic.

    A topic with no relevant documents yields a zero placeholder that the
    aggregation step moves to the excluded list.
    """
    relevant = set(relevant_set)
    if not relevant:
        return TopicMetrics(
            topic_id=run.topic_id,
            retrieved=len(run.entries),
            relevant_total=0,
            relevant_retrieved=0,
            avg_precision=0.0,
            r_precision=0.0,
            interpolated=tuple(0.0 for _ in RECALL_LEVELS),
            precision_at={k: 0.0 for k in PRECISION_DEPTHS},
        )
    retrieved_ids = set(run.doc_ids())
    return TopicMetrics(
        topic_id=run.topic_id,
        retrieved=len(run.entries),
        relevant_total=len(relevant),
        relevant_retrieved=len(retrieved_ids & relevant),
        avg_precision=average_precision(run, relevant),
        r_precision=r_precision(run, relevant),
        interpolated=interpolated_precision(run, relevant),
        precision_at={k: precision_at_k(run, relevant, k) for k in PRECISION_DEPTHS},
    )


@dataclass(frozen=True)
class MetricsReport:
    """Aggregate metric block: means over evaluated topics, counts summed.

    Topics with no relevant document are listed in ``excluded_topics`` and
    contribute to neither the sums nor the means.
    """

    topics: tuple[TopicMetrics, ...]
    excluded_topics: tuple[int, ...]
    retrieved: int
    relevant_total: int
    relevant_retrieved: int
    avg_precision: float
    r_precision: float
    interpolated: tuple[float, ...]
    precision_at: Mapping[int, float]

    @property
    def num_topics(self) -> int:
        return len(self.topics)


def aggregate_metrics(per_topic: Iterable[TopicMetrics]) -> MetricsReport:
    """Average per-topic metrics, excluding topics with zero relevant docs."""
    per_topic = sorted(per_topic, key=lambda m: m.topic_id)
    included = [m for m in per_topic if m.relevant_total > 0]
    excluded = tuple(m.topic_id for m in per_topic if m.relevant_total == 0)
    if not included:
        raise EmptyCollectionError("every topic was excluded; nothing to aggregate")
    n = len(included)
    return MetricsReport(
        topics=tuple(included),
        excluded_topics=excluded,
        retrieved=sum(m.retrieved for m in included),
        relevant_total=sum(m.relevant_total for m in included),
        relevant_retrieved=sum(m.relevant_retrieved for m in included),
        avg_precision=sum(m.avg_precision for m in included) / n,
        r_precision=sum(m.r_precision for m in included) / n,
        interpolated=tuple(
            sum(m.interpolated[j] for m in included) / n for j in range(len(RECALL_LEVELS))
        ),
        precision_at={
            k: sum(m.precision_at[k] for m in included) / n for k in PRECISION_DEPTHS
        },
    )


def format_run_lines(run: RankedRun) -> list[str]:
    return [
        f"{run.topic_id} Q0 {e.doc_id} {e.rank} {e.score:.6f} {run.run_tag}"
        for e in run.entries
    ]


def write_run_file(runs: Iterable[RankedRun], path) -> None:
    """Write one or more topic runs in submission order (ascending topic id)."""
    runs = sorted(runs, key=lambda r: r.topic_id)
    with Path(path).open("w", encoding="utf-8") as fh:
        for run in runs:
            for line in format_run_lines(run):
                fh.write(line + "\n")


def read_run_file(path) -> list[RankedRun]:
    """Parse a run file back into per-topic RankedRun objects."""
    by_topic: dict[int, list[tuple[int, str, float]]] = {}
    tags: dict[int, str] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 6:
                raise ParseError(
                    f"expected 6 whitespace-separated fields, got {len(fields)}",
                    source=path,
                    line=lineno,
                )
            try:
                topic_id = int(fields[0])
                rank = int(fields[3])
                score = float(fields[4])
            except ValueError as exc:
                raise ParseError(f"bad run line: {exc}", source=path, line=lineno) from exc
            by_topic.setdefault(topic_id, []).append((rank, fields[2], score))
            tags.setdefault(topic_id, fields[5])
    runs = []
    for topic_id in sorted(by_topic):
        entries = sorted(by_topic[topic_id])
        try:
            runs.append(
                RankedRun(
                    topic_id=topic_id,
                    entries=tuple(RunEntry(*e) for e in entries),
                    run_tag=tags[topic_id],
                )
            )
        except ValueError as exc:
            raise ParseError(f"invalid run for topic {topic_id}: {exc}", source=path) from exc
    return runs


def _metric_rows(m) -> list[tuple[str, float]]:
    rows = [
        ("num_retrieved", float(m.retrieved)),
        ("num_relevant", float(m.relevant_total)),
        ("num_relevant_retrieved", float(m.relevant_retrieved)),
        ("avg_precision", m.avg_precision),
        ("r_precision", m.r_precision),
    ]
    rows.extend(
        (f"iprec_at_{level:.1f}", m.interpolated[j]) for j, level in enumerate(RECALL_LEVELS)
    )
    rows.extend((f"p_{k}", m.precision_at[k]) for k in PRECISION_DEPTHS)
    return rows


def format_report(report: MetricsReport) -> str:
    """Human-readable aggregate report."""
    excluded = " ".join(str(t) for t in report.excluded_topics) or "none"
    lines = [
        f"Topics evaluated:     {report.num_topics}",
        f"Topics excluded:      {excluded}",
        "",
        f"Retrieved:            {report.retrieved}",
        f"Relevant:             {report.relevant_total}",
        f"Relevant retrieved:   {report.relevant_retrieved}",
        "",
        f"Average precision (uninterpolated): {report.avg_precision:.4f}",
        f"R-precision:                        {report.r_precision:.4f}",
        "",
        "Interpolated recall-precision averages:",
    ]
    lines.extend(
        f"  at {level:.1f}      {report.interpolated[j]:.4f}"
        for j, level in enumerate(RECALL_LEVELS)
    )
    lines.append("")
    lines.append("Precision at fixed depths:")
    lines.extend(
        f"  {k:>5} docs  {report.precision_at[k]:.4f}" for k in PRECISION_DEPTHS
    )
    return "\n".join(lines) + "\n"


def format_report_tsv(report: MetricsReport) -> str:
    """Machine-readable variant: ``topic<TAB>metric<TAB>value`` rows."""
    rows = []
    for m in report.topics:
        rows.extend(f"{m.topic_id}\t{name}\t{value:.6f}" for name, value in _metric_rows(m))
    rows.extend(f"all\t{name}\t{value:.6f}" for name, value in _metric_rows(report))
    rows.append(f"all\tnum_topics\t{report.num_topics:.6f}")
    for t in report.excluded_topics:
        rows.append(f"{t}\texcluded\t1.000000")
    return "\n".join(rows) + "\n"


def format_topic_metrics(m: TopicMetrics) -> str:
    """Per-topic text block used in the per-topic artifact directory."""
    lines = [
        f"Topic:                {m.topic_id}",
        f"Retrieved:            {m.retrieved}",
        f"Relevant:             {m.relevant_total}",
        f"Relevant retrieved:   {m.relevant_retrieved}",
        f"Average precision (uninterpolated): {m.avg_precision:.4f}",
        f"R-precision:                        {m.r_precision:.4f}",
        "Interpolated recall-precision:",
    ]
    lines.extend(
        f"  at {level:.1f}      {m.interpolated[j]:.4f}" for j, level in enumerate(RECALL_LEVELS)
    )
    lines.append("Precision at fixed depths:")
    lines.extend(f"  {k:>5} docs  {m.precision_at[k]:.4f}" for k in PRECISION_DEPTHS)
    return "\n".join(lines) + "\n"
