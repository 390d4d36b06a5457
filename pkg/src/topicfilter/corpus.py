"""Corpus ingestion: tokenization, documents, collection statistics, judgments.

Supported inputs: TREC-style SGML collections (``<DOC>``/``<DOCNO>``/``<TEXT>``),
one-document-per-line TSV, trec_eval-compatible qrels, and plain stop lists.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import (
    DuplicateDocumentError,
    EmptyCollectionError,
    ParseError,
)

# Judgment labels.  Documents absent from the qrels are implicitly unjudged;
# no record is ever stored for them.
RELEVANT = 1
JUDGED_IRRELEVANT = 0

# A token is a maximal run of alphanumeric characters (Unicode-aware; the
# underscore, which \w would admit, is excluded).
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)

_SGML_TAG = re.compile(r"<[^>]*>")


def tokenize(text: str) -> list[str]:
    """Split text into lowercase tokens.

    Every maximal run of alphanumeric characters becomes one token; case is
    folded, everything else separates tokens.  No stemming and no stop-word
    removal happen here.  Empty input yields an empty list.
    """
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Document:
    """One tokenized document with its term-frequency table.

    ``length`` counts tokens, so ``sum(tf.values()) == length`` always holds.
    """

    doc_id: str
    raw_text: str
    tokens: tuple[str, ...]
    length: int
    tf: Mapping[str, int]

    @classmethod
    def from_text(cls, doc_id: str, raw_text: str) -> "Document":
        tokens = tuple(tokenize(raw_text))
        return cls(
            doc_id=doc_id,
            raw_text=raw_text,
            tokens=tokens,
            length=len(tokens),
            tf=dict(Counter(tokens)),
        )


@dataclass(frozen=True)
class CorpusStats:
    """Term counts over a reference collection; read-only once built."""

    corpus_tf: Mapping[str, int]
    total_tokens: int
    doc_count: int

    @classmethod
    def from_documents(cls, docs: Iterable[Document]) -> "CorpusStats":
        counts: Counter[str] = Counter()
        total = 0
        n = 0
        for doc in docs:
            counts.update(doc.tf)
            total += doc.length
            n += 1
        if n == 0:
            raise EmptyCollectionError("cannot compute corpus statistics over zero documents")
        return cls(corpus_tf=MappingProxyType(dict(counts)), total_tokens=total, doc_count=n)


@dataclass(frozen=True)
class Judgment:
    """One relevance judgment: (topic, document, label)."""

    topic_id: int
    doc_id: str
    label: int  # RELEVANT or JUDGED_IRRELEVANT


@dataclass(frozen=True)
class StopList:
    """Exact-match stop list; membership is tested after lowercasing."""

    terms: frozenset[str]

    def __contains__(self, term: str) -> bool:
        return term.lower() in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "StopList":
        return cls(frozenset(t.lower() for t in terms))

    @classmethod
    def from_file(cls, path) -> "StopList":
        """Read one term per line; blank lines and ``#`` comments are skipped."""
        terms = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            terms.append(stripped)
        return cls.from_terms(terms)


EMPTY_STOPLIST = StopList(frozenset())


def ingest_documents(records: Iterable[tuple[str, str]]) -> list[Document]:
    """Build Documents from (doc_id, text) records, rejecting duplicate ids."""
    docs: list[Document] = []
    seen: set[str] = set()
    for doc_id, text in records:
        if doc_id in seen:
            raise DuplicateDocumentError(f"duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        docs.append(Document.from_text(doc_id, text))
    return docs


def iter_trec_records(data: bytes, source=None) -> Iterator[tuple[str, str]]:
    """Yield (doc_id, text) pairs from TREC-style SGML bytes.

    Records are delimited by ``<DOC>``/``</DOC>`` and must contain a
    ``<DOCNO>`` element; the text is the concatenation of all ``<TEXT>``
    blocks with any embedded markup stripped.  Parse failures report the byte
    offset of the offending record and its index in the stream.
    """
    pos = 0
    record = 0
    while True:
        start = data.find(b"<DOC>", pos)
        if start < 0:
            tail = data[pos:]
            if tail.strip():
                raise ParseError(
                    "trailing bytes outside any <DOC> record",
                    source=source,
                    offset=pos + (len(tail) - len(tail.lstrip())),
                    record=record,
                )
            return
        end = data.find(b"</DOC>", start)
        if end < 0:
            raise ParseError(
                "unterminated <DOC> record", source=source, offset=start, record=record
            )
        body = data[start + len(b"<DOC>") : end]
        doc_id = _extract_field(body, b"DOCNO")
        if doc_id is None:
            raise ParseError(
                "record has no <DOCNO> element", source=source, offset=start, record=record
            )
        texts = _extract_all_fields(body, b"TEXT")
        try:
            text = "\n".join(t.decode("utf-8") for t in texts)
            name = doc_id.decode("utf-8").strip()
        except UnicodeDecodeError as exc:
            raise ParseError(
                f"record is not valid UTF-8: {exc}", source=source, offset=start, record=record
            ) from exc
        yield name, _SGML_TAG.sub(" ", text)
        record += 1
        pos = end + len(b"</DOC>")


def _extract_field(body: bytes, tag: bytes) -> bytes | None:
    open_tag, close_tag = b"<" + tag + b">", b"</" + tag + b">"
    start = body.find(open_tag)
    if start < 0:
        return None
    end = body.find(close_tag, start)
    if end < 0:
        return None
    return body[start + len(open_tag) : end]


def _extract_all_fields(body: bytes, tag: bytes) -> list[bytes]:
    open_tag, close_tag = b"<" + tag + b">", b"</" + tag + b">"
    out = []
    pos = 0
    while True:
        start = body.find(open_tag, pos)
        if start < 0:
            return out
        end = body.find(close_tag, start)
        if end < 0:
            return out
        out.append(body[start + len(open_tag) : end])
        pos = end + len(close_tag)


def iter_tsv_records(data: bytes, source=None) -> Iterator[tuple[str, str]]:
    """Yield (doc_id, text) pairs from ``doc_id<TAB>text`` lines."""
    offset = 0
    record = 0
    for raw in data.split(b"\n"):
        line_offset = offset
        offset += len(raw) + 1
        line = raw.rstrip(b"\r")
        if not line.strip():
            continue
        tab = line.find(b"\t")
        if tab < 0:
            raise ParseError(
                "expected doc_id<TAB>text",
                source=source,
                offset=line_offset,
                record=record,
            )
        try:
            doc_id = line[:tab].decode("utf-8").strip()
            text = line[tab + 1 :].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(
                f"line is not valid UTF-8: {exc}",
                source=source,
                offset=line_offset,
                record=record,
            ) from exc
        if not doc_id:
            raise ParseError(
                "empty doc_id", source=source, offset=line_offset, record=record
            )
        yield doc_id, text
        record += 1


def read_trec_documents(path) -> list[Document]:
    data = Path(path).read_bytes()
    return ingest_documents(iter_trec_records(data, source=path))


def read_tsv_documents(path) -> list[Document]:
    data = Path(path).read_bytes()
    return ingest_documents(iter_tsv_records(data, source=path))


def load_documents(path, fmt: str = "auto") -> list[Document]:
    """Load a collection, sniffing TREC SGML vs TSV when ``fmt`` is ``auto``."""
    if fmt == "auto":
        head = Path(path).open("rb").read(512).lstrip()
        fmt = "trec" if head.startswith(b"<") else "tsv"
    if fmt == "trec":
        return read_trec_documents(path)
    if fmt == "tsv":
        return read_tsv_documents(path)
    raise ValueError(f"unknown document format {fmt!r}")


def write_tsv_documents(docs: Iterable[Document], path) -> None:
    """Serialize a collection in the canonical one-line-per-document form.

    The text column is the space-joined token sequence, so re-ingesting the
    file reproduces identical term-frequency tables (original punctuation and
    casing are not preserved).
    """
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(f"{doc.doc_id}\t{' '.join(doc.tokens)}\n")


def parse_qrels(lines: Iterable[str], source=None) -> list[Judgment]:
    """Parse ``topic iter doc_id judgment`` lines (the iter field is ignored).

    A judgment above zero maps to RELEVANT, anything else to
    JUDGED_IRRELEVANT.  Duplicate (topic, doc) pairs are rejected.
    """
    out: list[Judgment] = []
    seen: set[tuple[int, str]] = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ParseError(
                f"expected 4 whitespace-separated fields, got {len(fields)}",
                source=source,
                line=lineno,
            )
        try:
            topic_id = int(fields[0])
            judgment = int(fields[3])
        except ValueError as exc:
            raise ParseError(f"non-integer field: {exc}", source=source, line=lineno) from exc
        doc_id = fields[2]
        key = (topic_id, doc_id)
        if key in seen:
            raise ParseError(
                f"duplicate judgment for topic {topic_id}, doc {doc_id!r}",
                source=source,
                line=lineno,
            )
        seen.add(key)
        label = RELEVANT if judgment > 0 else JUDGED_IRRELEVANT
        out.append(Judgment(topic_id=topic_id, doc_id=doc_id, label=label))
    return out


def load_qrels(path) -> list[Judgment]:
    with Path(path).open("r", encoding="utf-8") as fh:
        return parse_qrels(fh, source=path)


def write_qrels(judgments: Iterable[Judgment], path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for j in judgments:
            fh.write(f"{j.topic_id} 0 {j.doc_id} {1 if j.label == RELEVANT else 0}\n")


def write_corpus_stats(stats: CorpusStats, path) -> None:
    """Serialize corpus statistics: a totals header, then ``term<TAB>count`` rows."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"doc_count\t{stats.doc_count}\ttotal_tokens\t{stats.total_tokens}\n")
        for term in sorted(stats.corpus_tf):
            fh.write(f"{term}\t{stats.corpus_tf[term]}\n")


def read_corpus_stats(path) -> CorpusStats:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty corpus statistics file", source=path)
    header = lines[0].split("\t")
    if len(header) != 4 or header[0] != "doc_count" or header[2] != "total_tokens":
        raise ParseError("malformed corpus statistics header", source=path, line=1)
    try:
        doc_count = int(header[1])
        total_tokens = int(header[3])
    except ValueError as exc:
        raise ParseError(f"malformed header: {exc}", source=path, line=1) from exc
    counts: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError("expected term<TAB>count", source=path, line=lineno)
        try:
            counts[fields[0]] = int(fields[1])
        except ValueError as exc:
            raise ParseError(f"bad count: {exc}", source=path, line=lineno) from exc
    if sum(counts.values()) != total_tokens:
        raise ParseError("term counts do not sum to total_tokens", source=path)
    return CorpusStats(
        corpus_tf=MappingProxyType(counts), total_tokens=total_tokens, doc_count=doc_count
    )


def group_judgments(judgments: Iterable[Judgment]) -> dict[int, dict[str, int]]:
    """Index judgments as topic -> doc_id -> label."""
    grouped: dict[int, dict[str, int]] = {}
    for j in judgments:
        grouped.setdefault(j.topic_id, {})[j.doc_id] = j.label
    return grouped


def relevant_doc_ids(grouped: Mapping[int, Mapping[str, int]], topic_id: int) -> set[str]:
    return {d for d, label in grouped.get(topic_id, {}).items() if label == RELEVANT}
