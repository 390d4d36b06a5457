import pytest
from hypothesis import given
from hypothesis import strategies as st

from topicfilter.corpus import (
    JUDGED_IRRELEVANT,
    RELEVANT,
    CorpusStats,
    Document,
    StopList,
    group_judgments,
    ingest_documents,
    iter_trec_records,
    iter_tsv_records,
    load_documents,
    parse_qrels,
    read_corpus_stats,
    read_tsv_documents,
    relevant_doc_ids,
    write_corpus_stats,
    write_qrels,
    write_tsv_documents,
    load_qrels,
    tokenize,
)
from topicfilter.errors import (
    DuplicateDocumentError,
    EmptyCollectionError,
    ParseError,
)


class TestTokenize:
    def test_lowercases_words(self):
        assert tokenize("Falkland Islands") == ["falkland", "islands"]

    def test_empty_text(self):
        assert tokenize("") == []

    def test_alphanumeric_runs(self):
        assert tokenize("Eurotunnel's rail-link") == ["eurotunnel", "s", "rail", "link"]

    def test_digits_kept(self):
        assert tokenize("FT921-3 in 1992") == ["ft921", "3", "in", "1992"]

    def test_underscore_splits(self):
        assert tokenize("a_b") == ["a", "b"]

    @given(st.text(max_size=200))
    def test_lowercase_idempotent(self, text):
        assert tokenize(text.lower()) == tokenize(text)

    @given(st.text(max_size=200))
    def test_tokens_survive_retokenization(self, text):
        tokens = tokenize(text)
        assert tokenize(" ".join(tokens)) == tokens


class TestDocument:
    def test_tf_and_length(self, doc):
        d = doc("d1", "a a b")
        assert d.tf == {"a": 2, "b": 1}
        assert d.length == 3
        assert d.tokens == ("a", "a", "b")

    @given(st.text(max_size=300))
    def test_tf_sums_to_length(self, text):
        d = Document.from_text("x", text)
        assert sum(d.tf.values()) == d.length == len(d.tokens)

    def test_empty_document(self, doc):
        d = doc("d1", "---")
        assert d.length == 0
        assert d.tf == {}


class TestCorpusStats:
    def test_hand_counts(self, doc):
        stats = CorpusStats.from_documents([doc("d1", "a a b"), doc("d2", "b c")])
        assert dict(stats.corpus_tf) == {"a": 2, "b": 2, "c": 1}
        assert stats.total_tokens == 5
        assert stats.doc_count == 2

    def test_single_token_doc(self, doc):
        stats = CorpusStats.from_documents([doc("d1", "word")])
        assert dict(stats.corpus_tf) == {"word": 1}

    def test_empty_collection_rejected(self):
        with pytest.raises(EmptyCollectionError):
            CorpusStats.from_documents([])

    def test_order_independent(self, doc):
        docs = [doc("a", "x y"), doc("b", "y z"), doc("c", "z z q")]
        forward = CorpusStats.from_documents(docs)
        backward = CorpusStats.from_documents(docs[::-1])
        assert dict(forward.corpus_tf) == dict(backward.corpus_tf)
        assert forward.total_tokens == backward.total_tokens

    def test_read_only(self, doc):
        stats = CorpusStats.from_documents([doc("d1", "a b")])
        with pytest.raises(TypeError):
            stats.corpus_tf["a"] = 7

    def test_stats_file_round_trip(self, doc, tmp_path):
        stats = CorpusStats.from_documents([doc("d1", "a a b"), doc("d2", "b c")])
        path = tmp_path / "stats.tsv"
        write_corpus_stats(stats, path)
        again = read_corpus_stats(path)
        assert dict(again.corpus_tf) == dict(stats.corpus_tf)
        assert again.total_tokens == stats.total_tokens
        assert again.doc_count == stats.doc_count

    def test_stats_file_sum_mismatch(self, tmp_path):
        path = tmp_path / "stats.tsv"
        path.write_text("doc_count\t1\ttotal_tokens\t5\na\t1\n", encoding="utf-8")
        with pytest.raises(ParseError):
            read_corpus_stats(path)


class TestIngest:
    def test_two_records(self):
        docs = ingest_documents([("d1", "alpha beta"), ("d2", "gamma")])
        assert [d.doc_id for d in docs] == ["d1", "d2"]

    def test_duplicate_doc_id(self):
        with pytest.raises(DuplicateDocumentError):
            ingest_documents([("d1", "a"), ("d1", "b")])

    def test_empty_text_record(self):
        docs = ingest_documents([("d1", " .. ")])
        assert docs[0].length == 0
        assert docs[0].tf == {}


TREC_SAMPLE = b"""
<DOC>
<DOCNO> FT911-1 </DOCNO>
<DATE>910101</DATE>
<TEXT>
The Falkland <b>Islands</b> dispute.
</TEXT>
</DOC>
<DOC>
<DOCNO>FT911-2</DOCNO>
<TEXT>first block</TEXT>
<TEXT>second block</TEXT>
</DOC>
"""


class TestTrecFormat:
    def test_parse_sample(self):
        records = list(iter_trec_records(TREC_SAMPLE))
        assert [r[0] for r in records] == ["FT911-1", "FT911-2"]
        assert tokenize(records[0][1]) == ["the", "falkland", "islands", "dispute"]
        assert tokenize(records[1][1]) == ["first", "block", "second", "block"]

    def test_missing_docno(self):
        data = b"<DOC><TEXT>x</TEXT></DOC>"
        with pytest.raises(ParseError) as err:
            list(iter_trec_records(data))
        assert err.value.offset == 0
        assert err.value.record == 0

    def test_unterminated_record(self):
        data = b"<DOC><DOCNO>A</DOCNO><TEXT>x</TEXT>"
        with pytest.raises(ParseError) as err:
            list(iter_trec_records(data))
        assert "unterminated" in str(err.value)

    def test_trailing_garbage(self):
        data = b"<DOC><DOCNO>A</DOCNO><TEXT>x</TEXT></DOC>stray"
        with pytest.raises(ParseError):
            list(iter_trec_records(data))

    def test_round_trip_through_tsv(self, tmp_path):
        docs = ingest_documents(iter_trec_records(TREC_SAMPLE))
        path = tmp_path / "corpus.tsv"
        write_tsv_documents(docs, path)
        again = read_tsv_documents(path)
        assert [(d.doc_id, d.tf) for d in again] == [(d.doc_id, d.tf) for d in docs]


class TestTsvFormat:
    def test_parse_lines(self):
        records = list(iter_tsv_records(b"d1\talpha beta\nd2\tgamma\n"))
        assert records == [("d1", "alpha beta"), ("d2", "gamma")]

    def test_missing_tab(self):
        with pytest.raises(ParseError) as err:
            list(iter_tsv_records(b"d1 alpha\n"))
        assert err.value.offset == 0

    def test_offset_of_later_record(self):
        with pytest.raises(ParseError) as err:
            list(iter_tsv_records(b"d1\tok\nbroken\n"))
        assert err.value.offset == 6
        assert err.value.record == 1

    def test_auto_format_sniffing(self, tmp_path, doc):
        trec = tmp_path / "c.sgml"
        trec.write_bytes(TREC_SAMPLE)
        assert [d.doc_id for d in load_documents(trec)] == ["FT911-1", "FT911-2"]
        tsv = tmp_path / "c.tsv"
        write_tsv_documents([doc("d9", "x y")], tsv)
        assert [d.doc_id for d in load_documents(tsv)] == ["d9"]

    def test_round_trip_identical_tf(self, tmp_path, doc):
        docs = [doc("d1", "Falkland oil, OIL!"), doc("d2", "")]
        path = tmp_path / "c.tsv"
        write_tsv_documents(docs, path)
        again = read_tsv_documents(path)
        assert [(d.doc_id, d.tf, d.length) for d in again] == [
            (d.doc_id, d.tf, d.length) for d in docs
        ]


class TestQrels:
    def test_relevant_line(self):
        (j,) = parse_qrels(["351 0 FT921-100 1"])
        assert (j.topic_id, j.doc_id, j.label) == (351, "FT921-100", RELEVANT)

    def test_judged_irrelevant_line(self):
        (j,) = parse_qrels(["351 0 FT921-101 0"])
        assert j.label == JUDGED_IRRELEVANT

    def test_malformed_line_cites_location(self):
        with pytest.raises(ParseError) as err:
            parse_qrels(["351 0 X"])
        assert err.value.line == 1

    def test_negative_judgment_is_irrelevant(self):
        (j,) = parse_qrels(["351 0 D -1"])
        assert j.label == JUDGED_IRRELEVANT

    def test_duplicate_pair_rejected(self):
        with pytest.raises(ParseError):
            parse_qrels(["1 0 D 1", "1 0 D 0"])

    def test_grouping_and_relevant_ids(self):
        judgments = parse_qrels(["1 0 A 1", "1 0 B 0", "2 0 A 0"])
        grouped = group_judgments(judgments)
        assert grouped == {1: {"A": RELEVANT, "B": JUDGED_IRRELEVANT}, 2: {"A": JUDGED_IRRELEVANT}}
        assert relevant_doc_ids(grouped, 1) == {"A"}
        assert relevant_doc_ids(grouped, 3) == set()

    def test_file_round_trip(self, tmp_path):
        judgments = parse_qrels(["1 0 A 1", "1 0 B 0"])
        path = tmp_path / "qrels.txt"
        write_qrels(judgments, path)
        assert load_qrels(path) == judgments


class TestStopList:
    def test_from_file_with_comments(self, tmp_path):
        path = tmp_path / "stop.txt"
        path.write_text("# heterogeneity terms\ncalifornia\nLos\n\nangeles\n", encoding="utf-8")
        stop = StopList.from_file(path)
        assert len(stop) == 3
        assert "california" in stop
        assert "LOS" in stop
        assert "oil" not in stop
