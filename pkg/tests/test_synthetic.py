import pytest

from topicfilter.corpus import RELEVANT, write_tsv_documents
from topicfilter.errors import ConfigError
from topicfilter.synthetic import SyntheticTopicModel, generate_corpus, train_test_models

SMALL = SyntheticTopicModel(
    n_relevant=8, n_irrelevant=40, background_vocab=50, mean_length=30, seed=3
)


class TestSyntheticModel:
    def test_rate_validation(self):
        with pytest.raises(ConfigError):
            SyntheticTopicModel(relevant_rate=1.5)
        with pytest.raises(ConfigError):
            SyntheticTopicModel(irrelevant_rate=-0.1)
        with pytest.raises(ConfigError):
            SyntheticTopicModel(background_vocab=0)
        with pytest.raises(ConfigError):
            SyntheticTopicModel(zipf_exponent=0.0)

    def test_planted_term_names(self):
        assert SyntheticTopicModel(n_planted=3).planted_terms == (
            "planted00",
            "planted01",
            "planted02",
        )


class TestGeneration:
    def test_counts_and_judgments(self):
        model = SyntheticTopicModel(
            n_relevant=50, n_irrelevant=5000, background_vocab=100, mean_length=20, seed=1
        )
        docs, judgments = generate_corpus(model)
        assert len(docs) == 5050
        assert len(judgments) == 50
        assert all(j.label == RELEVANT for j in judgments)
        assert all(j.topic_id == model.topic_id for j in judgments)

    def test_same_seed_identical_bytes(self, tmp_path):
        a, _ = generate_corpus(SMALL)
        b, _ = generate_corpus(SMALL)
        pa, pb = tmp_path / "a.tsv", tmp_path / "b.tsv"
        write_tsv_documents(a, pa)
        write_tsv_documents(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_different_seed_differs(self):
        from dataclasses import replace

        a, _ = generate_corpus(SMALL)
        b, _ = generate_corpus(replace(SMALL, seed=SMALL.seed + 1))
        assert [d.raw_text for d in a] != [d.raw_text for d in b]

    def test_zero_rates_plant_nothing(self):
        from dataclasses import replace

        model = replace(SMALL, relevant_rate=0.0, irrelevant_rate=0.0)
        docs, _ = generate_corpus(model)
        planted = set(model.planted_terms)
        assert all(not (planted & set(d.tf)) for d in docs)

    def test_relevant_docs_carry_coherent_subset(self):
        docs, judgments = generate_corpus(SMALL)
        relevant_ids = {j.doc_id for j in judgments}
        planted = set(SMALL.planted_terms)
        expected = round(SMALL.n_planted * SMALL.relevant_rate)
        for d in docs:
            hits = len(planted & set(d.tf))
            if d.doc_id in relevant_ids:
                assert hits == expected
            else:
                assert hits <= 3  # incidental mentions only

    def test_doc_lengths_respect_minimum(self):
        docs, _ = generate_corpus(SMALL)
        assert all(d.length >= SMALL.min_length for d in docs)


class TestTrainTestModels:
    def test_disjoint_ids_and_shared_terms(self):
        train_model, test_model = train_test_models(SMALL, test_relevant=4, test_irrelevant=10)
        train_docs, _ = generate_corpus(train_model)
        test_docs, _ = generate_corpus(test_model)
        assert not ({d.doc_id for d in train_docs} & {d.doc_id for d in test_docs})
        assert train_model.planted_terms == test_model.planted_terms
        assert test_model.n_relevant == 4
        assert test_model.n_irrelevant == 10
