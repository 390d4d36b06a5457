"""Seeded synthetic corpora with planted discriminant terms.

Documents draw background tokens from a Zipf-weighted vocabulary.  Relevant
documents are topically coherent: each contains a fixed-size subset of the
planted terms, sized so every planted term occurs in a ``relevant_rate``
fraction of relevant documents.  Irrelevant documents mention each planted
term independently at the (much lower) ``irrelevant_rate``.  Everything is
driven by one generator seed, so a model produces identical bytes on every
run.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .corpus import RELEVANT, Document, Judgment
from .errors import ConfigError


@dataclass(frozen=True)
class SyntheticTopicModel:
    """Parameters of one synthetic topic corpus."""

    topic_id: int = 1
    n_planted: int = 10
    relevant_rate: float = 0.3
    irrelevant_rate: float = 0.01
    background_vocab: int = 2000
    n_relevant: int = 60
    n_irrelevant: int = 3000
    mean_length: int = 120
    min_length: int = 30
    # A flat exponent keeps every per-document term count small, so encoded
    # features stay bounded and the training problem is well conditioned.
    zipf_exponent: float = 0.7
    max_planted_repeats: int = 3
    seed: int = 0
    doc_prefix: str = "SYN"

    def __post_init__(self):
        if not 0.0 <= self.relevant_rate <= 1.0:
            raise ConfigError(f"relevant_rate must lie in [0, 1], got {self.relevant_rate}")
        if not 0.0 <= self.irrelevant_rate <= 1.0:
            raise ConfigError(f"irrelevant_rate must lie in [0, 1], got {self.irrelevant_rate}")
        if self.background_vocab < 1:
            raise ConfigError("background_vocab must be >= 1")
        if self.n_planted < 0 or self.n_relevant < 0 or self.n_irrelevant < 0:
            raise ConfigError("counts must be >= 0")
        if self.mean_length < 1 or self.min_length < 0:
            raise ConfigError("document lengths must be positive")
        if self.zipf_exponent <= 0:
            raise ConfigError("zipf_exponent must be positive")
        if self.max_planted_repeats < 1:
            raise ConfigError("max_planted_repeats must be >= 1")

    @property
    def planted_terms(self) -> tuple[str, ...]:
        return tuple(f"planted{i:02d}" for i in range(self.n_planted))


def _background_probs(model: SyntheticTopicModel) -> np.ndarray:
    ranks = np.arange(1, model.background_vocab + 1, dtype=float)
    weights = ranks ** -model.zipf_exponent
    return weights / weights.sum()


def _planted_subset(rng: np.random.Generator, model: SyntheticTopicModel, relevant: bool):
    """Which planted terms one document contains.

    Relevant documents carry a coherent topical subset of fixed size
    ``round(n_planted * relevant_rate)``, chosen uniformly, so each planted
    term still occurs in a ``relevant_rate`` fraction of relevant documents.
    Irrelevant documents mention each planted term independently.
    """
    terms = model.planted_terms
    if relevant:
        k = round(model.n_planted * model.relevant_rate)
        if k == 0:
            return []
        return [terms[i] for i in sorted(rng.choice(model.n_planted, size=k, replace=False))]
    return [t for t in terms if rng.random() < model.irrelevant_rate]


def _make_document(
    rng: np.random.Generator,
    model: SyntheticTopicModel,
    vocab: np.ndarray,
    probs: np.ndarray,
    doc_id: str,
    relevant: bool,
) -> Document:
    length = max(model.min_length, int(rng.poisson(model.mean_length)))
    tokens = list(vocab[rng.choice(model.background_vocab, size=length, p=probs)])
    for term in _planted_subset(rng, model, relevant):
        tokens.extend([term] * int(rng.integers(1, model.max_planted_repeats + 1)))
    order = rng.permutation(len(tokens))
    text = " ".join(tokens[i] for i in order)
    return Document.from_text(doc_id, text)


def generate_corpus(model: SyntheticTopicModel) -> tuple[list[Document], list[Judgment]]:
    """Generate one corpus and the judgments for its relevant documents.

    Only relevant documents appear in the judgments; the irrelevant ones stay
    unjudged so they form the negative sampling pool downstream.
    """
    rng = np.random.default_rng(model.seed)
    vocab = np.array([f"w{i:04d}" for i in range(model.background_vocab)])
    probs = _background_probs(model)
    docs = []
    judgments = []
    for i in range(model.n_relevant):
        doc = _make_document(
            rng, model, vocab, probs, f"{model.doc_prefix}-R{i:05d}", relevant=True
        )
        docs.append(doc)
        judgments.append(Judgment(model.topic_id, doc.doc_id, RELEVANT))
    for i in range(model.n_irrelevant):
        docs.append(
            _make_document(
                rng, model, vocab, probs, f"{model.doc_prefix}-N{i:05d}", relevant=False
            )
        )
    return docs, judgments


def train_test_models(
    base: SyntheticTopicModel,
    *,
    test_relevant: int = 20,
    test_irrelevant: int = 2000,
) -> tuple[SyntheticTopicModel, SyntheticTopicModel]:
    """Derive disjoint train/test corpus models from one base model.

    The test split reuses the planted terms and background distribution but
    draws from an offset seed and a distinct doc_id prefix, so the two
    collections never share a document.
    """
    train = replace(base, doc_prefix=f"{base.doc_prefix}TRN")
    test = replace(
        base,
        n_relevant=test_relevant,
        n_irrelevant=test_irrelevant,
        seed=base.seed + 104729,  # fixed offset keeps the splits independent
        doc_prefix=f"{base.doc_prefix}TST",
    )
    return train, test
