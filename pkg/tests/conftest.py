from __future__ import annotations

import numpy as np
import pytest

from topicfilter.corpus import Document


@pytest.fixture
def doc():
    """Factory for quick test documents."""

    def make(doc_id: str, text: str) -> Document:
        return Document.from_text(doc_id, text)

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_design(rng, n=None, q=None, low=0, high=5):
    """Random integer design matrix with a two-class +/-1 output."""
    n = int(n if n is not None else rng.integers(4, 21))
    q = int(q if q is not None else rng.integers(2, 9))
    X = rng.integers(low, high + 1, size=(n, q)).astype(float)
    while True:
        y = rng.choice([-1.0, 1.0], size=n)
        if y.min() != y.max():
            return X, y
