"""Two-step discriminant term selection.

Step 1 mines topic-specific candidate terms by comparing each relevant
document's term frequencies against the reference-collection frequencies.
Step 2 ranks the candidates by greedy orthogonal least squares (modified
Gram-Schmidt deflation of a design matrix) and truncates the ranking where a
random Gaussian probe would start to compete with the real terms.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .corpus import CorpusStats, Document, StopList
from .errors import (
    ConfigError,
    DegenerateVectorError,
    EmptyCandidatesError,
    EmptyCollectionError,
    EmptyVocabularyWarning,
    ParseError,
)
from .validation import check_matrix, check_signed_targets, check_vector

# Columns whose residual norm falls below this fraction of the largest
# original column norm are treated as fully explained (degenerate).
DEGENERACY_TOL = 1e-10

DEFAULT_RISK = 0.05
DEFAULT_MIN_SUPPORT = 2
DEFAULT_MAX_CANDIDATES = 150
DEFAULT_PROBES = 100_000

PROBE_METHODS = ("analytic", "monte-carlo")


class Candidate(NamedTuple):
    """A candidate term with the number of relevant documents backing it."""

    term: str
    support: int


def rank_specific_terms(
    relevant_docs: Iterable[Document],
    stats: CorpusStats,
    stoplist: StopList | None = None,
    min_support: int = DEFAULT_MIN_SUPPORT,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> list[Candidate]:
    """Mine candidate terms from the relevant documents of one topic.

    Within each relevant document, distinct terms are sorted by descending
    ``tf_doc / corpus_tf`` (terms missing from the reference statistics count
    as corpus frequency 1, which makes off-collection words look rare, as the
    stop list is meant to mitigate) and the top ``ceil(U/2)`` of ``U`` distinct
    terms are kept.  Kept terms are merged across documents with support
    counts, stop-list terms are removed, terms below ``min_support`` are
    dropped, and the result is sorted by descending support (ties broken
    lexicographically) and truncated to ``max_candidates``.
    """
    docs = list(relevant_docs)
    if not docs:
        raise EmptyCollectionError("candidate mining needs at least one relevant document")
    if min_support < 1:
        raise ConfigError(f"min_support must be >= 1, got {min_support}")
    if max_candidates < 1:
        raise ConfigError(f"max_candidates must be >= 1, got {max_candidates}")

    support: Counter[str] = Counter()
    corpus_tf = stats.corpus_tf
    for doc in docs:
        if not doc.tf:
            continue
        ranked = sorted(
            doc.tf.items(),
            key=lambda item: (-(item[1] / corpus_tf.get(item[0], 1)), item[0]),
        )
        kept = ranked[: math.ceil(len(ranked) / 2)]
        support.update(term for term, _ in kept)

    stop = stoplist if stoplist is not None else StopList(frozenset())
    candidates = [
        Candidate(term, count)
        for term, count in support.items()
        if count >= min_support and term not in stop
    ]
    if not candidates:
        raise EmptyCandidatesError(
            "no candidate survived the stop list and support filters"
        )
    candidates.sort(key=lambda c: (-c.support, c.term))
    return candidates[:max_candidates]


@dataclass(frozen=True)
class DesignMatrix:
    """Raw term-count matrix over a labeled training set.

    ``X[n, k]`` is the count of term ``k`` in document ``n``; ``y[n]`` is the
    desired output, +1 for relevant and -1 for irrelevant.
    """

    X: np.ndarray
    y: np.ndarray
    term_names: tuple[str, ...]

    def __post_init__(self):
        X = check_matrix(self.X, "X")
        y = check_signed_targets(self.y, X.shape[0])
        if len(self.term_names) != X.shape[1]:
            raise ValueError(
                f"{len(self.term_names)} term names for {X.shape[1]} columns"
            )
        if (X < 0).any() or (X != np.floor(X)).any():
            raise ValueError("design matrix entries must be nonnegative integer counts")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "term_names", tuple(self.term_names))

    @property
    def n_examples(self) -> int:
        return self.X.shape[0]

    @property
    def n_terms(self) -> int:
        return self.X.shape[1]


def build_design_matrix(
    labeled_docs: Sequence[tuple[Document, int]],
    candidates: Sequence,
) -> DesignMatrix:
    """Assemble the design matrix for a labeled training set.

    ``candidates`` may hold Candidate tuples or bare term strings.  Row order
    follows the input order; a candidate absent from every document yields an
    all-zero column, which the ranking step pushes to the end.
    """
    terms = tuple(getattr(c, "term", c) for c in candidates)
    if not terms:
        raise EmptyCandidatesError("cannot build a design matrix without candidate terms")
    if not labeled_docs:
        raise EmptyCollectionError("cannot build a design matrix without documents")
    X = np.zeros((len(labeled_docs), len(terms)))
    y = np.empty(len(labeled_docs))
    for n, (doc, label) in enumerate(labeled_docs):
        y[n] = label
        tf = doc.tf
        for k, term in enumerate(terms):
            X[n, k] = tf.get(term, 0)
    return DesignMatrix(X=X, y=y, term_names=terms)


def cos2(x, y, tol: float = 0.0) -> float:
    """Squared cosine of the angle between two vectors.

    Symmetric and invariant to positive rescaling of either argument; the
    result is clipped into [0, 1] against rounding.  A vector whose norm is
    at or below ``tol`` has no direction and raises DegenerateVectorError
    (callers conventionally treat that case as cos2 = 0).
    """
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    xx = float(x @ x)
    yy = float(y @ y)
    if math.sqrt(xx) <= tol or math.sqrt(yy) <= tol:
        raise DegenerateVectorError("cos2 of a vector with (near-)zero norm")
    xy = float(x @ y)
    return min(xy * xy / (xx * yy), 1.0)


class RankedColumn(NamedTuple):
    """One ranking step: original column index, its squared cosine against the
    residual output at selection time, and the residual dimension N - k."""

    index: int
    cos2: float
    residual_dim: int


def _deflation_steps(
    X: np.ndarray, y: np.ndarray, active: np.ndarray, col_thr: float, out_thr: float
) -> Iterator[tuple[int, float]]:
    """Drive modified Gram-Schmidt selection on ``X`` and ``y`` in place.

    Yields ``(index, cos2)`` for each selected column.  After each selection
    the remaining active columns and the output are deflated along the
    selected residual direction; columns whose residual norm drops to
    ``col_thr`` are deactivated.  Stops early when the residual output norm
    reaches ``out_thr`` (output fully explained).

    The selected column itself is never modified, so ``X[:, index]`` remains
    the residual direction used for the deflation.
    """
    n_rows = X.shape[0]
    iteration = 0
    while active.any():
        if np.linalg.norm(y) <= out_thr:
            return
        cols = np.flatnonzero(active)
        if n_rows - iteration == 1:
            # One-dimensional residual space: every surviving column is
            # parallel to the residual output, so cos2 is exactly 1 and the
            # tie rule (lowest original index) decides analytically.
            pick = int(cols[0])
            score = 1.0
            uu = float(X[:, pick] @ X[:, pick])
        else:
            sub = X[:, cols]
            yy = float(y @ y)
            proj = y @ sub
            colsq = np.einsum("ij,ij->j", sub, sub)
            scores = proj * proj / (colsq * yy)
            k = int(np.argmax(scores))  # ties resolve to the lowest original index
            pick = int(cols[k])
            score = min(float(scores[k]), 1.0)
            uu = float(colsq[k])
        active[pick] = False
        yield pick, score
        u = X[:, pick]
        rest = np.flatnonzero(active)
        if rest.size:
            coef = (u @ X[:, rest]) / uu
            X[:, rest] -= np.outer(u, coef)
            rest_norms = np.linalg.norm(X[:, rest], axis=0)
            active[rest[rest_norms <= col_thr]] = False
        y -= (float(y @ u) / uu) * u
        iteration += 1


def gram_schmidt_rank(X, y, *, tol: float = DEGENERACY_TOL) -> list[RankedColumn]:
    """Rank all columns of ``X`` by greedy orthogonal least squares.

    Iteration k selects the active column with the largest squared cosine
    against the current residual output (ties broken by the lower original
    index), records ``residual_dim = N - k``, then deflates every remaining
    column and the output along the selected residual direction.  Columns
    whose residual norm falls below ``tol`` times the largest original column
    norm never compete again and are appended to the end of the ranking with
    cos2 = 0, in original column order; if the residual output is exhausted
    first, the still-active columns are appended the same way just before
    them.
    """
    Xw = check_matrix(X, "X").copy()
    yw = check_vector(y, "y").copy()
    n, q = Xw.shape
    if yw.shape[0] != n:
        raise ValueError(f"output vector has {yw.shape[0]} entries for {n} rows")

    norms = np.linalg.norm(Xw, axis=0)
    col_thr = tol * float(norms.max(initial=0.0))
    out_thr = tol * float(np.linalg.norm(yw))
    active = norms > col_thr

    ranked = [
        RankedColumn(pick, c, n - position)
        for position, (pick, c) in enumerate(_deflation_steps(Xw, yw, active, col_thr, out_thr))
    ]
    picked = {rc.index for rc in ranked}
    exhausted = [j for j in range(q) if active[j] and j not in picked]
    degenerate = [j for j in range(q) if not active[j] and j not in picked]
    for j in exhausted + degenerate:
        ranked.append(RankedColumn(j, 0.0, n - len(ranked)))
    return ranked


def probe_exceedance(c: float, d: int) -> float:
    """P(cos2(probe, y) >= c) for a probe with iid standard-normal components.

    In dimension ``d`` the squared cosine between an isotropic Gaussian vector
    and any fixed direction follows a Beta(1/2, (d-1)/2) law, so the
    exceedance probability is one minus its regularized incomplete-beta CDF.
    """
    if d < 2:
        raise ValueError(f"probe needs dimension >= 2, got {d}")
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"cos2 must lie in [0, 1], got {c}")
    return float(1.0 - special.betainc(0.5, 0.5 * (d - 1), c))


def probe_exceedance_mc(
    c: float, d: int, *, n_probes: int = DEFAULT_PROBES, rng=None
) -> float:
    """Monte-Carlo estimate of :func:`probe_exceedance` from seeded probes.

    Draws ``n_probes`` Gaussian vectors and counts how often their squared
    cosine against a fixed axis reaches ``c``.  Config-selectable alternative
    to the closed form; chunked so large dimensions stay within memory.
    """
    if d < 2:
        raise ValueError(f"probe needs dimension >= 2, got {d}")
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"cos2 must lie in [0, 1], got {c}")
    if n_probes < 1:
        raise ValueError("n_probes must be positive")
    rng = np.random.default_rng(rng)
    hits = 0
    remaining = n_probes
    chunk = max(1, 8_000_000 // d)
    while remaining:
        m = min(chunk, remaining)
        z = rng.standard_normal((m, d))
        sq = np.einsum("ij,ij->i", z, z)
        hits += int(np.count_nonzero(z[:, 0] ** 2 >= c * sq))
        remaining -= m
    return hits / n_probes


def cumulative_probe_risk(probe_ps: Iterable[float]) -> list[float]:
    """Prefix probabilities that a probe would beat at least one ranked term:
    ``1 - prod_{k<=n} (1 - p_k)``."""
    out = []
    keep = 1.0
    for p in probe_ps:
        keep *= 1.0 - p
        out.append(1.0 - keep)
    return out


def probe_cut_index(cumulative: Sequence[float], risk: float) -> int:
    """Largest n whose cumulative probe risk stays within ``risk`` (0 if none)."""
    cut = 0
    for i, value in enumerate(cumulative):
        if value <= risk:
            cut = i + 1
    return cut


class RankedTerm(NamedTuple):
    term: str
    cos2: float
    residual_dim: int
    probe_p: float
    cumulative_p: float


@dataclass(frozen=True)
class SelectionResult:
    """Full ranking of one topic's candidates plus the probe cut.

    ``entries`` covers every candidate; the vocabulary actually used is the
    first ``cut_index`` terms.
    """

    risk: float
    entries: tuple[RankedTerm, ...]
    cut_index: int
    topic_id: int | None = None

    @property
    def selected_terms(self) -> list[str]:
        return [e.term for e in self.entries[: self.cut_index]]


def _probe_sequence(
    ranked: Sequence[RankedColumn], probe: str, n_probes: int, rng
) -> list[float]:
    """Per-iteration probability that a random probe beats the selected term.

    Below residual dimension 2 any probe is parallel to the (at most
    one-dimensional) residual space, so the probability is pinned to 1.
    """
    if probe not in PROBE_METHODS:
        raise ConfigError(f"probe must be one of {PROBE_METHODS}, got {probe!r}")
    if probe == "monte-carlo":
        rng = np.random.default_rng(rng)
    ps = []
    for rc in ranked:
        if rc.residual_dim < 2:
            ps.append(1.0)
        elif probe == "analytic":
            ps.append(probe_exceedance(rc.cos2, rc.residual_dim))
        else:
            ps.append(
                probe_exceedance_mc(rc.cos2, rc.residual_dim, n_probes=n_probes, rng=rng)
            )
    return ps


def select_terms(
    matrix: DesignMatrix,
    risk: float = DEFAULT_RISK,
    *,
    min_terms: int | None = None,
    max_terms: int | None = None,
    probe: str = "analytic",
    n_probes: int = DEFAULT_PROBES,
    rng=None,
    topic_id: int | None = None,
    tol: float = DEGENERACY_TOL,
) -> SelectionResult:
    """Rank a topic's candidates and cut the ranking at the accepted risk.

    The cut keeps the largest head of the ranking whose cumulative probability
    of containing a term no better than a random probe stays within ``risk``.
    Optional ``min_terms``/``max_terms`` clamps override the cut.  A cut of
    zero raises EmptyVocabularyWarning rather than an error so callers can
    decide how to proceed.
    """
    if not 0.0 < risk < 1.0:
        raise ConfigError(f"risk must lie strictly between 0 and 1, got {risk}")
    if min_terms is not None and min_terms < 1:
        raise ConfigError("min_terms must be >= 1 when given")
    if max_terms is not None and max_terms < 1:
        raise ConfigError("max_terms must be >= 1 when given")
    ranked = gram_schmidt_rank(matrix.X, matrix.y, tol=tol)
    ps = _probe_sequence(ranked, probe, n_probes, rng)
    cums = cumulative_probe_risk(ps)
    entries = tuple(
        RankedTerm(matrix.term_names[rc.index], rc.cos2, rc.residual_dim, p, cum)
        for rc, p, cum in zip(ranked, ps, cums)
    )
    cut = probe_cut_index(cums, risk)
    if max_terms is not None:
        cut = min(cut, max_terms)
    if min_terms is not None:
        cut = max(cut, min(min_terms, len(entries)))
    if cut == 0:
        warnings.warn(
            "probe cut kept zero terms; consider a min_terms clamp",
            EmptyVocabularyWarning,
            stacklevel=2,
        )
    return SelectionResult(risk=risk, entries=entries, cut_index=cut, topic_id=topic_id)


def format_selection(result: SelectionResult) -> str:
    """Serialize a SelectionResult: a header line, then one line per term."""
    topic = "-" if result.topic_id is None else str(result.topic_id)
    lines = [f"topic\t{topic}\trisk\t{result.risk!r}\tcut_index\t{result.cut_index}"]
    for rank, e in enumerate(result.entries, start=1):
        lines.append(
            f"{rank}\t{e.term}\t{e.cos2!r}\t{e.residual_dim}\t{e.probe_p!r}\t{e.cumulative_p!r}"
        )
    return "\n".join(lines) + "\n"


def write_selection(result: SelectionResult, path) -> None:
    Path(path).write_text(format_selection(result), encoding="utf-8")


def read_selection(path) -> SelectionResult:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty selection file", source=path)
    header = lines[0].split("\t")
    if len(header) != 6 or header[0] != "topic" or header[2] != "risk" or header[4] != "cut_index":
        raise ParseError("malformed selection header", source=path, line=1)
    topic_id = None if header[1] == "-" else int(header[1])
    try:
        risk = float(header[3])
        cut_index = int(header[5])
    except ValueError as exc:
        raise ParseError(f"malformed selection header: {exc}", source=path, line=1) from exc
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 6:
            raise ParseError("expected 6 tab-separated fields", source=path, line=lineno)
        try:
            entries.append(
                RankedTerm(
                    term=fields[1],
                    cos2=float(fields[2]),
                    residual_dim=int(fields[3]),
                    probe_p=float(fields[4]),
                    cumulative_p=float(fields[5]),
                )
            )
        except ValueError as exc:
            raise ParseError(f"malformed selection row: {exc}", source=path, line=lineno) from exc
    return SelectionResult(risk=risk, entries=tuple(entries), cut_index=cut_index, topic_id=topic_id)


class GramSchmidtSelector(TransformerMixin, BaseEstimator):
    """Greedy orthogonal feature selection with a random-probe stopping rule.

    Ranks the columns of ``X`` by how much of the target they explain
    (squared cosine against the progressively deflated output) and keeps the
    head of the ranking whose cumulative chance of being outscored by a
    random Gaussian probe stays within ``risk``.

    Parameters
    ----------
    risk : accepted probability of keeping a feature no better than a random
        probe (typical values 0.01 or 0.05).
    min_terms, max_terms : optional hard clamps overriding the probe cut.
    probe : "analytic" for the closed-form probe distribution,
        "monte-carlo" for a seeded sampled estimate.
    n_probes : sample count for the Monte-Carlo probe.
    random_state : seed for the Monte-Carlo probe.
    tol : relative norm threshold below which a residual column is degenerate.

    Attributes
    ----------
    ranking_ : original column indices in selection order.
    cos2_, residual_dims_, probe_p_, cumulative_p_ : per-iteration values
        aligned with ``ranking_``.
    cut_index_ : number of features kept.
    support_ : boolean mask of kept features in original column order.
    """

    def __init__(
        self,
        risk: float = DEFAULT_RISK,
        *,
        min_terms: int | None = None,
        max_terms: int | None = None,
        probe: str = "analytic",
        n_probes: int = DEFAULT_PROBES,
        random_state=None,
        tol: float = DEGENERACY_TOL,
    ):
        self.risk = risk
        self.min_terms = min_terms
        self.max_terms = max_terms
        self.probe = probe
        self.n_probes = n_probes
        self.random_state = random_state
        self.tol = tol

    def fit(self, X, y):
        if not 0.0 < self.risk < 1.0:
            raise ConfigError(f"risk must lie strictly between 0 and 1, got {self.risk}")
        X = check_matrix(X, "X")
        y = check_signed_targets(y, X.shape[0])
        ranked = gram_schmidt_rank(X, y, tol=self.tol)
        ps = _probe_sequence(ranked, self.probe, self.n_probes, self.random_state)
        cums = cumulative_probe_risk(ps)
        cut = probe_cut_index(cums, self.risk)
        if self.max_terms is not None:
            cut = min(cut, self.max_terms)
        if self.min_terms is not None:
            cut = max(cut, min(self.min_terms, len(ranked)))
        if cut == 0:
            warnings.warn(
                "probe cut kept zero features; consider a min_terms clamp",
                EmptyVocabularyWarning,
                stacklevel=2,
            )
        self.n_features_in_ = X.shape[1]
        self.ranking_ = np.array([rc.index for rc in ranked], dtype=int)
        self.cos2_ = np.array([rc.cos2 for rc in ranked])
        self.residual_dims_ = np.array([rc.residual_dim for rc in ranked], dtype=int)
        self.probe_p_ = np.array(ps)
        self.cumulative_p_ = np.array(cums)
        self.cut_index_ = cut
        support = np.zeros(X.shape[1], dtype=bool)
        support[self.ranking_[:cut]] = True
        self.support_ = support
        return self

    def _check_fitted(self):
        if not hasattr(self, "support_"):
            raise NotFittedError(
                "this GramSchmidtSelector is not fitted yet; call fit(X, y) first"
            )

    def get_support(self, indices: bool = False):
        self._check_fitted()
        return np.flatnonzero(self.support_) if indices else self.support_.copy()

    def transform(self, X):
        self._check_fitted()
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected 2-D input with {self.n_features_in_} columns"
            )
        return X[:, self.support_]
