"""Per-topic document routing filters.

For each topic with judged examples the package selects a compact discriminant
vocabulary in two steps (frequency-ratio candidate mining, then Gram-Schmidt
orthogonal least squares with a random-probe stopping rule), trains a single
tanh-unit filter on encoded term frequencies, and emits ranked top-1000 run
files plus a full evaluation report.
"""

from .classifier import (
    TanhUnitClassifier,
    TopicFilter,
    TrainConfig,
    encode,
    encode_documents,
    load_filter,
    save_filter,
    tanh_unit,
    train_filter,
    train_unit,
    unit_gradient,
    unit_loss,
)
from .corpus import (
    JUDGED_IRRELEVANT,
    RELEVANT,
    CorpusStats,
    Document,
    Judgment,
    StopList,
    group_judgments,
    ingest_documents,
    load_documents,
    load_qrels,
    tokenize,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateVectorError,
    DivergenceError,
    DuplicateDocumentError,
    EmptyCandidatesError,
    EmptyCollectionError,
    EmptyVocabularyWarning,
    NoRelevantDocumentsError,
    NumericalError,
    ParseError,
    SingleClassError,
    TopicFilterError,
)
from .evaluation import (
    MetricsReport,
    RankedRun,
    TopicMetrics,
    aggregate_metrics,
    average_precision,
    evaluate_topic,
    interpolated_precision,
    precision_at_k,
    r_precision,
    rank_documents,
    read_run_file,
    write_run_file,
)
from .pipeline import (
    PipelineConfig,
    RunAllResult,
    TopicRunResult,
    build_config,
    build_training_set,
    run_all,
    run_topic,
)
from .selection import (
    Candidate,
    DesignMatrix,
    GramSchmidtSelector,
    SelectionResult,
    build_design_matrix,
    cos2,
    gram_schmidt_rank,
    probe_exceedance,
    probe_exceedance_mc,
    rank_specific_terms,
    select_terms,
)
from .synthetic import SyntheticTopicModel, generate_corpus, train_test_models

__version__ = "0.1.0"

__all__ = [
    "CorpusStats",
    "Document",
    "Judgment",
    "StopList",
    "RELEVANT",
    "JUDGED_IRRELEVANT",
    "tokenize",
    "ingest_documents",
    "load_documents",
    "load_qrels",
    "group_judgments",
    "Candidate",
    "DesignMatrix",
    "GramSchmidtSelector",
    "SelectionResult",
    "build_design_matrix",
    "cos2",
    "gram_schmidt_rank",
    "probe_exceedance",
    "probe_exceedance_mc",
    "rank_specific_terms",
    "select_terms",
    "TanhUnitClassifier",
    "TopicFilter",
    "TrainConfig",
    "encode",
    "encode_documents",
    "tanh_unit",
    "unit_loss",
    "unit_gradient",
    "train_unit",
    "train_filter",
    "save_filter",
    "load_filter",
    "RankedRun",
    "TopicMetrics",
    "MetricsReport",
    "rank_documents",
    "average_precision",
    "r_precision",
    "precision_at_k",
    "interpolated_precision",
    "evaluate_topic",
    "aggregate_metrics",
    "read_run_file",
    "write_run_file",
    "PipelineConfig",
    "TopicRunResult",
    "RunAllResult",
    "build_config",
    "build_training_set",
    "run_topic",
    "run_all",
    "SyntheticTopicModel",
    "generate_corpus",
    "train_test_models",
    "TopicFilterError",
    "ConfigError",
    "DataError",
    "ParseError",
    "DuplicateDocumentError",
    "EmptyCollectionError",
    "EmptyCandidatesError",
    "SingleClassError",
    "NoRelevantDocumentsError",
    "NumericalError",
    "DegenerateVectorError",
    "DivergenceError",
    "EmptyVocabularyWarning",
    "__version__",
]
