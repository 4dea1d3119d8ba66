"""AMR toolkit: PENMAN graphs, linearization, decoding, Smatch, metrics."""

__version__ = "0.1.0"

from .corpus import (
    CorpusEntry,
    CorpusError,
    corpus_stats,
    read_corpus,
    write_corpus,
)
from .decoding import (
    DecodeConfig,
    DistributionError,
    Hypothesis,
    JointScore,
    TokenDistributionProvider,
    VocabularyError,
    decode,
    decode_beam,
    decode_greedy,
    decode_nucleus,
    score_joint,
    score_sequence,
    strip_trailing_repetition,
)
from .graph import (
    AmrError,
    AmrGraph,
    GraphInvariantError,
    PenmanSyntaxError,
    graph_equal,
    parse_penman,
    serialize_penman,
    validate,
)
from .linearize import (
    LinearizedAmr,
    Representation,
    SpecialSymbolMap,
    assemble_joint,
    extract_arc_vocabulary,
    linearize,
)
from .metrics import (
    MetricScore,
    SentencePair,
    chrf_pp,
    corpus_bleu,
    normalize_output,
    pairs_from_texts,
)
from .pipeline import ConfigError, RunConfig, run_pipeline
from .providers import (
    END_TOKEN,
    MemorizingProvider,
    NgramProvider,
    TableProvider,
    UniformProvider,
)
from .rescore import (
    BackendTransportError,
    CandidateSet,
    FailingParserBackend,
    LookupParserBackend,
    ParserBackend,
    RescoreResult,
    SubprocessParserBackend,
    rescore,
    rescore_corpus,
)
from .smatch import (
    SmatchScore,
    TripleSet,
    extract_triples,
    matched_count,
    micro_average,
    smatch_bruteforce,
    smatch_hillclimb,
)
