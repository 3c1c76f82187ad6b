from .corpus import Corpus, CorpusDoc, corpus_digest, ingest_corpus, load_corpus
from .index import (
    DEFAULT_B,
    DEFAULT_K1,
    DEFAULT_TOP_K,
    Bm25Index,
    RetrievalRequest,
    bm25_scores,
    build_index,
    formulate_query,
    load_index,
    retrieve,
    save_index,
    tokenize,
)
from .scoring import accumulate_scores, active_kernel

__all__ = [
    "Corpus",
    "CorpusDoc",
    "corpus_digest",
    "ingest_corpus",
    "load_corpus",
    "Bm25Index",
    "RetrievalRequest",
    "bm25_scores",
    "build_index",
    "formulate_query",
    "load_index",
    "retrieve",
    "save_index",
    "tokenize",
    "accumulate_scores",
    "active_kernel",
    "DEFAULT_K1",
    "DEFAULT_B",
    "DEFAULT_TOP_K",
]
