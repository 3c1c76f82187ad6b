"""BM25 inverted index: build, query formulation, top-k retrieval, persistence.

Scoring uses the Okapi form with a non-negative IDF,
``idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))``, so any matching term
contributes a positive score and zero-score documents are exactly the
non-matching ones. Query tokens are scored with multiplicity.
"""

from __future__ import annotations

import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import EmptyCorpusError, EmptyQueryError, IndexFormatError
from ..memory import Passage, WorkingMemory
from .corpus import Corpus, corpus_digest
from .scoring import accumulate_scores

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75
DEFAULT_TOP_K = 5

INDEX_SCHEMA = "ace-bm25/1"


def tokenize(text: str) -> list[str]:
    """Casefold, replace non-alphanumeric characters with spaces, split."""
    cleaned = "".join(ch if ch.isalnum() else " " for ch in text.casefold())
    return cleaned.split()


@dataclass(frozen=True)
class RetrievalRequest:
    query: str
    top_k: int = DEFAULT_TOP_K

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")


@dataclass
class Bm25Index:
    postings: dict[str, tuple[np.ndarray, np.ndarray]]  # term -> (doc ordinals, term frequencies)
    idf: dict[str, float]
    doc_lengths: np.ndarray
    avg_doc_length: float
    doc_norm: np.ndarray  # 1 - b + b * len/avg_len, precomputed per doc
    k1: float
    b: float
    corpus_digest: str = ""

    @property
    def doc_count(self) -> int:
        return int(self.doc_lengths.shape[0])


def build_index(corpus: Corpus, k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> Bm25Index:
    if corpus.doc_count == 0:
        raise EmptyCorpusError("cannot index an empty corpus")
    if k1 <= 0:
        raise ValueError("k1 must be positive")
    if not 0.0 <= b <= 1.0:
        raise ValueError("b must lie in [0, 1]")

    doc_lengths = np.zeros(corpus.doc_count, dtype=np.int64)
    raw_postings: dict[str, list[tuple[int, int]]] = {}
    for ordinal, doc in enumerate(corpus.docs):
        terms = tokenize(f"{doc.title} {doc.text}")
        doc_lengths[ordinal] = len(terms)
        for term, tf in Counter(terms).items():
            raw_postings.setdefault(term, []).append((ordinal, tf))

    n_docs = corpus.doc_count
    postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    idf: dict[str, float] = {}
    for term, entries in raw_postings.items():
        ordinals = np.array([e[0] for e in entries], dtype=np.int64)
        tfs = np.array([e[1] for e in entries], dtype=np.float64)
        postings[term] = (ordinals, tfs)
        df = len(entries)
        idf[term] = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))

    avg_len = float(doc_lengths.mean())
    if avg_len > 0:
        doc_norm = 1.0 - b + b * doc_lengths.astype(np.float64) / avg_len
    else:
        doc_norm = np.ones(n_docs, dtype=np.float64)
    return Bm25Index(
        postings=postings,
        idf=idf,
        doc_lengths=doc_lengths,
        avg_doc_length=avg_len,
        doc_norm=doc_norm,
        k1=k1,
        b=b,
        corpus_digest=corpus_digest(corpus),
    )


def bm25_scores(index: Bm25Index, terms: Sequence[str], impl: str | None = None) -> np.ndarray:
    """Score every document against the term sequence (with multiplicity)."""
    scores = np.zeros(index.doc_count, dtype=np.float64)
    ord_parts: list[np.ndarray] = []
    tf_parts: list[np.ndarray] = []
    idf_parts: list[np.ndarray] = []
    for term in terms:
        entry = index.postings.get(term)
        if entry is None:
            continue
        ordinals, tfs = entry
        ord_parts.append(ordinals)
        tf_parts.append(tfs)
        idf_parts.append(np.full(ordinals.shape[0], index.idf[term], dtype=np.float64))
    if not ord_parts:
        return scores
    accumulate_scores(
        scores,
        np.concatenate(ord_parts),
        np.concatenate(tf_parts),
        np.concatenate(idf_parts),
        index.doc_norm,
        index.k1,
        impl=impl,
    )
    return scores


def retrieve(
    index: Bm25Index, corpus: Corpus, request: RetrievalRequest, impl: str | None = None
) -> list[Passage]:
    """Top-k passages by score, ties broken by ascending document ordinal.

    Documents with zero score (no query term present) are never returned.
    """
    if index.doc_count != corpus.doc_count:
        raise ValueError("index was not built over this corpus")
    terms = tokenize(request.query)
    if not terms:
        raise EmptyQueryError(f"query {request.query!r} tokenized to nothing")
    scores = bm25_scores(index, terms, impl=impl)
    # stable sort on negated scores keeps ascending ordinal within ties
    order = np.argsort(-scores, kind="stable")
    passages: list[Passage] = []
    for ordinal in order[: request.top_k]:
        score = float(scores[ordinal])
        if score <= 0.0:
            break
        doc = corpus[int(ordinal)]
        passages.append(Passage(doc_id=doc.doc_id, title=doc.title, text=doc.text, score=score))
    return passages


def formulate_query(memory: WorkingMemory, question: str) -> str:
    """Search text for a retrieval round: the question, extended by the most
    recent sub-query when the memory holds any thought."""
    memory.question_text()
    thought = memory.latest_thought()
    if thought is None:
        return question
    return f"{question} {thought.sub_query}"


def save_index(index: Bm25Index, path: str | Path) -> None:
    """Persist the index as a versioned .npz payload (no pickling)."""
    vocab = list(index.postings.keys())
    offsets = np.zeros(len(vocab) + 1, dtype=np.int64)
    for i, term in enumerate(vocab):
        offsets[i + 1] = offsets[i] + index.postings[term][0].shape[0]
    flat_ordinals = (
        np.concatenate([index.postings[t][0] for t in vocab]) if vocab else np.zeros(0, dtype=np.int64)
    )
    flat_tfs = (
        np.concatenate([index.postings[t][1] for t in vocab]) if vocab else np.zeros(0, dtype=np.float64)
    )
    meta = {
        "schema": INDEX_SCHEMA,
        "k1": index.k1,
        "b": index.b,
        "avg_doc_length": index.avg_doc_length,
        "corpus_digest": index.corpus_digest,
        "vocab": vocab,
    }
    with open(path, "wb") as handle:
        np.savez_compressed(
            handle,
            meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
            offsets=offsets,
            ordinals=flat_ordinals,
            tfs=flat_tfs,
            doc_lengths=index.doc_lengths,
        )


def load_index(path: str | Path) -> Bm25Index:
    with open(path, "rb") as handle:
        payload = np.load(io.BytesIO(handle.read()))
    try:
        meta = json.loads(bytes(payload["meta"]).decode("utf-8"))
    except (KeyError, ValueError) as exc:
        raise IndexFormatError(f"not an index file: {path}") from exc
    if meta.get("schema") != INDEX_SCHEMA:
        raise IndexFormatError(f"unsupported index schema {meta.get('schema')!r}")
    vocab = meta["vocab"]
    offsets = payload["offsets"]
    flat_ordinals = payload["ordinals"]
    flat_tfs = payload["tfs"]
    doc_lengths = payload["doc_lengths"]
    postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    idf: dict[str, float] = {}
    n_docs = int(doc_lengths.shape[0])
    for i, term in enumerate(vocab):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        postings[term] = (flat_ordinals[lo:hi], flat_tfs[lo:hi])
        df = hi - lo
        idf[term] = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
    avg_len = float(meta["avg_doc_length"])
    b = float(meta["b"])
    if avg_len > 0:
        doc_norm = 1.0 - b + b * doc_lengths.astype(np.float64) / avg_len
    else:
        doc_norm = np.ones(n_docs, dtype=np.float64)
    return Bm25Index(
        postings=postings,
        idf=idf,
        doc_lengths=doc_lengths,
        avg_doc_length=avg_len,
        doc_norm=doc_norm,
        k1=float(meta["k1"]),
        b=b,
        corpus_digest=meta.get("corpus_digest", ""),
    )
