"""Corpus ingestion from line-delimited JSON records."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from ..errors import CorpusFormatError, DuplicateDocIdError


@dataclass(frozen=True)
class CorpusDoc:
    doc_id: str
    title: str
    text: str


@dataclass(frozen=True)
class Corpus:
    docs: tuple[CorpusDoc, ...]

    @property
    def doc_count(self) -> int:
        return len(self.docs)

    def __getitem__(self, ordinal: int) -> CorpusDoc:
        return self.docs[ordinal]


def ingest_corpus(lines: Iterable[str]) -> Corpus:
    """Parse one record per line: {"doc_id": ..., "text": ..., "title"?: ...}.

    Input order is preserved (it defines document ordinals). Blank lines are
    skipped; duplicate doc_ids are rejected.
    """
    docs: list[CorpusDoc] = []
    seen: set[str] = set()
    for line_number, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(line_number, f"invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise CorpusFormatError(line_number, "expected an object")
        for required in ("doc_id", "text"):
            if required not in record:
                raise CorpusFormatError(line_number, f"missing field {required!r}")
            if not isinstance(record[required], str):
                raise CorpusFormatError(line_number, f"field {required!r} must be a string")
        title = record.get("title", "")
        if not isinstance(title, str):
            raise CorpusFormatError(line_number, "field 'title' must be a string")
        doc_id = record["doc_id"]
        if doc_id in seen:
            raise DuplicateDocIdError(doc_id, line_number)
        seen.add(doc_id)
        docs.append(CorpusDoc(doc_id=doc_id, title=title, text=record["text"]))
    return Corpus(docs=tuple(docs))


def load_corpus(path: str | Path) -> Corpus:
    with open(path, encoding="utf-8") as handle:
        return ingest_corpus(handle)


def corpus_digest(corpus: Corpus) -> str:
    """Fingerprint of the doc_id sequence; ties a persisted index to its corpus."""
    joined = "\x1f".join(doc.doc_id for doc in corpus.docs)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()
