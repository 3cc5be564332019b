"""Non-learned alignment baselines.

Every baseline maps each source instruction independently to one target
index; ties always break toward the smaller index so reruns agree.  The
similarity baselines (bm25, exact match, tf-idf, embeddings) score a source
instruction against every target instruction and take the argmax.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import MalformedRecord, TokenSequence


class UnfittedVectorizer(RuntimeError):
    """transform was called before fit."""


class MissingSentenceKey(KeyError):
    """A sentence-mode lookup key is absent from the vector table."""


def random_align(n_source: int, n_target: int, seed: int) -> list[int]:
    """Uniform labels from a seeded generator; same seed, same labels."""
    rng = np.random.default_rng(seed)
    return [int(x) for x in rng.integers(0, n_target, size=n_source)]


def uniform_align(n_source: int, n_target: int) -> list[int]:
    """Monotone stretch of source positions onto target positions."""
    return [min(n_target - 1, (n_target * i) // n_source) for i in range(n_source)]


def _argmax_labels(score_rows: Sequence[Sequence[float]]) -> tuple[list[int], list[float]]:
    labels = []
    winners = []
    for row in score_rows:
        arr = np.asarray(row, dtype=float)
        idx = int(arr.argmax())
        labels.append(idx)
        winners.append(float(arr[idx]))
    return labels, winners


# ---------------------------------------------------------------------------
# bm25
# ---------------------------------------------------------------------------


class Bm25Index:
    """Okapi scoring over a fixed document list.

    idf uses the non-negative form ln(1 + (D - df + 0.5) / (df + 0.5)); the
    term frequency factor is f*(k1+1) / (f + k1*(1 - b + b*dl/avgdl)).
    Repeated query tokens contribute once per occurrence.
    """

    def __init__(
        self,
        documents: Sequence[Sequence[str]],
        k1: float = 1.2,
        b: float = 0.75,
    ):
        if not documents:
            raise ValueError("bm25 needs at least one document")
        self.k1 = k1
        self.b = b
        self.doc_counts = [Counter(doc) for doc in documents]
        self.doc_lens = [len(doc) for doc in documents]
        self.avgdl = sum(self.doc_lens) / len(documents)
        df = Counter()
        for counts in self.doc_counts:
            df.update(counts.keys())
        n_docs = len(documents)
        self.idf = {
            term: math.log(1 + (n_docs - n + 0.5) / (n + 0.5))
            for term, n in df.items()
        }

    def scores(self, query: Sequence[str]) -> list[float]:
        out = []
        for counts, dl in zip(self.doc_counts, self.doc_lens):
            norm = self.k1 * (1 - self.b + self.b * dl / self.avgdl)
            score = 0.0
            for term in query:
                f = counts.get(term, 0)
                if f == 0:
                    continue
                score += self.idf[term] * f * (self.k1 + 1) / (f + norm)
            out.append(score)
        return out


def bm25_align(
    source_seqs: Sequence[TokenSequence],
    target_seqs: Sequence[TokenSequence],
    k1: float = 1.2,
    b: float = 0.75,
) -> tuple[list[int], list[float]]:
    index = Bm25Index([t.tokens for t in target_seqs], k1=k1, b=b)
    return _argmax_labels([index.scores(s.tokens) for s in source_seqs])


# ---------------------------------------------------------------------------
# exact word match
# ---------------------------------------------------------------------------


def exact_match_score(a_tokens: Sequence[str], b_tokens: Sequence[str]) -> float:
    """Shared distinct words over the token count of the longer side."""
    if not a_tokens or not b_tokens:
        return 0.0
    shared = len(set(a_tokens) & set(b_tokens))
    return shared / max(len(a_tokens), len(b_tokens))


def exact_match_align(
    source_seqs: Sequence[TokenSequence], target_seqs: Sequence[TokenSequence]
) -> tuple[list[int], list[float]]:
    rows = [
        [exact_match_score(s.tokens, t.tokens) for t in target_seqs]
        for s in source_seqs
    ]
    return _argmax_labels(rows)


# ---------------------------------------------------------------------------
# tf-idf
# ---------------------------------------------------------------------------


class TfidfVectorizer:
    """Raw term counts weighted by idf = ln((1+D)/(1+df)) + 1, L2-normalized."""

    def __init__(self):
        self.vocabulary: dict[str, int] | None = None
        self.idf: np.ndarray | None = None

    def fit(self, documents: Sequence[Sequence[str]]) -> "TfidfVectorizer":
        df = Counter()
        for doc in documents:
            df.update(set(doc))
        terms = sorted(df)
        self.vocabulary = {t: i for i, t in enumerate(terms)}
        n_docs = len(documents)
        self.idf = np.array(
            [math.log((1 + n_docs) / (1 + df[t])) + 1 for t in terms]
        )
        return self

    def transform(self, documents: Sequence[Sequence[str]]) -> np.ndarray:
        if self.vocabulary is None or self.idf is None:
            raise UnfittedVectorizer("fit the vectorizer before transform")
        matrix = np.zeros((len(documents), len(self.vocabulary)))
        for row, doc in enumerate(documents):
            for term, count in Counter(doc).items():
                col = self.vocabulary.get(term)
                if col is not None:
                    matrix[row, col] = count
        matrix *= self.idf
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return matrix / norms


def tfidf_align(
    source_seqs: Sequence[TokenSequence],
    target_seqs: Sequence[TokenSequence],
    vectorizer: TfidfVectorizer,
) -> tuple[list[int], list[float]]:
    """Cosine argmax between tf-idf rows; the vectorizer must be fitted."""
    src = vectorizer.transform([s.tokens for s in source_seqs])
    tgt = vectorizer.transform([t.tokens for t in target_seqs])
    return _argmax_labels(src @ tgt.T)


# ---------------------------------------------------------------------------
# embedding lookup
# ---------------------------------------------------------------------------


class EmbeddingMode(str, Enum):
    WORD_AVERAGE = "word_average"
    SENTENCE = "sentence"


@dataclass(frozen=True)
class VectorTable:
    vectors: Mapping[str, np.ndarray]
    dim: int

    def __contains__(self, key: str) -> bool:
        return key in self.vectors


def load_word_vectors(path: str | Path) -> VectorTable:
    """Plain text: one line per word, ``word v1 v2 ... vd``."""
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 2:
            raise MalformedRecord(line_no, "expected word followed by values")
        word = parts[0]
        try:
            values = np.array([float(x) for x in parts[1:]])
        except ValueError:
            raise MalformedRecord(line_no, "non-numeric vector value") from None
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise MalformedRecord(line_no, f"expected {dim} values, got {len(values)}")
        vectors[word] = values
    if dim is None:
        raise MalformedRecord(0, "empty vector file")
    return VectorTable(vectors=vectors, dim=dim)


def load_sentence_vectors(path: str | Path) -> VectorTable:
    """JSON lines of {"key": "<recipe_id>#<index>", "vector": [...]}."""
    import json

    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                key = record["key"]
                values = np.array([float(x) for x in record["vector"]])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise MalformedRecord(line_no, "bad sentence-vector record") from None
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise MalformedRecord(
                    line_no, f"expected {dim} values, got {len(values)}"
                )
            vectors[key] = values
    if dim is None:
        raise MalformedRecord(0, "empty vector file")
    return VectorTable(vectors=vectors, dim=dim)


def sentence_key(recipe_id: str, index: int) -> str:
    return f"{recipe_id}#{index}"


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def embedding_align(
    source_seqs: Sequence[TokenSequence],
    target_seqs: Sequence[TokenSequence],
    table: VectorTable,
    mode: EmbeddingMode = EmbeddingMode.WORD_AVERAGE,
    source_keys: Sequence[str] | None = None,
    target_keys: Sequence[str] | None = None,
) -> tuple[list[int], list[float]]:
    """Cosine argmax between instruction vectors.

    Word-average mode averages the table vectors of tokens present in the
    table (pass noun/verb-filtered sequences to average content words only);
    an instruction with no covered token becomes a zero vector with cosine 0
    against everything.  Sentence mode ignores the token sequences and looks
    vectors up by the provided keys, raising MissingSentenceKey on a miss.
    """
    if mode is EmbeddingMode.WORD_AVERAGE:

        def seq_vector(seq: TokenSequence, _key: str | None) -> np.ndarray:
            hits = [table.vectors[t] for t in seq.tokens if t in table]
            if not hits:
                return np.zeros(table.dim)
            return np.mean(hits, axis=0)

        src_keys = [None] * len(source_seqs)
        tgt_keys = [None] * len(target_seqs)
    else:
        if source_keys is None or target_keys is None:
            raise ValueError("sentence mode requires source_keys and target_keys")

        def seq_vector(_seq: TokenSequence, key: str | None) -> np.ndarray:
            assert key is not None
            if key not in table:
                raise MissingSentenceKey(key)
            return table.vectors[key]

        src_keys = list(source_keys)
        tgt_keys = list(target_keys)

    src_vecs = [seq_vector(s, k) for s, k in zip(source_seqs, src_keys)]
    tgt_vecs = [seq_vector(t, k) for t, k in zip(target_seqs, tgt_keys)]
    rows = [[_cosine(sv, tv) for tv in tgt_vecs] for sv in src_vecs]
    return _argmax_labels(rows)
