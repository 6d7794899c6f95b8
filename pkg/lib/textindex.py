# lib/textindex.py
"""
Tokenization, corpus statistics, TF-IDF weighting and cosine similarity.

Vectors are sparse ``{term: weight}`` dicts. Sums go through ``math.fsum`` so a
result does not depend on dict iteration order: cosine(a, b) == cosine(b, a)
exactly, and a parallel run gives the same bits as a sequential one.
"""
from __future__ import annotations

import json
import logging
import math
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import regex

from lib.config import DEFAULT_STOPWORD_FILES, Settings, load_stopword_file
from lib.errors import EmptyCorpus, EmptyDocument, SchemaError

logger = logging.getLogger(__name__)

WeightedVector = Dict[str, float]

_word_re = regex.compile(r"[\p{L}\p{M}\p{N}]+")
_numeric_re = regex.compile(r"[\p{N}]+")


# ---------------------------
# Tokenizer
# ---------------------------

@dataclass(frozen=True)
class TokenizerConfig:
    stopwords: FrozenSet[str] = frozenset()
    min_length: int = 2
    casefold: bool = True
    stemmer: Optional[Callable[[str], str]] = field(default=None, compare=False)

    @classmethod
    def default(cls, min_length: int = 2) -> "TokenizerConfig":
        words: List[str] = []
        for p in DEFAULT_STOPWORD_FILES:
            words.extend(load_stopword_file(p))
        return cls(stopwords=_fold_all(words), min_length=min_length)

    @classmethod
    def from_settings(cls, settings: Settings) -> "TokenizerConfig":
        if settings.stopwords_path:
            words = load_stopword_file(settings.stopwords_path)
            return cls(stopwords=_fold_all(words), min_length=settings.min_token_length)
        return cls.default(min_length=settings.min_token_length)


def _fold_all(words: Iterable[str]) -> FrozenSet[str]:
    return frozenset(unicodedata.normalize("NFC", w.casefold()) for w in words)


def tokenize(text: str, cfg: TokenizerConfig) -> List[str]:
    """Unicode word split, case folding, then numeric/stopword/length filters."""
    if not text:
        return []
    text = unicodedata.normalize("NFC", text)
    out = []
    for tok in _word_re.findall(text):
        if cfg.casefold:
            tok = unicodedata.normalize("NFC", tok.casefold())
        if _numeric_re.fullmatch(tok):
            continue
        if tok in cfg.stopwords:
            continue
        if len(tok) < cfg.min_length:
            continue
        if cfg.stemmer is not None:
            tok = cfg.stemmer(tok)
        out.append(tok)
    return out


# ---------------------------
# Documents and corpus
# ---------------------------

@dataclass(frozen=True)
class Document:
    doc_id: str
    tokens: Tuple[str, ...]


@dataclass(frozen=True)
class CorpusIndex:
    m: int
    df: Mapping[str, int]
    scope: str = "union"

    @property
    def vocabulary(self) -> FrozenSet[str]:
        return frozenset(self.df)

    @classmethod
    def from_documents(cls, docs: Iterable[Document], scope: str = "union") -> "CorpusIndex":
        df: Counter = Counter()
        m = 0
        for d in docs:
            if not d.tokens:
                raise EmptyDocument(f"document {d.doc_id!r} has no tokens")
            df.update(set(d.tokens))
            m += 1
        if m == 0:
            raise EmptyCorpus(f"no documents to index (scope {scope!r})")
        logger.info("indexed %d documents, %d terms (scope=%s)", m, len(df), scope)
        return cls(m=m, df=dict(sorted(df.items())), scope=scope)

    def to_dict(self) -> dict:
        return {"m": self.m, "df": dict(self.df), "scope": self.scope}

    @classmethod
    def from_dict(cls, raw) -> "CorpusIndex":
        if not isinstance(raw, dict) or "m" not in raw or "df" not in raw:
            raise SchemaError("index must be an object with 'm' and 'df'")
        m, df = raw["m"], raw["df"]
        if not isinstance(m, int) or m < 1:
            raise SchemaError("m must be a positive integer", field="m")
        if not isinstance(df, dict):
            raise SchemaError("df must be an object", field="df")
        for t, h in df.items():
            if not isinstance(h, int) or not 1 <= h <= m:
                raise SchemaError(f"df[{t!r}]={h!r} outside [1, m]", field="df")
        return cls(m=m, df=dict(df), scope=str(raw.get("scope", "union")))


def load_index(path: Path | str) -> "CorpusIndex":
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SchemaError(f"index is not valid JSON: {e.msg}", line=e.lineno, column=e.colno)
    return CorpusIndex.from_dict(raw)


# ---------------------------
# Weights
# ---------------------------

def tf(term: str, doc: Document, mode: str = "standard") -> float:
    """
    standard: count(term, doc) / |doc|.
    literal:  len(term) / |doc| for terms present in doc (character-length reading).
    """
    n = len(doc.tokens)
    if n == 0:
        raise EmptyDocument(f"document {doc.doc_id!r} has no tokens")
    if mode == "literal":
        return len(term) / n if term in doc.tokens else 0.0
    return doc.tokens.count(term) / n


def idf(term: str, corpus: CorpusIndex, log_base: Optional[float] = None) -> float:
    """log(m / df); unseen terms count as df = 1. Natural log unless a base is given."""
    h = max(corpus.df.get(term, 0), 1)
    if log_base is None:
        return math.log(corpus.m / h)
    return math.log(corpus.m / h, log_base)


def tfidf_vector(doc: Document, corpus: CorpusIndex, tf_mode: str = "standard",
                 log_base: Optional[float] = None) -> WeightedVector:
    n = len(doc.tokens)
    if n == 0:
        raise EmptyDocument(f"document {doc.doc_id!r} has no tokens")
    counts = Counter(doc.tokens)
    vec: WeightedVector = {}
    for term in sorted(counts):
        t = len(term) / n if tf_mode == "literal" else counts[term] / n
        w = t * idf(term, corpus, log_base)
        if w != 0.0:
            vec[term] = w
    return vec


def norm(v: Mapping[str, float]) -> float:
    return math.hypot(*v.values())


def _unit_max(v: Mapping[str, float]) -> Dict[str, float]:
    # weights divided by the largest magnitude, so squares neither overflow nor underflow
    top = max((abs(w) for w in v.values()), default=0.0)
    if top == 0.0 or not math.isfinite(top):
        return {}
    return {t: w / top for t, w in v.items() if w != 0.0}


def cosine(v1: Mapping[str, float], v2: Mapping[str, float]) -> float:
    """Cosine of two sparse vectors; 0 when either has zero norm."""
    u1, u2 = _unit_max(v1), _unit_max(v2)
    if not u1 or not u2:
        return 0.0
    s1 = math.fsum(w * w for w in u1.values())
    s2 = math.fsum(w * w for w in u2.values())
    small, large = (u1, u2) if len(u1) <= len(u2) else (u2, u1)
    dot = math.fsum(w * large[t] for t, w in small.items() if t in large)
    # sqrt(s * s) == s in binary floating point, so cosine(v, v) is exactly 1
    return max(0.0, min(1.0, dot / math.sqrt(s1 * s2)))


def term_counts(token_lists: Iterable[Sequence[str]]) -> Counter:
    c: Counter = Counter()
    for toks in token_lists:
        c.update(toks)
    return c
