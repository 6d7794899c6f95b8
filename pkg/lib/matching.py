# lib/matching.py
"""
Leaf similarities, the thresholded per-category match and the overall profile match.

A category's score is the mean similarity of the leaf pairs that clear the
category threshold (0 when none do); the profile score is the unweighted mean
of the category scores over the categories both profiles have and the similarity
spec enables. Leaves pair only with leaves at the identical category path.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from lib.errors import ConfigError, KindMismatch, MissingContext
from lib.profiles import (
    CategoricalValue,
    CategoryNode,
    CategoryPath,
    InstanceLeaf,
    NumericValue,
    ProfileTree,
    TextValue,
    category_path,
    common_categories,
    path_str,
)
from lib.textindex import CorpusIndex, Document, WeightedVector, cosine, tfidf_vector

logger = logging.getLogger(__name__)

KINDS = ("tfidf_cosine", "exact", "numeric_band", "token_jaccard")


# ---------------------------
# Spec
# ---------------------------

@dataclass(frozen=True)
class SimilarityEntry:
    kind: str
    threshold: float = 0.0
    band: Optional[float] = None
    weight: float = 1.0  # echoed only; the profile score is an unweighted mean

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown similarity kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.kind == "numeric_band" and (self.band is None or not self.band > 0):
            raise ConfigError("numeric_band needs a band width > 0")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "threshold": self.threshold, "weight": self.weight}
        if self.band is not None:
            d["band"] = self.band
        return d


@dataclass(frozen=True)
class SimilaritySpec:
    entries: Mapping[CategoryPath, SimilarityEntry]

    @classmethod
    def from_dict(cls, raw: Mapping[str, Mapping]) -> "SimilaritySpec":
        if not isinstance(raw, Mapping) or not raw:
            raise ConfigError("categories must be a non-empty object of {path: {kind, threshold, band?}}")
        entries: Dict[CategoryPath, SimilarityEntry] = {}
        for key, val in raw.items():
            if not isinstance(val, Mapping) or "kind" not in val:
                raise ConfigError(f"category {key!r} needs a 'kind'")
            path = category_path(key)
            if path in entries:
                raise ConfigError(f"category {path_str(path)!r} configured twice")
            try:
                entries[path] = SimilarityEntry(
                    kind=str(val["kind"]),
                    threshold=float(val.get("threshold", 0.0)),
                    band=None if val.get("band") is None else float(val["band"]),
                    weight=float(val.get("weight", 1.0)),
                )
            except (TypeError, ValueError) as e:
                raise ConfigError(f"category {key!r}: {e}")
        return cls(entries=dict(sorted(entries.items())))

    def to_dict(self) -> dict:
        return {path_str(p): e.to_dict() for p, e in self.entries.items()}

    def enabled(self, category: str) -> bool:
        return any(p[0] == category for p in self.entries)

    def entry_for(self, path: CategoryPath) -> Optional[SimilarityEntry]:
        """Most specific entry whose path is a prefix of ``path``."""
        for n in range(len(path), 0, -1):
            e = self.entries.get(path[:n])
            if e is not None:
                return e
        return None


DEFAULT_SPEC = SimilaritySpec.from_dict({
    "gender": {"kind": "exact"},
    "age": {"kind": "numeric_band", "band": 10.0},
    "education": {"kind": "token_jaccard"},
    "job": {"kind": "token_jaccard"},
    "posts": {"kind": "tfidf_cosine"},
})

POSTS_ONLY_SPEC = SimilaritySpec.from_dict({"posts": {"kind": "tfidf_cosine"}})


# ---------------------------
# Context
# ---------------------------

@dataclass
class MatchContext:
    """Corpus statistics for tfidf_cosine plus a per-process vector cache."""

    corpus: Optional[CorpusIndex] = None
    tf_mode: str = "standard"
    log_base: Optional[float] = None
    _vectors: Dict[Tuple[str, ...], WeightedVector] = field(default_factory=dict, repr=False)

    def vector(self, value: TextValue) -> WeightedVector:
        if self.corpus is None:
            raise MissingContext("tfidf_cosine needs a corpus index")
        v = self._vectors.get(value.tokens)
        if v is None:
            v = tfidf_vector(Document("leaf", value.tokens), self.corpus, self.tf_mode, self.log_base)
            self._vectors[value.tokens] = v
        return v

    def __getstate__(self):
        # workers start with an empty cache
        return {"corpus": self.corpus, "tf_mode": self.tf_mode, "log_base": self.log_base, "_vectors": {}}


# ---------------------------
# Leaf similarity
# ---------------------------

def _tokens(value) -> frozenset:
    if isinstance(value, TextValue):
        return frozenset(value.tokens)
    if isinstance(value, CategoricalValue):
        return frozenset([value.token])
    raise KindMismatch(f"token_jaccard cannot compare {type(value).__name__}")


def _exact_key(value):
    if isinstance(value, TextValue):
        return ("text", " ".join(value.text.casefold().split()))
    if isinstance(value, CategoricalValue):
        return ("cat", value.token)
    return ("num", value.value)


def leaf_similarity(kind: str, l_u: InstanceLeaf, l_w: InstanceLeaf,
                    ctx: Optional[MatchContext] = None, band: Optional[float] = None) -> float:
    a, b = l_u.value, l_w.value
    if kind == "tfidf_cosine":
        if not isinstance(a, TextValue) or not isinstance(b, TextValue):
            raise KindMismatch("tfidf_cosine compares text documents only")
        if ctx is None or ctx.corpus is None:
            raise MissingContext("tfidf_cosine needs a corpus index")
        return cosine(ctx.vector(a), ctx.vector(b))
    if kind == "exact":
        if type(a) is not type(b):
            raise KindMismatch(f"exact cannot compare {type(a).__name__} with {type(b).__name__}")
        return 1.0 if _exact_key(a) == _exact_key(b) else 0.0
    if kind == "numeric_band":
        if not isinstance(a, NumericValue) or not isinstance(b, NumericValue):
            raise KindMismatch("numeric_band compares numeric values only")
        if band is None or not band > 0:
            raise ConfigError("numeric_band needs a band width > 0")
        return max(0.0, 1.0 - abs(a.value - b.value) / band)
    if kind == "token_jaccard":
        ta, tb = _tokens(a), _tokens(b)
        union = ta | tb
        if not union:
            return 0.0
        return len(ta & tb) / len(union)
    raise ConfigError(f"unknown similarity kind {kind!r}")


# ---------------------------
# Category and profile match
# ---------------------------

@dataclass(frozen=True)
class CategoryScore:
    mu: float
    h: int
    total: int

    def to_dict(self) -> dict:
        return {"mu": self.mu, "h": self.h, "total": self.total}


@dataclass(frozen=True)
class MatchResult:
    owner_id: str
    overall: float
    per_category: Mapping[str, CategoryScore]
    k_prime: int
    skipped: Tuple[str, ...] = ()

    @property
    def no_common_categories(self) -> bool:
        return self.k_prime == 0

    def to_dict(self) -> dict:
        return {
            "owner_id": self.owner_id,
            "overall": self.overall,
            "k_prime": self.k_prime,
            "no_common_categories": self.no_common_categories,
            "per_category": {k: v.to_dict() for k, v in self.per_category.items()},
            "skipped": list(self.skipped),
        }


def _pair_similarities(na: CategoryNode, nb: CategoryNode, path: CategoryPath,
                       spec: SimilaritySpec, ctx) -> Iterable[Tuple[float, float]]:
    """(similarity, threshold) for every leaf pair at identical paths under na/nb."""
    entry = spec.entry_for(path)
    if entry is not None:
        for lu in na.leaves:
            for lw in nb.leaves:
                yield leaf_similarity(entry.kind, lu, lw, ctx, entry.band), entry.threshold
    shared = sorted(set(na.child_names) & set(nb.child_names))
    for name in shared:
        yield from _pair_similarities(na.child(name), nb.child(name), path + (name,), spec, ctx)


def category_match(a: ProfileTree, b: ProfileTree, path: CategoryPath,
                   spec: SimilaritySpec, ctx: Optional[MatchContext] = None) -> CategoryScore:
    na, nb = a.node(path), b.node(path)
    if na is None or nb is None:
        return CategoryScore(0.0, 0, 0)
    total = 0
    kept: List[float] = []
    for s, th in _pair_similarities(na, nb, path, spec, ctx):
        total += 1
        if s >= th:
            kept.append(s)
    if not kept:
        return CategoryScore(0.0, 0, total)
    return CategoryScore(math.fsum(kept) / len(kept), len(kept), total)


def profile_match(a: ProfileTree, b: ProfileTree, spec: SimilaritySpec,
                  ctx: Optional[MatchContext] = None, owner_id: Optional[str] = None) -> MatchResult:
    per: Dict[str, CategoryScore] = {}
    skipped: List[str] = []
    for path in common_categories(a, b):
        name = path[0]
        if not spec.enabled(name):
            skipped.append(name)
            continue
        per[name] = category_match(a, b, path, spec, ctx)
    k = len(per)
    overall = math.fsum(s.mu for s in per.values()) / k if k else 0.0
    return MatchResult(
        owner_id=owner_id if owner_id is not None else a.owner_id,
        overall=overall,
        per_category=per,
        k_prime=k,
        skipped=tuple(skipped),
    )


def rank_key(result: MatchResult) -> Tuple[float, str]:
    """Descending score, then ascending owner_id."""
    return (-result.overall, result.owner_id)
