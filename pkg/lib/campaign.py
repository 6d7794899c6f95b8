# lib/campaign.py
"""
Campaign targeting and experiment reports.

- rank_users: match every user against a brand page, sort, select the top p.
- group_match_table: average match per (user gender group, page topic class).
- top_terms: most frequent terms over a set of profiles.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from pydantic import ValidationError

from lib.aggregator import score_against, score_pairs
from lib.config import Settings, read_json_file
from lib.errors import ConfigError, Drop, EmptyProfile, EmptyUserSet, UnknownBrand
from lib.ingestion import Dataset
from lib.matching import (
    DEFAULT_SPEC,
    POSTS_ONLY_SPEC,
    MatchContext,
    MatchResult,
    SimilaritySpec,
    rank_key,
)
from lib.profiles import CategoryNode, ProfileTree, build_profile, posts_tokens
from lib.schemas import (
    ALL_TOPICS,
    PAGE_CATEGORIES,
    TOPIC_CLASSES,
    CampaignConfigModel,
    ClassMapModel,
    selection_size,
)
from lib.textindex import CorpusIndex, Document, TokenizerConfig

logger = logging.getLogger(__name__)

GROUPS = {"m": "male", "f": "female"}


# ---------------------------
# Workspace: profiles + corpus for one dataset
# ---------------------------

@dataclass
class Workspace:
    dataset: Dataset
    trees: Dict[str, ProfileTree]
    tf_mode: str = "standard"
    jobs: int = 1
    log_base: Optional[float] = None
    index: Optional[CorpusIndex] = None
    drops: List[Drop] = field(default_factory=list)

    @classmethod
    def build(cls, dataset: Dataset, vocabulary: Sequence[Mapping[str, str]], tokenizer: TokenizerConfig,
              settings: Optional[Settings] = None, index: Optional[CorpusIndex] = None,
              log_base: Optional[float] = None) -> "Workspace":
        settings = settings or Settings()
        trees: Dict[str, ProfileTree] = {}
        drops: List[Drop] = []
        for r in dataset.records:
            try:
                trees[r.owner_id] = build_profile(r, vocabulary, tokenizer)
            except EmptyProfile as e:
                # still ranked, with a score of 0
                trees[r.owner_id] = ProfileTree(r.owner_id, r.kind, CategoryNode(""))
                drops.append(Drop(r.owner_id, str(e)))
        return cls(dataset=dataset, trees=trees, tf_mode=settings.tf_mode, jobs=settings.jobs,
                   log_base=log_base, index=index, drops=drops)

    def scope_ids(self, scope: str) -> List[str]:
        if scope == "users":
            return [r.owner_id for r in self.dataset.users]
        if scope == "pages":
            return [r.owner_id for r in self.dataset.pages]
        return [r.owner_id for r in self.dataset.records]

    def documents(self, scope: str) -> List[Document]:
        docs = []
        for oid in self.scope_ids(scope):
            toks = posts_tokens(self.trees[oid])
            if toks:
                docs.append(Document(oid, toks))
        return docs

    def corpus(self, scope: str) -> CorpusIndex:
        if self.index is not None:
            return self.index
        return CorpusIndex.from_documents(self.documents(scope), scope=scope)

    def context(self, spec: SimilaritySpec, scope: str) -> MatchContext:
        """
        Corpus is left out when no tfidf_cosine entry is enabled or the scope has
        no posts. In the second case no profile pair shares a posts category.
        """
        corpus = None
        if any(e.kind == "tfidf_cosine" for e in spec.entries.values()):
            if self.index is not None or self.documents(scope):
                corpus = self.corpus(scope)
            else:
                logger.info("no posts documents in scope %r; matching without a corpus", scope)
        return MatchContext(corpus=corpus, tf_mode=self.tf_mode, log_base=self.log_base)


# ---------------------------
# Campaign config
# ---------------------------

@dataclass(frozen=True)
class CampaignConfig:
    brand_id: str
    spec: SimilaritySpec = DEFAULT_SPEC
    target_fraction: float = 0.03
    corpus_scope: str = "union"

    @classmethod
    def from_dict(cls, raw: Mapping, overrides: Optional[Mapping] = None) -> "CampaignConfig":
        data = dict(raw or {})
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        try:
            m = CampaignConfigModel.model_validate(data)
        except ValidationError as e:
            err = e.errors()[0]
            raise ConfigError(f"campaign config {'.'.join(str(x) for x in err['loc'])}: {err['msg']}")
        spec = DEFAULT_SPEC
        if m.categories:
            spec = SimilaritySpec.from_dict({k: v.model_dump() for k, v in m.categories.items()})
        return cls(brand_id=m.brand_id, spec=spec, target_fraction=m.target_fraction,
                   corpus_scope=m.corpus_scope)

    @classmethod
    def load(cls, path: Optional[Path | str], overrides: Optional[Mapping] = None) -> "CampaignConfig":
        raw = read_json_file(path, "campaign config") if path else {}
        if not isinstance(raw, dict):
            raise ConfigError("campaign config must be a JSON object")
        return cls.from_dict(raw, overrides)

    def to_dict(self) -> dict:
        return {
            "brand_id": self.brand_id,
            "target_fraction": self.target_fraction,
            "corpus_scope": self.corpus_scope,
            "categories": self.spec.to_dict(),
        }


# ---------------------------
# Ranking
# ---------------------------

@dataclass
class TargetReport:
    config: CampaignConfig
    ranked: List[MatchResult]
    selected: List[str]
    distributions: Dict[str, Dict[str, Optional[float]]]
    dataset_digest: str
    separation_auc: Optional[float] = None

    def to_dict(self) -> dict:
        chosen = set(self.selected)
        ranked = []
        for i, r in enumerate(self.ranked, start=1):
            row = r.to_dict()
            row.update({"rank": i, "selected": r.owner_id in chosen})
            ranked.append(row)
        return {
            "brand_id": self.config.brand_id,
            "target_fraction": self.config.target_fraction,
            "n_users": len(self.ranked),
            "selected_count": len(self.selected),
            "selected": list(self.selected),
            "ranked": ranked,
            "distributions": self.distributions,
            "separation_auc": self.separation_auc,
            "config": self.config.to_dict(),
            "dataset_digest": self.dataset_digest,
        }

    def summary_text(self, top: int = 20) -> str:
        lines = [
            f"Campaign target report for brand {self.config.brand_id}",
            f"users ranked: {len(self.ranked)}   target fraction: {self.config.target_fraction}"
            f"   selected: {len(self.selected)}",
        ]
        if self.separation_auc is not None:
            lines.append(f"separation AUC: {self.separation_auc:.6f}")
        lines.append("")
        df = pd.DataFrame(
            [{"rank": i, "owner_id": r.owner_id, "mu": round(r.overall, 6), "k'": r.k_prime,
              "selected": r.owner_id in set(self.selected)}
             for i, r in enumerate(self.ranked[:top], start=1)]
        )
        lines.append(df.to_string(index=False))
        if self.distributions:
            lines.append("")
            lines.append("per-category score distribution")
            lines.append(pd.DataFrame(self.distributions).T.round(6).to_string())
        return "\n".join(lines) + "\n"


def _distributions(results: Sequence[MatchResult]) -> Dict[str, Dict[str, Optional[float]]]:
    rows = [{"category": "overall", "mu": r.overall} for r in results]
    for r in results:
        rows.extend({"category": c, "mu": s.mu} for c, s in r.per_category.items())
    df = pd.DataFrame(rows, columns=["category", "mu"])
    stats = df.groupby("category")["mu"].agg(
        count="count", mean="mean", std=lambda s: s.std(ddof=0), min="min", median="median", max="max"
    )
    return {
        str(cat): {k: (None if pd.isna(v) else float(v)) for k, v in row.items()}
        for cat, row in stats.sort_index().iterrows()
    }


def separation_auc(results: Sequence[MatchResult], positives: Iterable[str]) -> Optional[float]:
    """Mann-Whitney AUC of the score for the positive ids against all others (ties count 1/2)."""
    pos = set(positives)
    scores = pd.Series({r.owner_id: r.overall for r in results}, dtype="float64")
    is_pos = scores.index.isin(pos)
    n_pos, n_neg = int(is_pos.sum()), int((~is_pos).sum())
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = scores.rank(method="average")
    return float((ranks[is_pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def rank_users(ws: Workspace, cfg: CampaignConfig, positives: Optional[Iterable[str]] = None) -> TargetReport:
    brand = ws.dataset.by_id().get(cfg.brand_id)
    if brand is None or brand.kind != "brand_page":
        raise UnknownBrand(f"no brand page with owner_id {cfg.brand_id!r}")
    users = ws.dataset.users
    if not users:
        raise EmptyUserSet("dataset has no users to rank")

    ctx = ws.context(cfg.spec, cfg.corpus_scope)
    results = score_against(ws.trees[brand.owner_id], [ws.trees[u.owner_id] for u in users],
                            cfg.spec, ctx, ws.jobs)
    ranked = sorted(results, key=rank_key)
    k = selection_size(cfg.target_fraction, len(ranked))
    selected = [r.owner_id for r in ranked[:k]]
    logger.info("brand %s: ranked %d users, selected %d", cfg.brand_id, len(ranked), k)
    return TargetReport(
        config=cfg,
        ranked=ranked,
        selected=selected,
        distributions=_distributions(ranked),
        dataset_digest=ws.dataset.digest(),
        separation_auc=separation_auc(ranked, positives) if positives is not None else None,
    )


# ---------------------------
# Group match table
# ---------------------------

@dataclass
class GroupMatchTable:
    cells: Dict[str, Dict[str, Optional[float]]]
    pairs: Dict[str, Dict[str, int]]
    spec: SimilaritySpec
    drops: List[Drop] = field(default_factory=list)

    groups = ("male", "female")
    classes = TOPIC_CLASSES + (ALL_TOPICS,)

    def cell(self, group: str, cls: str) -> Optional[float]:
        return self.cells[group][cls]

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "classes": list(self.classes),
            "cells": self.cells,
            "pairs": self.pairs,
            "undefined": [f"{g}/{c}" for g in self.groups for c in self.classes if self.cells[g][c] is None],
            "categories": self.spec.to_dict(),
            "drops": [d.to_dict() for d in self.drops],
        }

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.cells).T.reindex(index=list(self.groups), columns=list(self.classes))


def load_class_map(path: Path | str) -> Dict[str, str]:
    raw = read_json_file(path, "class map")
    try:
        return dict(ClassMapModel(mapping=raw).mapping)
    except ValidationError as e:
        err = e.errors()[0]
        raise ConfigError(f"class map {'.'.join(str(x) for x in err['loc'][1:])}: {err['msg']}")


def group_match_table(ws: Workspace, classes: Mapping[str, str], spec: SimilaritySpec = POSTS_ONLY_SPEC,
                      scope: str = "union") -> GroupMatchTable:
    """cell(g, c) = mean over (user in g, page in c) of the profile match."""
    pages = {r.owner_id: r for r in ws.dataset.pages}
    unknown = sorted(set(classes) - set(pages))
    if unknown:
        raise ConfigError(f"class map names pages that are not in the dataset: {unknown}")
    drops = [Drop(pid, "page has no topic class") for pid in sorted(set(pages) - set(classes))]
    drops.extend(Drop(u.owner_id, "user has no male/female gender")
                 for u in ws.dataset.users if u.gender not in GROUPS)

    users = [u for u in ws.dataset.users if u.gender in GROUPS]
    mapped = [pid for pid in pages if pid in classes]
    pairs = [(u.owner_id, pid) for u in users for pid in mapped]
    ctx = ws.context(spec, scope)
    results = score_pairs(pairs, ws.trees, spec, ctx, ws.jobs)

    gender = {u.owner_id: GROUPS[u.gender] for u in users}
    rows = [{"group": gender[uid], "class": classes[pid], "mu": r.overall}
            for (uid, pid), r in zip(pairs, results)]
    df = pd.DataFrame(rows, columns=["group", "class", "mu"])
    df = pd.concat([df, df.assign(**{"class": ALL_TOPICS})], ignore_index=True)
    agg = df.groupby(["group", "class"])["mu"].agg(["mean", "count"])

    cells: Dict[str, Dict[str, Optional[float]]] = {}
    counts: Dict[str, Dict[str, int]] = {}
    for g in GroupMatchTable.groups:
        cells[g], counts[g] = {}, {}
        for c in GroupMatchTable.classes:
            if (g, c) in agg.index:
                cells[g][c] = float(agg.loc[(g, c), "mean"])
                counts[g][c] = int(agg.loc[(g, c), "count"])
            else:
                cells[g][c] = None
                counts[g][c] = 0
                drops.append(Drop(f"{g}/{c}", "empty class: no pairs, cell undefined"))
    return GroupMatchTable(cells=cells, pairs=counts, spec=spec, drops=drops)


# ---------------------------
# Term clouds
# ---------------------------

@dataclass(frozen=True)
class TermCloud:
    terms: Tuple[Tuple[str, int], ...]

    def to_list(self) -> List[List]:
        return [[t, c] for t, c in self.terms]


def top_terms(profiles: Iterable[ProfileTree], n: int = 100) -> TermCloud:
    """Raw occurrence counts over the aggregate posts; ties broken by term."""
    if n < 1:
        raise ConfigError(f"term cloud size must be >= 1, got {n}")
    counts: Counter = Counter()
    for p in profiles:
        counts.update(posts_tokens(p))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return TermCloud(terms=tuple(ranked[:n]))


def term_clouds(ws: Workspace, n: int = 100) -> Dict[str, TermCloud]:
    """Clouds for all users, all pages, and each page category present."""
    out = {
        "users": top_terms((ws.trees[r.owner_id] for r in ws.dataset.users), n),
        "pages": top_terms((ws.trees[r.owner_id] for r in ws.dataset.pages), n),
    }
    for cat in PAGE_CATEGORIES:
        members = [r for r in ws.dataset.pages if r.page_meta and r.page_meta.category == cat]
        if members:
            out[cat] = top_terms((ws.trees[r.owner_id] for r in members), n)
    return out
