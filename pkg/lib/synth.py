# lib/synth.py
"""
Seeded synthetic fixtures: users in topical clusters with disjoint vocabularies,
brand pages per cluster plus shared pages, a friendship edge list, the page
class map and the cluster assignment.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from lib.artifacts import write_json, write_text
from lib.config import read_json_file
from lib.errors import ConfigError
from lib.schemas import PAGE_CATEGORIES
from lib.textindex import TokenizerConfig

logger = logging.getLogger(__name__)

_CONSONANTS = "bcdfglmnprstvz"
_VOWELS = "aeiou"
_LOCATIONS = ("Roma", "Milano", "Napoli", "Torino", "Palermo", "Bologna", "Firenze", "Bari")
_LABELS = ("friend", "family", "colleague")


class ClusterSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(pattern=r"^[a-z0-9_]+$")
    gender: str = Field(pattern=r"^(m|f|other)$")
    ages: Tuple[int, int]
    topic_class: str = Field(pattern=r"^(man_topics|woman_topics|both_topics)$")

    @model_validator(mode="after")
    def _ages(self):
        lo, hi = self.ages
        if not 1 <= lo <= hi <= 120:
            raise ValueError("ages must be [lo, hi] within [1, 120]")
        return self


def _default_clusters() -> List[ClusterSpec]:
    return [
        ClusterSpec(name="a", gender="f", ages=(14, 19), topic_class="woman_topics"),
        ClusterSpec(name="b", gender="m", ages=(33, 38), topic_class="man_topics"),
    ]


class SynthSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    users: int = Field(default=100, ge=1)
    posts_per_user: Tuple[int, int] = (5, 15)
    words_per_post: Tuple[int, int] = (6, 14)
    vocabulary_size: int = Field(default=40, ge=2)
    pages_per_cluster: int = Field(default=3, ge=1)
    shared_pages: int = Field(default=2, ge=0)
    edges_per_user: int = Field(default=2, ge=0)
    clusters: List[ClusterSpec] = Field(default_factory=_default_clusters, min_length=1)

    @model_validator(mode="after")
    def _ranges(self):
        for name in ("posts_per_user", "words_per_post"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must be [min, max] with 1 <= min <= max")
        names = [c.name for c in self.clusters]
        if len(set(names)) != len(names):
            raise ValueError("cluster names must be unique")
        return self

    @classmethod
    def load(cls, path: Optional[Path | str]) -> "SynthSpec":
        raw = read_json_file(path, "synth spec") if path else {}
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            err = e.errors()[0]
            raise ConfigError(f"synth spec {'.'.join(str(x) for x in err['loc'])}: {err['msg']}")


@dataclass
class SynthFixture:
    dataset: dict
    edges: List[dict]
    classes: Dict[str, str]
    clusters: Dict[str, str]
    vocabularies: Dict[str, List[str]]


# ---------------------------
# Words
# ---------------------------

def _word(rng: np.random.Generator) -> str:
    n = int(rng.integers(2, 4))
    return "".join(_CONSONANTS[int(rng.integers(len(_CONSONANTS)))] + _VOWELS[int(rng.integers(len(_VOWELS)))]
                   for _ in range(n))


def _vocabularies(rng: np.random.Generator, names: List[str], size: int) -> Dict[str, List[str]]:
    """Pairwise disjoint word lists, none of them a bundled stopword."""
    stop = TokenizerConfig.default().stopwords
    pool: List[str] = []
    seen = set()
    need = size * len(names)
    while len(pool) < need:
        w = _word(rng)
        if w in seen or w in stop:
            continue
        seen.add(w)
        pool.append(w)
    return {name: pool[i * size:(i + 1) * size] for i, name in enumerate(names)}


def _zipf(size: int) -> np.ndarray:
    w = 1.0 / np.arange(1, size + 1)
    return w / w.sum()


def _post(rng: np.random.Generator, words: List[str], p: np.ndarray, span: Tuple[int, int]) -> str:
    k = int(rng.integers(span[0], span[1] + 1))
    return " ".join(words[int(i)] for i in rng.choice(len(words), size=k, p=p))


def _posts(rng, words, p, spec: SynthSpec, count: int) -> List[str]:
    return [_post(rng, words, p, spec.words_per_post) for _ in range(count)]


# ---------------------------
# Generator
# ---------------------------

def generate(spec: SynthSpec, seed: int) -> SynthFixture:
    rng = np.random.default_rng(seed)
    names = [c.name for c in spec.clusters]
    vocab = _vocabularies(rng, names, spec.vocabulary_size)
    weights = _zipf(spec.vocabulary_size)
    lo_posts, hi_posts = spec.posts_per_user
    width = len(str(spec.users))

    users: List[dict] = []
    clusters: Dict[str, str] = {}
    for i in range(spec.users):
        c = spec.clusters[i % len(spec.clusters)]
        oid = f"u{i + 1:0{width}d}"
        users.append({
            "owner_id": oid,
            "kind": "user",
            "gender": c.gender,
            "age": int(rng.integers(c.ages[0], c.ages[1] + 1)),
            "location": _LOCATIONS[int(rng.integers(len(_LOCATIONS)))],
            "posts": _posts(rng, vocab[c.name], weights, spec, int(rng.integers(lo_posts, hi_posts + 1))),
        })
        clusters[oid] = c.name

    pages: List[dict] = []
    classes: Dict[str, str] = {}
    n_page_posts = 2 * hi_posts
    for c in spec.clusters:
        for j in range(spec.pages_per_cluster):
            oid = f"p_{c.name}_{j + 1}"
            pages.append({
                "owner_id": oid,
                "kind": "brand_page",
                # audience the page speaks to
                "gender": c.gender,
                "age": (c.ages[0] + c.ages[1]) // 2,
                "posts": _posts(rng, vocab[c.name], weights, spec, n_page_posts),
                "page_meta": {
                    "name": f"Brand {c.name.upper()}{j + 1}",
                    "topics": [c.topic_class],
                    "follow_count": int(rng.integers(1_000, 3_000_000)),
                    "category": PAGE_CATEGORIES[j % len(PAGE_CATEGORIES)],
                },
            })
            classes[oid] = c.topic_class
            clusters[oid] = c.name

    mixed = [w for name in names for w in vocab[name]]
    mixed_p = np.tile(weights, len(names)) / len(names)
    for j in range(spec.shared_pages):
        oid = f"p_shared_{j + 1}"
        pages.append({
            "owner_id": oid,
            "kind": "brand_page",
            "posts": _posts(rng, mixed, mixed_p, spec, n_page_posts),
            "page_meta": {
                "name": f"Shared {j + 1}",
                "topics": ["both_topics"],
                "follow_count": int(rng.integers(1_000, 3_000_000)),
                "category": "community",
            },
        })
        classes[oid] = "both_topics"
        clusters[oid] = "shared"

    edges: List[dict] = []
    seen = set()
    ids = [u["owner_id"] for u in users]
    if len(ids) > 1:
        for src in ids:
            for _ in range(spec.edges_per_user):
                dst = ids[int(rng.integers(len(ids)))]
                label = _LABELS[int(rng.integers(len(_LABELS)))]
                key = (min(src, dst), max(src, dst), label)
                if src == dst or key in seen:
                    continue
                seen.add(key)
                edges.append({"src": src, "dst": dst, "label": label,
                              "weight": round(float(rng.uniform(0.1, 1.0)), 3)})

    logger.info("synth: %d users, %d pages, %d edges (seed=%d)", len(users), len(pages), len(edges), seed)
    return SynthFixture(
        dataset={"users": users, "pages": pages},
        edges=edges,
        classes=classes,
        clusters=clusters,
        vocabularies=vocab,
    )


def write_fixture(fx: SynthFixture, out_dir: Path | str) -> List[Path]:
    out = Path(out_dir)
    edges_text = "".join(json.dumps(e, sort_keys=True, ensure_ascii=False) + "\n" for e in fx.edges)
    return [
        write_json(out / "dataset.json", fx.dataset),
        write_text(out / "edges.jsonl", edges_text) if fx.edges else _empty(out / "edges.jsonl"),
        write_json(out / "classes.json", fx.classes),
        write_json(out / "clusters.json", fx.clusters),
    ]


def _empty(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("", encoding="utf-8")
    return path
