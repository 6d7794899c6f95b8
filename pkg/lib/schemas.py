# lib/schemas.py
"""
Pydantic models for everything that crosses a file boundary: dataset records,
campaign configs, class maps, and the TargetReport artifact. These models are
the shipped schemas; loaders and tests validate against them.
"""
from __future__ import annotations

import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

PAGE_CATEGORIES = ("company", "community", "public_figure")
TOPIC_CLASSES = ("man_topics", "woman_topics", "both_topics")
ALL_TOPICS = "all_topics"


# ---------------------------
# Dataset records
# ---------------------------

class PageMeta(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    topics: List[str] = Field(default_factory=list)
    follow_count: int = Field(default=0, ge=0)
    category: Optional[Literal["company", "community", "public_figure"]] = None


class ProfileRecord(BaseModel):
    """A normalized, cleaned profile record."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    owner_id: str = Field(min_length=1)
    kind: Literal["user", "brand_page"]
    gender: Optional[Literal["m", "f", "other"]] = None
    age: Optional[int] = Field(default=None, ge=1, le=120)
    education: Optional[str] = None
    job: Optional[str] = None
    location: Optional[str] = None
    posts: List[str] = Field(default_factory=list)
    page_meta: Optional[PageMeta] = None
    extra: Dict[str, Any] = Field(default_factory=dict)


# ---------------------------
# Campaign inputs
# ---------------------------

class CategoryRule(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["tfidf_cosine", "exact", "numeric_band", "token_jaccard"]
    threshold: float = Field(default=0.0, ge=0.0, le=1.0)
    band: Optional[float] = Field(default=None, gt=0.0)
    weight: float = Field(default=1.0, ge=0.0)

    @model_validator(mode="after")
    def _band_for_numeric(self):
        if self.kind == "numeric_band" and self.band is None:
            raise ValueError("numeric_band needs 'band'")
        return self


class CampaignConfigModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    brand_id: str = Field(min_length=1)
    target_fraction: float = Field(default=0.03, gt=0.0, le=1.0)
    corpus_scope: Literal["users", "pages", "union"] = "union"
    categories: Optional[Dict[str, CategoryRule]] = None


class ClassMapModel(BaseModel):
    mapping: Dict[str, Literal["man_topics", "woman_topics", "both_topics"]]


# ---------------------------
# Report artifacts
# ---------------------------

class CategoryScoreModel(BaseModel):
    mu: float = Field(ge=0.0, le=1.0)
    h: int = Field(ge=0)
    total: int = Field(ge=0)


class RankedUserModel(BaseModel):
    owner_id: str
    rank: int = Field(ge=1)
    selected: bool
    overall: float = Field(ge=0.0, le=1.0)
    k_prime: int = Field(ge=0)
    no_common_categories: bool
    per_category: Dict[str, CategoryScoreModel]
    skipped: List[str]


class TargetReportModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    brand_id: str
    target_fraction: float = Field(gt=0.0, le=1.0)
    n_users: int = Field(ge=1)
    selected_count: int = Field(ge=1)
    selected: List[str]
    ranked: List[RankedUserModel]
    distributions: Dict[str, Dict[str, Optional[float]]]
    separation_auc: Optional[float] = None
    config: Dict[str, Any]
    dataset_digest: str = Field(pattern=r"^[0-9a-f]{64}$")

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.ranked) != self.n_users:
            raise ValueError("ranked must list every user")
        if self.selected_count != selection_size(self.target_fraction, self.n_users):
            raise ValueError("selected_count must be ceil(p * n)")
        top = [r.owner_id for r in self.ranked[: self.selected_count]]
        if self.selected != top:
            raise ValueError("selected must be the head of the ranking")
        keys = [(-r.overall, r.owner_id) for r in self.ranked]
        if keys != sorted(keys):
            raise ValueError("ranked must be sorted by descending score, then owner_id")
        return self


def selection_size(p: float, n: int) -> int:
    """ceil(p * n), at least 1; the epsilon absorbs products like 0.1 * 30 = 3.0000000000000004."""
    if n <= 0:
        return 0
    return min(n, max(1, math.ceil(p * n - 1e-9)))
