# lib/ingestion.py
"""
File-based data collection: load a dataset JSON, normalize each record, clean
posts, and report what was dropped and why.
"""
from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple

import pandas as pd
from pydantic import ValidationError

from lib.artifacts import file_digest, payload_digest, write_json
from lib.errors import Drop, DuplicateId, InvalidField, SchemaError
from lib.schemas import PAGE_CATEGORIES, PageMeta, ProfileRecord
from lib.textindex import TokenizerConfig, tokenize

logger = logging.getLogger(__name__)

KNOWN_FIELDS = ("owner_id", "kind", "gender", "age", "education", "job", "location",
                "posts", "page_meta", "extra")
SECTIONS = (("users", "user"), ("pages", "brand_page"))

_kind_aliases = {"user": "user", "brand_page": "brand_page", "page": "brand_page", "brand": "brand_page"}
_count_re = re.compile(r"^\s*([0-9]+(?:[.,][0-9]+)?)\s*([kKmM]?)\s*$")


@dataclass(frozen=True)
class Dataset:
    users: Tuple[ProfileRecord, ...]
    pages: Tuple[ProfileRecord, ...]
    provenance: Mapping[str, str] = field(default_factory=dict, compare=False)
    drops: Tuple[Drop, ...] = field(default=(), compare=False)

    @property
    def records(self) -> Tuple[ProfileRecord, ...]:
        return self.users + self.pages

    def by_id(self) -> Dict[str, ProfileRecord]:
        return {r.owner_id: r for r in self.records}

    def to_dict(self) -> dict:
        return {
            "users": [_dump(r) for r in self.users],
            "pages": [_dump(r) for r in self.pages],
        }

    def digest(self) -> str:
        return payload_digest(self.to_dict())


def _dump(r: ProfileRecord) -> dict:
    return r.model_dump(mode="json", exclude_none=True)


# ---------------------------
# Normalization
# ---------------------------

def _text(value: Any, fld: str) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, (dict, list, tuple)):
        raise InvalidField(fld, "expected text")
    s = " ".join(str(value).split())
    return s or None


def _age(value: Any) -> Optional[int]:
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    if isinstance(value, bool):
        raise InvalidField("age", f"not a number: {value!r}")
    if isinstance(value, str):
        try:
            value = float(value.strip().replace(",", "."))
        except ValueError:
            raise InvalidField("age", f"not a number: {value!r}")
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value != int(value):
        raise InvalidField("age", f"not a whole number of years: {value!r}")
    age = int(value)
    if not 1 <= age <= 120:
        raise InvalidField("age", f"{age} outside [1, 120]")
    return age


def _gender(value: Any, gender_map: Mapping[str, str]) -> Optional[str]:
    s = _text(value, "gender")
    if s is None:
        return None
    return gender_map.get(s.casefold(), "other")


def _follow_count(value: Any) -> int:
    """Accepts 910, "910", "910K", "2.7M"."""
    if value is None:
        return 0
    if isinstance(value, bool):
        raise InvalidField("page_meta.follow_count", f"not a count: {value!r}")
    if isinstance(value, (int, float)):
        n = value
    else:
        m = _count_re.match(str(value))
        if not m:
            raise InvalidField("page_meta.follow_count", f"not a count: {value!r}")
        n = float(m.group(1).replace(",", ".")) * {"": 1, "k": 1_000, "m": 1_000_000}[m.group(2).lower()]
    if not math.isfinite(n) or n < 0:
        raise InvalidField("page_meta.follow_count", f"must be >= 0, got {value!r}")
    return int(round(n))


def _page_meta(value: Any) -> Optional[PageMeta]:
    if value is None:
        return None
    if not isinstance(value, dict):
        raise InvalidField("page_meta", "expected an object")
    cat = _text(value.get("category"), "page_meta.category")
    if cat is not None:
        cat = cat.casefold().replace(" ", "_").replace("-", "_")
        if cat not in PAGE_CATEGORIES:
            raise InvalidField("page_meta.category", f"expected one of {PAGE_CATEGORIES}, got {cat!r}")
    topics = value.get("topics") or []
    if isinstance(topics, str):
        topics = [t for t in topics.split(",")]
    if not isinstance(topics, list):
        raise InvalidField("page_meta.topics", "expected a list")
    return PageMeta(
        name=_text(value.get("name"), "page_meta.name") or "",
        topics=[t for t in (_text(x, "page_meta.topics") for x in topics) if t],
        follow_count=_follow_count(value.get("follow_count")),
        category=cat,
    )


def _posts(value: Any) -> List[str]:
    if value is None:
        return []
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list):
        raise InvalidField("posts", "expected a list of strings")
    out = []
    for p in value:
        if p is None:
            continue
        if not isinstance(p, str):
            raise InvalidField("posts", f"post is not text: {p!r}")
        out.append(p.strip())
    return out


def normalize_record(raw: Mapping[str, Any], gender_map: Mapping[str, str],
                     kind: Optional[str] = None) -> ProfileRecord:
    """
    Trim strings, map gender variants to m/f/other, coerce numeric ages, and
    keep unknown keys under ``extra``. Raises InvalidField; the caller drops the record.
    """
    owner_id = _text(raw.get("owner_id"), "owner_id")
    if owner_id is None:
        raise InvalidField("owner_id", "missing")
    raw_kind = _text(raw.get("kind"), "kind")
    rk = _kind_aliases.get(raw_kind.casefold()) if raw_kind else kind
    if rk is None:
        raise InvalidField("kind", f"unknown kind {raw_kind!r}")
    if kind is not None and rk != kind:
        raise InvalidField("kind", f"{rk!r} record listed among {kind!r} records")

    raw_extra = raw.get("extra")
    if raw_extra is not None and not isinstance(raw_extra, dict):
        raise InvalidField("extra", f"expected an object, got {type(raw_extra).__name__}")
    extra = dict(raw_extra or {})
    for k, v in raw.items():
        if k not in KNOWN_FIELDS:
            extra[k] = v
    extra = {k: v for k, v in extra.items() if v is not None}

    try:
        return ProfileRecord(
            owner_id=owner_id,
            kind=rk,
            gender=_gender(raw.get("gender"), gender_map),
            age=_age(raw.get("age")),
            education=_text(raw.get("education"), "education"),
            job=_text(raw.get("job"), "job"),
            location=_text(raw.get("location"), "location"),
            posts=_posts(raw.get("posts")),
            page_meta=_page_meta(raw.get("page_meta")),
            extra=extra,
        )
    except ValidationError as e:
        err = e.errors()[0]
        raise InvalidField(".".join(str(x) for x in err["loc"]) or "record", err["msg"])


def clean_posts(posts: Iterable[str], tokenizer: TokenizerConfig) -> List[str]:
    """
    Drop posts with no tokens and token-identical duplicates; keep first
    occurrences in order.
    """
    seen, out = set(), []
    for p in posts:
        key = tuple(tokenize(p, tokenizer))
        if not key or key in seen:
            continue
        seen.add(key)
        out.append(p)
    return out


# ---------------------------
# Loading
# ---------------------------

def _read(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise SchemaError(f"dataset file not found: {path}")
    except UnicodeDecodeError as e:
        raise SchemaError(f"dataset is not UTF-8: {e.reason}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno)


def dataset_from_payload(payload: Any, gender_map: Mapping[str, str], tokenizer: TokenizerConfig,
                         provenance: Optional[Mapping[str, str]] = None) -> Dataset:
    if not isinstance(payload, dict):
        raise SchemaError("top level must be an object with 'users' and 'pages'")
    for section, _ in SECTIONS:
        if section not in payload:
            raise SchemaError("missing section", field=section)
        if not isinstance(payload[section], list):
            raise SchemaError("expected a list", field=section)

    drops: List[Drop] = []
    out: Dict[str, List[ProfileRecord]] = {"users": [], "pages": []}
    seen: Dict[str, str] = {}
    for section, kind in SECTIONS:
        for i, raw in enumerate(payload[section]):
            where = f"{section}[{i}]"
            if not isinstance(raw, dict):
                raise SchemaError("record must be an object", field=where)
            try:
                rec = normalize_record(raw, gender_map, kind=kind)
            except InvalidField as e:
                label = f"{where} {raw.get('owner_id')!s}"
                drops.append(Drop(label, f"invalid field {e}"))
                logger.warning("dropped %s: %s", label, e)
                continue
            if rec.owner_id in seen:
                raise DuplicateId(f"owner_id {rec.owner_id!r} appears in {seen[rec.owner_id]} and {where}")
            seen[rec.owner_id] = where
            cleaned = clean_posts(rec.posts, tokenizer)
            if len(cleaned) != len(rec.posts):
                rec = rec.model_copy(update={"posts": cleaned})
            out[section].append(rec)

    ds = Dataset(users=tuple(out["users"]), pages=tuple(out["pages"]),
                 provenance=dict(provenance or {}), drops=tuple(drops))
    logger.info("loaded %d users, %d pages, dropped %d records", len(ds.users), len(ds.pages), len(drops))
    return ds


def load_dataset(path: Path | str, gender_map: Mapping[str, str], tokenizer: TokenizerConfig) -> Dataset:
    p = Path(path)
    payload = _read(p)
    return dataset_from_payload(payload, gender_map, tokenizer, provenance={p.name: file_digest(p)})


def save_dataset(dataset: Dataset, path: Path | str) -> Path:
    return write_json(path, dataset.to_dict())


# ---------------------------
# Summary
# ---------------------------

def dataset_summary(dataset: Dataset) -> dict:
    users = pd.DataFrame(
        [{"gender": r.gender, "age": r.age, "location": r.location, "posts": len(r.posts)}
         for r in dataset.users],
        columns=["gender", "age", "location", "posts"],
    )
    pages = pd.Series([r.page_meta.category if r.page_meta else None for r in dataset.pages], dtype="object")
    genders = users["gender"].value_counts()
    ages = pd.to_numeric(users["age"], errors="coerce").dropna()
    return {
        "users": int(len(users)),
        "pages": int(len(dataset.pages)),
        "males": int(genders.get("m", 0)),
        "females": int(genders.get("f", 0)),
        "other_gender": int(genders.get("other", 0)),
        "mean_age": None if ages.empty else round(float(ages.mean()), 6),
        "users_with_location": int(users["location"].notna().sum()),
        "mean_posts_per_user": None if users.empty else round(float(users["posts"].mean()), 6),
        "pages_by_category": {str(k): int(v) for k, v in pages.fillna("uncategorized").value_counts().sort_index().items()},
        "dropped_records": len(dataset.drops),
    }
