# lib/config.py
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from dotenv import load_dotenv

from lib.errors import ConfigError

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_STOPWORD_FILES = (DATA_DIR / "stopwords" / "it.txt", DATA_DIR / "stopwords" / "en.txt")
DEFAULT_CATEGORIES = DATA_DIR / "categories.json"
DEFAULT_GENDER_MAP = DATA_DIR / "gender_map.json"

TF_MODES = ("standard", "literal")
CORPUS_SCOPES = ("users", "pages", "union")
VALUE_TYPES = ("auto", "categorical", "numeric", "text", "document")

_ENV = {
    "jobs": "BRANDMATCH_JOBS",
    "tf_mode": "BRANDMATCH_TF_MODE",
    "stopwords_path": "BRANDMATCH_STOPWORDS",
    "categories_path": "BRANDMATCH_CATEGORIES",
    "gender_map_path": "BRANDMATCH_GENDER_MAP",
    "min_token_length": "BRANDMATCH_MIN_TOKEN_LENGTH",
    "corpus_scope": "BRANDMATCH_SCOPE",
    "log_level": "BRANDMATCH_LOG_LEVEL",
}


@dataclass(frozen=True)
class Settings:
    jobs: int = 1
    tf_mode: str = "standard"
    log_base: str = "e"
    stopwords_path: Optional[str] = None
    categories_path: str = str(DEFAULT_CATEGORIES)
    gender_map_path: str = str(DEFAULT_GENDER_MAP)
    min_token_length: int = 2
    corpus_scope: str = "union"
    log_level: str = "INFO"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _env_values() -> Dict[str, str]:
    load_dotenv()
    out = {}
    for key, var in _ENV.items():
        v = os.getenv(var)
        if v not in (None, ""):
            out[key] = v
    return out


def _coerce(values: Mapping[str, Any]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in values.items():
        if value is None:
            continue
        if key in ("jobs", "min_token_length"):
            try:
                value = int(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
            if value < 1:
                raise ConfigError(f"{key} must be >= 1, got {value}")
        elif key == "tf_mode" and value not in TF_MODES:
            raise ConfigError(f"tf_mode must be one of {TF_MODES}, got {value!r}")
        elif key == "corpus_scope" and value not in CORPUS_SCOPES:
            raise ConfigError(f"corpus_scope must be one of {CORPUS_SCOPES}, got {value!r}")
        elif key == "log_base" and value != "e":
            # other bases are reachable only through textindex's log_base argument
            raise ConfigError(f"log base is fixed to 'e', got {value!r}")
        elif key == "log_level":
            value = str(value).upper()
            if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
                raise ConfigError(f"log_level must be a logging level name, got {value!r}")
        out[key] = value
    return out


def resolve_settings(flags: Optional[Mapping[str, Any]] = None,
                     file_values: Optional[Mapping[str, Any]] = None) -> Settings:
    """
    Merge settings: flags > config file > environment (.env honoured) > defaults.
    Unknown keys in the config file are ignored; the campaign sections live there too.
    """
    known = set(Settings.__dataclass_fields__)
    merged: Dict[str, Any] = {}
    merged.update(_coerce(_env_values()))
    merged.update(_coerce({k: v for k, v in (file_values or {}).items() if k in known}))
    merged.update(_coerce({k: v for k, v in (flags or {}).items() if k in known}))
    return replace(Settings(), **merged)


# ---------------------------
# Bundled data files
# ---------------------------

def read_json_file(path: Path | str, what: str = "config") -> Any:
    p = Path(path)
    try:
        with p.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{what} file not found: {p}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what} file {p} is not valid JSON: {e.msg} at line {e.lineno}")


def load_stopword_file(path: Path | str) -> List[str]:
    """One term per line, UTF-8. Blank lines and '#' comments are skipped."""
    p = Path(path)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ConfigError(f"stopword file not found: {p}")
    return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]


def load_category_vocabulary(path: Path | str = DEFAULT_CATEGORIES) -> List[Dict[str, str]]:
    raw = read_json_file(path, "category vocabulary")
    if not isinstance(raw, list):
        raise ConfigError("category vocabulary must be a JSON list")
    out, seen = [], set()
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or not entry.get("name"):
            raise ConfigError(f"category vocabulary entry {i} needs a 'name'")
        name = str(entry["name"]).strip().lower()
        if name in seen:
            raise ConfigError(f"category {name!r} listed twice")
        seen.add(name)
        item = {"name": name, "field": str(entry.get("field") or name)}
        if entry.get("type"):
            if entry["type"] not in VALUE_TYPES:
                raise ConfigError(f"category {name!r}: type must be one of {VALUE_TYPES}")
            item["type"] = entry["type"]
        if entry.get("unit"):
            item["unit"] = str(entry["unit"])
        out.append(item)
    return out


def load_gender_map(path: Path | str = DEFAULT_GENDER_MAP) -> Dict[str, str]:
    raw = read_json_file(path, "gender map")
    if not isinstance(raw, dict):
        raise ConfigError("gender map must be a JSON object")
    bad = sorted(v for v in raw.values() if v not in ("m", "f", "other"))
    if bad:
        raise ConfigError(f"gender map targets must be m, f or other: {bad}")
    return {str(k).strip().casefold(): v for k, v in raw.items()}
