import json
import os
from pathlib import Path
from typing import Optional

import pandas as pd
import streamlit as st


def _cfg() -> Path:
    try:
        if "brandmatch" in st.secrets:
            d = st.secrets["brandmatch"].get("artifacts_dir")
            if d:
                return Path(d)
    except Exception:
        pass
    return Path(os.getenv("BRANDMATCH_ARTIFACTS") or "out")


def artifacts_dir() -> Path:
    return _cfg()


@st.cache_data
def _read_json(path: str, mtime: float):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def load_artifact(name: str) -> Optional[dict]:
    p = artifacts_dir() / name
    if not p.is_file():
        return None
    return _read_json(str(p), p.stat().st_mtime)


def require_artifact(name: str, command: str) -> dict:
    data = load_artifact(name)
    if data is None:
        st.info(f"No {name} in {artifacts_dir()}. Run `python -m lib.cli {command} --out {artifacts_dir()} ...` first.")
        st.stop()
    return data


def ranked_frame(report: dict) -> pd.DataFrame:
    rows = []
    for r in report.get("ranked", []):
        row = {"rank": r["rank"], "owner_id": r["owner_id"], "overall": r["overall"],
               "k_prime": r["k_prime"], "selected": r["selected"]}
        for cat, s in sorted(r.get("per_category", {}).items()):
            row[f"mu_{cat}"] = s["mu"]
        rows.append(row)
    return pd.DataFrame(rows)


def group_frame(table: dict) -> pd.DataFrame:
    df = pd.DataFrame(table.get("cells", {})).T
    return df.reindex(index=table.get("groups"), columns=table.get("classes"))
