# lib/artifacts.py
from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


def dumps(payload: Any) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: Path | str, payload: Any) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(payload), encoding="utf-8")
    logger.info("wrote %s", p)
    return p


def write_text(path: Path | str, text: str) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info("wrote %s", p)
    return p


def file_digest(path: Path | str) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def payload_digest(payload: Any) -> str:
    return hashlib.sha256(dumps(payload).encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    settings: Dict[str, Any]
    config: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)
    seconds: Optional[float] = None

    def add_input(self, name: str, path: Optional[Path | str]):
        if path is not None and Path(path).is_file():
            self.inputs[name] = file_digest(path)

    def record(self, path: Path) -> Path:
        self.outputs[Path(path).name] = file_digest(path)
        return path

    def finish(self, out_dir: Path | str) -> Path:
        self.seconds = round(time.perf_counter() - self.started, 6)
        return write_json(Path(out_dir) / "manifest.json", {
            "subcommand": self.subcommand,
            "settings": self.settings,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "timing": {"seconds": self.seconds},
        })
