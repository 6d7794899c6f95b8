# lib/plots.py
from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from lib.campaign import GroupMatchTable  # noqa: E402

logger = logging.getLogger(__name__)

# fixed ids and no date so the same table gives the same SVG bytes
matplotlib.rcParams["svg.hashsalt"] = "brandmatch"


def group_match_svg(table: GroupMatchTable, path: Path | str) -> Path:
    """Grouped bars: one group of bars per topic class, one bar per user group."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    df = table.frame().T.astype(float).fillna(0.0)

    fig, ax = plt.subplots(figsize=(7, 4))
    df.plot.bar(ax=ax, rot=0, width=0.7)
    ax.set_ylabel("average match")
    ax.set_xlabel("page topic class")
    ax.set_ylim(0, 1)
    ax.legend(title="users")
    fig.tight_layout()
    fig.savefig(p, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("wrote %s", p)
    return p
