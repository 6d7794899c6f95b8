# lib/network.py
"""
Undirected labeled social graph over profile ids.

Backed by a networkx MultiGraph keyed by relationship label, so a pair can be
linked once per label. The graph is reporting material only; it never enters
the match score.
"""
from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import networkx as nx

from lib.artifacts import write_json
from lib.errors import Drop, SchemaError, UnknownEndpoint, UnknownNode

logger = logging.getLogger(__name__)


@dataclass
class SocialGraph:
    graph: nx.MultiGraph = field(default_factory=nx.MultiGraph)
    drops: List[Drop] = field(default_factory=list)

    def add_node(self, owner_id: str, kind: str = "user"):
        self.graph.add_node(owner_id, kind=kind, profile=owner_id)

    def add_edge(self, src: str, dst: str, label: str, weight: Optional[float] = None) -> bool:
        """Returns False when the (pair, label) edge already exists."""
        if self.graph.has_edge(src, dst, key=label):
            return False
        attrs = {"label": label}
        if weight is not None:
            attrs["weight"] = weight
        self.graph.add_edge(src, dst, key=label, **attrs)
        return True

    @property
    def nodes(self) -> List[str]:
        return sorted(self.graph.nodes)

    def edges(self) -> List[Tuple[str, str, str, Optional[float]]]:
        out = []
        for u, v, key, data in self.graph.edges(keys=True, data=True):
            a, b = (u, v) if u <= v else (v, u)
            out.append((a, b, key, data.get("weight")))
        return sorted(out, key=lambda e: (e[0], e[1], e[2]))

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n, "kind": self.graph.nodes[n].get("kind", "user")} for n in self.nodes],
            "edges": [
                {"src": a, "dst": b, "label": lbl, **({"weight": w} if w is not None else {})}
                for a, b, lbl, w in self.edges()
            ],
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _check_weight(weight, line: Optional[int]) -> Optional[float]:
    if weight is None:
        return None
    if isinstance(weight, bool) or not isinstance(weight, (int, float)) \
            or not math.isfinite(weight) or weight < 0:
        raise SchemaError(f"weight must be a finite number >= 0, got {weight!r}", line=line, field="weight")
    return float(weight)


def build_graph(dataset, edge_list: Optional[Path | str]) -> SocialGraph:
    """
    Nodes are every owner_id of the dataset; edges come from a JSON-lines file of
    {src, dst, label, weight?}. Unknown endpoints are fatal, self-loops and
    repeated (pair, label) edges are dropped and reported.
    """
    g = SocialGraph()
    for r in dataset.records:
        g.add_node(r.owner_id, r.kind)
    if edge_list is None:
        return g

    p = Path(edge_list)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise SchemaError(f"edge list not found: {p}")
    for lineno, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            row = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e.msg}", line=lineno, column=e.colno)
        if not isinstance(row, dict):
            raise SchemaError("edge must be an object", line=lineno)
        for key in ("src", "dst"):
            if not isinstance(row.get(key), str) or not row[key]:
                raise SchemaError("missing endpoint", line=lineno, field=key)
        src, dst = row["src"], row["dst"]
        label = str(row.get("label") or "related")
        weight = _check_weight(row.get("weight"), lineno)
        for end in (src, dst):
            if end not in g.graph:
                raise UnknownEndpoint(f"line {lineno}: unknown endpoint {end!r}")
        if src == dst:
            g.drops.append(Drop(f"line {lineno}", f"self-loop on {src!r}"))
            continue
        if not g.add_edge(src, dst, label, weight):
            g.drops.append(Drop(f"line {lineno}", f"duplicate {label!r} edge {src!r}-{dst!r}"))
    logger.info("graph: %d nodes, %d edges, %d dropped edges",
                g.graph.number_of_nodes(), g.graph.number_of_edges(), len(g.drops))
    return g


def neighbors(g: SocialGraph, owner_id: str) -> List[str]:
    if owner_id not in g.graph:
        raise UnknownNode(f"unknown node {owner_id!r}")
    return sorted(set(g.graph.neighbors(owner_id)))


def degree_summary(g: SocialGraph) -> dict:
    degrees = [d for _, d in g.graph.degree()]
    labels = Counter(lbl for _, _, lbl in g.graph.edges(keys=True))
    return {
        "nodes": g.graph.number_of_nodes(),
        "edges": g.graph.number_of_edges(),
        "degree_sum": sum(degrees),
        "degree_min": min(degrees) if degrees else 0,
        "degree_max": max(degrees) if degrees else 0,
        "degree_mean": (sum(degrees) / len(degrees)) if degrees else 0.0,
        "isolated": sum(1 for d in degrees if d == 0),
        "edges_by_label": dict(sorted(labels.items())),
    }


# ---------------------------
# Persistence
# ---------------------------

def save_graph(g: SocialGraph, path: Path | str) -> Path:
    return write_json(path, g.to_dict())


def graph_from_dict(raw) -> SocialGraph:
    if not isinstance(raw, dict) or not isinstance(raw.get("nodes"), list) or not isinstance(raw.get("edges"), list):
        raise SchemaError("graph must be an object with 'nodes' and 'edges' lists")
    g = SocialGraph()
    for i, n in enumerate(raw["nodes"]):
        if not isinstance(n, dict) or not isinstance(n.get("id"), str):
            raise SchemaError("node needs a string 'id'", field=f"nodes[{i}]")
        g.add_node(n["id"], str(n.get("kind", "user")))
    for i, e in enumerate(raw["edges"]):
        where = f"edges[{i}]"
        if not isinstance(e, dict) or not all(isinstance(e.get(k), str) for k in ("src", "dst", "label")):
            raise SchemaError("edge needs string 'src', 'dst' and 'label'", field=where)
        if e["src"] not in g.graph or e["dst"] not in g.graph:
            raise SchemaError("edge endpoint is not a node", field=where)
        if e["src"] == e["dst"]:
            raise SchemaError("self-loop", field=where)
        if not g.add_edge(e["src"], e["dst"], e["label"], _check_weight(e.get("weight"), None)):
            raise SchemaError("duplicate edge", field=where)
    return g


def load_graph(path: Path | str) -> SocialGraph:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SchemaError(f"graph file not found: {p}")
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno)
    return graph_from_dict(raw)
