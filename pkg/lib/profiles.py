# lib/profiles.py
"""
Profile trees: root -> categories -> sub-categories -> instance leaves.

Trees are immutable; build them once per record and share them between workers.
"""
from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from lib.errors import EmptyProfile
from lib.textindex import TokenizerConfig, tokenize

CategoryPath = Tuple[str, ...]


def normalize_name(name: str) -> str:
    return unicodedata.normalize("NFC", str(name).strip().lower())


def category_path(value: Union[str, Sequence[str]]) -> CategoryPath:
    """'interests/music' or ['Interests', 'music'] -> ('interests', 'music')."""
    parts = value.split("/") if isinstance(value, str) else list(value)
    path = tuple(normalize_name(p) for p in parts if str(p).strip())
    if not path:
        raise ValueError(f"empty category path: {value!r}")
    return path


def path_str(path: CategoryPath) -> str:
    return "/".join(path)


# ---------------------------
# Instance values
# ---------------------------

@dataclass(frozen=True)
class TextValue:
    text: str
    tokens: Tuple[str, ...]


@dataclass(frozen=True)
class CategoricalValue:
    token: str


@dataclass(frozen=True)
class NumericValue:
    value: float
    unit: str = ""

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"numeric instance must be finite, got {self.value!r}")


InstanceValue = Union[TextValue, CategoricalValue, NumericValue]


@dataclass(frozen=True)
class InstanceLeaf:
    value: InstanceValue
    source: str = ""


@dataclass(frozen=True)
class CategoryNode:
    name: str
    children: Tuple["CategoryNode", ...] = ()
    leaves: Tuple[InstanceLeaf, ...] = ()

    def child(self, name: str) -> Optional["CategoryNode"]:
        for c in self.children:
            if c.name == name:
                return c
        return None

    @property
    def child_names(self) -> List[str]:
        return [c.name for c in self.children]


@dataclass(frozen=True)
class ProfileTree:
    owner_id: str
    kind: str
    root: CategoryNode = field(default_factory=lambda: CategoryNode(name=""))

    @property
    def categories(self) -> List[str]:
        return self.root.child_names

    def node(self, path: CategoryPath) -> Optional[CategoryNode]:
        n: Optional[CategoryNode] = self.root
        for seg in path:
            n = n.child(seg) if n is not None else None
            if n is None:
                return None
        return n


# ---------------------------
# Building
# ---------------------------

def _text_leaf(text: str, tokenizer: TokenizerConfig, source: str) -> Optional[InstanceLeaf]:
    text = " ".join(str(text).split())
    toks = tuple(tokenize(text, tokenizer))
    if not toks:
        return None
    return InstanceLeaf(TextValue(text, toks), source)


def _value_leaves(value: Any, tokenizer: TokenizerConfig, source: str,
                  vtype: str = "auto", unit: str = "") -> List[InstanceLeaf]:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        out: List[InstanceLeaf] = []
        for v in value:
            out.extend(_value_leaves(v, tokenizer, source, vtype, unit))
        return out
    if vtype == "categorical" or isinstance(value, bool):
        token = normalize_name(str(value)).casefold()
        return [InstanceLeaf(CategoricalValue(token), source)] if token else []
    if isinstance(value, (int, float)):
        return [InstanceLeaf(NumericValue(float(value), unit), source)] if math.isfinite(value) else []
    leaf = _text_leaf(str(value), tokenizer, source)
    return [leaf] if leaf else []


def _node_from_value(name: str, value: Any, tokenizer: TokenizerConfig, source: str,
                     vtype: str = "auto", unit: str = "") -> Optional[CategoryNode]:
    """Nested objects become sub-categories; everything else becomes leaves."""
    if isinstance(value, Mapping):
        merged: Dict[str, CategoryNode] = {}
        for key in value:
            child = _node_from_value(normalize_name(key), value[key], tokenizer, f"{source}.{key}", vtype)
            if child is None:
                continue
            prev = merged.get(child.name)
            merged[child.name] = child if prev is None else _merge(prev, child)
        if not merged:
            return None
        return CategoryNode(name=name, children=tuple(merged[k] for k in sorted(merged)))
    leaves = _value_leaves(value, tokenizer, source, vtype, unit)
    if not leaves:
        return None
    return CategoryNode(name=name, leaves=tuple(leaves))


def _merge(a: CategoryNode, b: CategoryNode) -> CategoryNode:
    children: Dict[str, CategoryNode] = {c.name: c for c in a.children}
    for c in b.children:
        children[c.name] = _merge(children[c.name], c) if c.name in children else c
    return CategoryNode(a.name, tuple(children[k] for k in sorted(children)), a.leaves + b.leaves)


def _record_fields(record) -> Tuple[str, str, Dict[str, Any]]:
    """Split a ProfileRecord (or plain mapping) into owner_id, kind and {field: value}."""
    data = record.model_dump() if hasattr(record, "model_dump") else dict(record)
    fields = {k: v for k, v in data.items() if k not in ("owner_id", "kind", "extra", "page_meta")}
    for k, v in (data.get("extra") or {}).items():
        fields.setdefault(normalize_name(k), v)
    meta = data.get("page_meta")
    if meta:
        fields.setdefault("page", {k: v for k, v in meta.items() if v not in (None, [], "")})
    return str(data.get("owner_id") or ""), str(data.get("kind") or "user"), fields


def build_profile(record, vocabulary: Sequence[Mapping[str, str]],
                  tokenizer: TokenizerConfig) -> ProfileTree:
    """
    One category node per populated field group of the vocabulary. All posts go
    into a single text leaf under ``posts``; the per-post count stays in the
    leaf's provenance. Fields outside the vocabulary are kept under ``extra``.
    """
    owner_id, kind, fields = _record_fields(record)
    nodes: Dict[str, CategoryNode] = {}
    used = set()

    for entry in vocabulary:
        name, fld = entry["name"], entry["field"]
        vtype = entry.get("type", "auto")
        used.add(fld)
        value = fields.get(fld)
        if fld == "posts":
            posts = [p for p in (value or []) if str(p).strip()]
            leaf = _text_leaf(" ".join(posts), tokenizer, f"posts aggregate ({len(posts)} posts)")
            if leaf is not None:
                nodes[name] = CategoryNode(name=name, leaves=(leaf,))
            continue
        node = _node_from_value(name, value, tokenizer, fld, vtype, entry.get("unit", ""))
        if node is not None:
            nodes[name] = node

    rest = {k: v for k, v in fields.items() if k not in used and v not in (None, [], {}, "")}
    if rest and "extra" not in nodes:
        node = _node_from_value("extra", rest, tokenizer, "extra")
        if node is not None:
            nodes["extra"] = node

    if not nodes:
        raise EmptyProfile(f"profile {owner_id!r} has no populated category")
    root = CategoryNode(name="", children=tuple(nodes[k] for k in sorted(nodes)))
    return ProfileTree(owner_id=owner_id, kind=kind, root=root)


# ---------------------------
# Structure queries
# ---------------------------

def common_categories(a: ProfileTree, b: ProfileTree) -> List[CategoryPath]:
    """Top-level categories present in both trees, sorted."""
    return [(name,) for name in sorted(set(a.categories) & set(b.categories))]


def iter_leaves(node: CategoryNode) -> Iterable[InstanceLeaf]:
    yield from node.leaves
    for c in node.children:
        yield from iter_leaves(c)


def leaves_at(tree: ProfileTree, path: CategoryPath) -> List[InstanceLeaf]:
    node = tree.node(path)
    return list(iter_leaves(node)) if node is not None else []


def posts_tokens(tree: ProfileTree) -> Tuple[str, ...]:
    """Tokens of the aggregate posts document, empty if the profile has none."""
    for leaf in leaves_at(tree, ("posts",)):
        if isinstance(leaf.value, TextValue):
            return leaf.value.tokens
    return ()
