import math

import pytest

from lib.aggregator import score_against, score_pairs
from lib.errors import ConfigError, KindMismatch, MissingContext
from lib.matching import (
    DEFAULT_SPEC,
    MatchContext,
    SimilaritySpec,
    category_match,
    leaf_similarity,
    profile_match,
    rank_key,
)
from lib.profiles import (
    CategoricalValue,
    CategoryNode,
    InstanceLeaf,
    NumericValue,
    ProfileTree,
    TextValue,
    build_profile,
)
from lib.schemas import ProfileRecord
from lib.textindex import CorpusIndex, Document

WORDS = [f"w{i}" for i in range(10)]


# ---------------------------
# Random small profiles + brute-force reference
# ---------------------------

def _random_values(rng):
    """{category: [raw values]} with up to 3 categories x 3 leaves."""
    out = {}
    for cat in ("age", "gender", "posts"):
        if rng.random() < 0.25:
            continue
        k = int(rng.integers(1, 4))
        if cat == "gender":
            out[cat] = [str(rng.choice(["m", "f"])) for _ in range(k)]
        elif cat == "age":
            out[cat] = [float(rng.integers(10, 60)) for _ in range(k)]
        else:
            out[cat] = [tuple(WORDS[int(i)] for i in rng.integers(0, len(WORDS), size=int(rng.integers(1, 7))))
                        for _ in range(k)]
    return out


def _tree(owner_id, values):
    children = []
    for cat in sorted(values):
        leaves = []
        for v in values[cat]:
            if cat == "gender":
                leaves.append(InstanceLeaf(CategoricalValue(v)))
            elif cat == "age":
                leaves.append(InstanceLeaf(NumericValue(v, "years")))
            else:
                leaves.append(InstanceLeaf(TextValue(" ".join(v), v)))
        children.append(CategoryNode(cat, leaves=tuple(leaves)))
    return ProfileTree(owner_id, "user", CategoryNode("", children=tuple(children)))


def _oracle_cos(a, b, docs):
    def vec(tokens):
        v = {}
        for t in set(tokens):
            h = sum(1 for d in docs if t in d)
            v[t] = tokens.count(t) / len(tokens) * math.log(len(docs) / max(h, 1))
        return v

    va, vb = vec(a), vec(b)
    dot = sum(w * vb.get(t, 0.0) for t, w in va.items())
    na = math.sqrt(sum(w * w for w in va.values()))
    nb = math.sqrt(sum(w * w for w in vb.values()))
    return 0.0 if na == 0 or nb == 0 else dot / (na * nb)


def _oracle_mu(a, b, th, docs):
    scores = []
    for cat in sorted(set(a) & set(b)):
        kept = []
        for x in a[cat]:
            for y in b[cat]:
                if cat == "gender":
                    s = 1.0 if x == y else 0.0
                elif cat == "age":
                    s = max(0.0, 1.0 - abs(x - y) / 10.0)
                else:
                    s = _oracle_cos(x, y, docs)
                if s >= th[cat]:
                    kept.append(s)
        scores.append(sum(kept) / len(kept) if kept else 0.0)
    return sum(scores) / len(scores) if scores else 0.0


def _spec(th):
    return SimilaritySpec.from_dict({
        "gender": {"kind": "exact", "threshold": th["gender"]},
        "age": {"kind": "numeric_band", "band": 10, "threshold": th["age"]},
        "posts": {"kind": "tfidf_cosine", "threshold": th["posts"]},
    })


def _random_pair(rng):
    a, b = _random_values(rng), _random_values(rng)
    extra = [tuple(WORDS[int(i)] for i in rng.integers(0, len(WORDS), size=3)) for _ in range(int(rng.integers(1, 6)))]
    docs = a.get("posts", []) + b.get("posts", []) + extra
    ctx = MatchContext(corpus=CorpusIndex.from_documents(Document(str(i), d) for i, d in enumerate(docs)))
    return a, b, docs, ctx


# ---------------------------
# Oracle and properties
# ---------------------------

def test_profile_match_matches_oracle(rng):
    for _ in range(200):
        a, b, docs, ctx = _random_pair(rng)
        th = {c: float(rng.choice([0.0, 0.0, 0.35])) for c in ("gender", "age", "posts")}
        got = profile_match(_tree("a", a), _tree("b", b), _spec(th), ctx)
        assert got.overall == pytest.approx(_oracle_mu(a, b, th, docs), abs=1e-9)
        assert got.k_prime == len(set(a) & set(b))


def test_symmetry_and_bounds(rng):
    spec = _spec({"gender": 0.0, "age": 0.0, "posts": 0.0})
    for _ in range(1000):
        a, b, _, ctx = _random_pair(rng)
        ab = profile_match(_tree("a", a), _tree("b", b), spec, ctx).overall
        ba = profile_match(_tree("b", b), _tree("a", a), spec, ctx).overall
        assert abs(ab - ba) <= 1e-12
        assert 0.0 <= ab <= 1.0


def test_raising_threshold_never_increases_h(rng):
    levels = (0.0, 0.2, 0.5, 0.8, 1.0)
    for _ in range(300):
        a, b, _, ctx = _random_pair(rng)
        ta, tb = _tree("a", a), _tree("b", b)
        for cat in sorted(set(a) & set(b)):
            hs = []
            for t in levels:
                score = category_match(ta, tb, (cat,), _spec({"gender": t, "age": t, "posts": t}), ctx)
                assert score.total == len(a[cat]) * len(b[cat])
                hs.append(score.h)
            assert all(h1 >= h2 for h1, h2 in zip(hs, hs[1:]))


def test_identical_profiles_score_one(vocabulary, tokenizer):
    rec = ProfileRecord(owner_id="u", kind="user", gender="f", age=20, posts=["gelato pizza", "cinema"])
    other = ProfileRecord(owner_id="v", kind="user", posts=["calcio motori"])
    a = build_profile(rec, vocabulary, tokenizer)
    b = build_profile(other, vocabulary, tokenizer)
    corpus = CorpusIndex.from_documents([Document("u", ("gelato", "pizza", "cinema")),
                                         Document("v", ("calcio", "motori"))])
    res = profile_match(a, a, DEFAULT_SPEC, MatchContext(corpus=corpus))
    assert res.overall == 1.0
    assert res.k_prime == 3
    assert profile_match(a, b, DEFAULT_SPEC, MatchContext(corpus=corpus)).overall == 0.0


def test_disjoint_categories_flagged():
    a = _tree("a", {"gender": ["f"]})
    b = _tree("b", {"age": [30.0]})
    res = profile_match(a, b, DEFAULT_SPEC, None)
    assert res.overall == 0.0
    assert res.k_prime == 0
    assert res.no_common_categories


def test_category_below_threshold_scores_zero_but_counts():
    spec = SimilaritySpec.from_dict({"gender": {"kind": "exact"},
                                     "age": {"kind": "numeric_band", "band": 10, "threshold": 0.9}})
    a = _tree("a", {"gender": ["f"], "age": [20.0]})
    b = _tree("b", {"gender": ["f"], "age": [30.0]})
    res = profile_match(a, b, spec)
    assert res.per_category["age"].h == 0
    assert res.per_category["age"].total == 1
    assert res.per_category["age"].mu == 0.0
    assert res.k_prime == 2
    assert res.overall == 0.5


def test_threshold_keeps_only_clearing_pairs():
    spec = SimilaritySpec.from_dict({"age": {"kind": "numeric_band", "band": 10, "threshold": 0.5}})
    a = _tree("a", {"age": [20.0]})
    b = _tree("b", {"age": [20.0, 22.0, 40.0]})
    score = category_match(a, b, ("age",), spec)
    assert (score.h, score.total) == (2, 3)
    assert score.mu == pytest.approx((1.0 + 0.8) / 2)


def test_disabled_common_category_is_skipped():
    spec = SimilaritySpec.from_dict({"gender": {"kind": "exact"}})
    a = _tree("a", {"gender": ["f"], "age": [20.0]})
    b = _tree("b", {"gender": ["f"], "age": [20.0]})
    res = profile_match(a, b, spec)
    assert res.skipped == ("age",)
    assert res.k_prime == 1
    assert res.overall == 1.0


# ---------------------------
# Leaf similarity
# ---------------------------

def test_leaf_kinds():
    f, m = InstanceLeaf(CategoricalValue("f")), InstanceLeaf(CategoricalValue("m"))
    assert leaf_similarity("exact", f, f) == 1.0
    assert leaf_similarity("exact", f, m) == 0.0
    a20, a25 = InstanceLeaf(NumericValue(20.0)), InstanceLeaf(NumericValue(25.0))
    assert leaf_similarity("numeric_band", a20, a25, band=10) == 0.5
    t1 = InstanceLeaf(TextValue("rock jazz", ("rock", "jazz")))
    t2 = InstanceLeaf(TextValue("jazz blues", ("jazz", "blues")))
    assert leaf_similarity("token_jaccard", t1, t2) == pytest.approx(1 / 3)


def test_leaf_errors():
    cat, num = InstanceLeaf(CategoricalValue("f")), InstanceLeaf(NumericValue(1.0))
    text = InstanceLeaf(TextValue("x y", ("x", "y")))
    with pytest.raises(KindMismatch):
        leaf_similarity("exact", cat, num)
    with pytest.raises(KindMismatch):
        leaf_similarity("tfidf_cosine", cat, text)
    with pytest.raises(MissingContext):
        leaf_similarity("tfidf_cosine", text, text)
    with pytest.raises(ConfigError):
        leaf_similarity("numeric_band", num, num)


# ---------------------------
# Spec
# ---------------------------

@pytest.mark.parametrize("raw", [
    {},
    {"posts": {"kind": "bm25"}},
    {"age": {"kind": "numeric_band"}},
    {"gender": {"kind": "exact", "threshold": 1.5}},
    {"gender": {}},
])
def test_bad_spec(raw):
    with pytest.raises(ConfigError):
        SimilaritySpec.from_dict(raw)


def test_entry_for_longest_prefix():
    spec = SimilaritySpec.from_dict({"interests": {"kind": "token_jaccard"},
                                     "interests/music": {"kind": "exact"}})
    assert spec.entry_for(("interests", "music", "live")).kind == "exact"
    assert spec.entry_for(("interests", "sport")).kind == "token_jaccard"
    assert spec.entry_for(("posts",)) is None


# ---------------------------
# Ranking and parallel scoring
# ---------------------------

def test_rank_key_breaks_ties_by_owner_id():
    a = _tree("a", {"gender": ["f"]})
    results = [profile_match(_tree(oid, {"gender": [g]}), a, DEFAULT_SPEC, owner_id=oid)
               for oid, g in (("u3", "f"), ("u1", "m"), ("u2", "f"))]
    assert [r.owner_id for r in sorted(results, key=rank_key)] == ["u2", "u3", "u1"]


def test_parallel_scoring_matches_sequential(rng):
    trees = {f"u{i:02d}": _tree(f"u{i:02d}", _random_values(rng)) for i in range(40)}
    brand = _tree("brand", {"gender": ["f"], "age": [18.0], "posts": [("w1", "w2", "w3")]})
    docs = [leaf.value.tokens for t in list(trees.values()) + [brand]
            for c in t.root.children if c.name == "posts" for leaf in c.leaves]
    docs.append(("w9",))
    ctx = MatchContext(corpus=CorpusIndex.from_documents(Document(str(i), d) for i, d in enumerate(docs)))
    seq = score_against(brand, list(trees.values()), DEFAULT_SPEC, ctx, jobs=1)
    par = score_against(brand, list(trees.values()), DEFAULT_SPEC, ctx, jobs=3)
    assert [r.to_dict() for r in seq] == [r.to_dict() for r in par]
    assert [r.owner_id for r in seq] == list(trees)


def test_score_pairs_empty():
    assert score_pairs([], {}, DEFAULT_SPEC) == []
