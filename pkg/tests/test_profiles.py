import pytest

from lib.errors import EmptyProfile
from lib.profiles import (
    CategoricalValue,
    CategoryNode,
    InstanceLeaf,
    NumericValue,
    ProfileTree,
    TextValue,
    build_profile,
    category_path,
    common_categories,
    leaves_at,
    posts_tokens,
)
from lib.schemas import ProfileRecord


def _record(**kw):
    kw.setdefault("owner_id", "x")
    kw.setdefault("kind", "user")
    return ProfileRecord(**kw)


def test_standard_fields_become_typed_categories(vocabulary, tokenizer):
    tree = build_profile(_record(gender="f", age=17, education="Liceo Classico",
                                 posts=["Gelato e pizza", "pizza"]), vocabulary, tokenizer)
    assert tree.categories == ["age", "education", "gender", "posts"]
    assert leaves_at(tree, ("gender",))[0].value == CategoricalValue("f")
    assert leaves_at(tree, ("age",))[0].value == NumericValue(17.0, "years")
    edu = leaves_at(tree, ("education",))[0].value
    assert isinstance(edu, TextValue) and edu.tokens == ("liceo", "classico")


def test_posts_are_one_aggregate_leaf(vocabulary, tokenizer):
    tree = build_profile(_record(posts=["Gelato e pizza", "pizza"]), vocabulary, tokenizer)
    leaves = leaves_at(tree, ("posts",))
    assert len(leaves) == 1
    assert leaves[0].source == "posts aggregate (2 posts)"
    assert posts_tokens(tree) == ("gelato", "pizza", "pizza")


def test_unknown_fields_go_under_extra_with_nesting(vocabulary, tokenizer):
    tree = build_profile(_record(location="Roma", extra={"interests": {"Music": "rock jazz", "sport": "calcio"}}),
                         vocabulary, tokenizer)
    assert tree.categories == ["extra"]
    assert tree.node(("extra", "interests", "music")) is not None
    assert leaves_at(tree, ("extra", "interests", "sport"))[0].value.tokens == ("calcio",)
    assert leaves_at(tree, ("extra", "location"))[0].value.tokens == ("roma",)


def test_extra_key_promoted_by_vocabulary(tokenizer):
    vocab = [{"name": "interests", "field": "interests"}]
    tree = build_profile(_record(extra={"interests": {"music": "rock"}}), vocab, tokenizer)
    assert tree.categories == ["interests"]
    assert tree.node(("interests", "music")) is not None


def test_stopword_only_fields_are_skipped(vocabulary, tokenizer):
    tree = build_profile(_record(gender="m", posts=["il la e", "the and"]), vocabulary, tokenizer)
    assert tree.categories == ["gender"]


def test_empty_record_raises(vocabulary, tokenizer):
    with pytest.raises(EmptyProfile):
        build_profile(_record(posts=["e il"]), vocabulary, tokenizer)


def test_common_categories_sorted(vocabulary, tokenizer):
    a = build_profile(_record(owner_id="a", gender="f", posts=["gelato"]), vocabulary, tokenizer)
    b = build_profile(_record(owner_id="b", gender="m", age=30, posts=["calcio"]), vocabulary, tokenizer)
    assert common_categories(a, b) == [("gender",), ("posts",)]


def test_category_path_parsing():
    assert category_path("Interests/Music") == ("interests", "music")
    assert category_path(["a", " b "]) == ("a", "b")
    with pytest.raises(ValueError):
        category_path("/")


def test_leaves_at_collects_every_sub_category(tokenizer):
    vocab = [{"name": "interests", "field": "interests"}]
    tree = build_profile(_record(extra={"interests": {"music": "rock", "sport": "calcio"}}), vocab, tokenizer)
    leaves = leaves_at(tree, ("interests",))
    assert len(leaves) == 2
    assert sorted(leaf.value.tokens for leaf in leaves) == [("calcio",), ("rock",)]
    assert leaves_at(tree, ("interests", "cinema")) == []
    assert leaves_at(tree, ("posts",)) == []


def _random_tree(rng, owner_id):
    names = [n for n in ("age", "education", "gender", "job", "posts") if rng.random() < 0.5]
    children = tuple(CategoryNode(n, leaves=(InstanceLeaf(CategoricalValue(n)),)) for n in names)
    return ProfileTree(owner_id, "user", CategoryNode("", children=children))


def test_common_categories_symmetric_and_subset(rng):
    for _ in range(300):
        a, b = _random_tree(rng, "a"), _random_tree(rng, "b")
        common = common_categories(a, b)
        assert common == common_categories(b, a)
        assert {p[0] for p in common} <= set(a.categories)
        assert {p[0] for p in common} <= set(b.categories)
        assert common_categories(a, a) == [(n,) for n in sorted(a.categories)]
