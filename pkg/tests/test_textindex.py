import math
from collections import Counter

import pytest

from lib.errors import EmptyCorpus, EmptyDocument, SchemaError
from lib.textindex import (
    CorpusIndex,
    Document,
    TokenizerConfig,
    cosine,
    idf,
    load_index,
    tf,
    tfidf_vector,
    tokenize,
)


# brute-force reference, written against the formulas only

def _oracle_tf(term, tokens):
    return sum(1 for t in tokens if t == term) / len(tokens)


def _oracle_idf(term, docs):
    h = sum(1 for d in docs if term in d)
    return math.log(len(docs) / max(h, 1))


def _oracle_vector(tokens, docs):
    return {t: _oracle_tf(t, tokens) * _oracle_idf(t, docs) for t in set(tokens)}


def _oracle_cosine(a, b):
    terms = set(a) | set(b)
    dot = sum(a.get(t, 0.0) * b.get(t, 0.0) for t in terms)
    na = math.sqrt(sum(v * v for v in a.values()))
    nb = math.sqrt(sum(v * v for v in b.values()))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


def _random_corpus(rng, max_docs=50, vocab=12):
    words = [f"w{i}" for i in range(vocab)]
    m = int(rng.integers(1, max_docs + 1))
    return [tuple(words[int(i)] for i in rng.integers(0, vocab, size=int(rng.integers(1, 9))))
            for _ in range(m)]


# ---------------------------
# Tokenizer
# ---------------------------

def test_tokenize_folds_case_and_drops_stopwords_and_numbers(tokenizer):
    assert tokenize("Ciao, Mondo! 2024 il GELATO", tokenizer) == ["ciao", "mondo", "gelato"]


def test_tokenize_keeps_accented_letters_together():
    cfg = TokenizerConfig()
    assert tokenize("Perché città ÉCOLE", cfg) == ["perché", "città", "école"]


def test_tokenize_min_length_and_empty():
    cfg = TokenizerConfig(min_length=3)
    assert tokenize("io tu noi voi", cfg) == ["noi", "voi"]
    assert tokenize("", cfg) == []


def test_tokenize_applies_stemmer():
    cfg = TokenizerConfig(stemmer=lambda t: t[:4])
    assert tokenize("gelaterie gelato", cfg) == ["gela", "gela"]


# ---------------------------
# tf / idf
# ---------------------------

def test_tf_standard_and_literal():
    doc = Document("d", ("aa", "aa", "bbb"))
    assert tf("aa", doc) == pytest.approx(2 / 3)
    assert tf("zz", doc) == 0.0
    assert tf("bbb", doc, mode="literal") == pytest.approx(1.0)
    assert tf("zz", doc, mode="literal") == 0.0


def test_tf_on_empty_document_raises():
    with pytest.raises(EmptyDocument):
        tf("a", Document("d", ()), "standard")


def test_idf_is_zero_when_term_in_every_document():
    corpus = CorpusIndex.from_documents([Document("1", ("x", "y")), Document("2", ("x",))])
    assert idf("x", corpus) == 0.0
    assert idf("y", corpus) == pytest.approx(math.log(2))


def test_idf_unseen_term_counts_as_one_document():
    corpus = CorpusIndex.from_documents([Document(str(i), ("x",)) for i in range(4)])
    assert idf("nope", corpus) == pytest.approx(math.log(4))


def test_idf_log_base_hook():
    corpus = CorpusIndex.from_documents([Document(str(i), ("x",) if i else ("y",)) for i in range(10)])
    assert idf("y", corpus, log_base=10) == pytest.approx(1.0)


def test_empty_corpus_and_empty_document():
    with pytest.raises(EmptyCorpus):
        CorpusIndex.from_documents([])
    with pytest.raises(EmptyDocument):
        CorpusIndex.from_documents([Document("1", ("a",)), Document("2", ())])


# ---------------------------
# Vectors and cosine
# ---------------------------

def test_vectors_and_cosine_match_oracle(rng):
    for _ in range(200):
        docs = _random_corpus(rng)
        corpus = CorpusIndex.from_documents(Document(str(i), d) for i, d in enumerate(docs))
        a = docs[int(rng.integers(len(docs)))]
        b = docs[int(rng.integers(len(docs)))]
        va = tfidf_vector(Document("a", a), corpus)
        vb = tfidf_vector(Document("b", b), corpus)
        oa = _oracle_vector(a, docs)
        for t, w in oa.items():
            assert va.get(t, 0.0) == pytest.approx(w, abs=1e-9)
        assert cosine(va, vb) == pytest.approx(_oracle_cosine(oa, _oracle_vector(b, docs)), abs=1e-9)


def test_cosine_self_similarity_is_exactly_one(rng):
    for _ in range(200):
        n = int(rng.integers(1, 20))
        v = {f"t{i}": float(w) for i, w in enumerate(rng.uniform(0.01, 5.0, size=n))}
        assert cosine(v, v) == 1.0


def test_cosine_orthogonal_and_zero_vectors():
    assert cosine({"a": 1.0}, {"b": 2.0}) == 0.0
    assert cosine({}, {"a": 1.0}) == 0.0


def test_cosine_is_symmetric(rng):
    for _ in range(200):
        a = {f"t{int(i)}": float(w) for i, w in zip(rng.integers(0, 10, 6), rng.uniform(0, 3, 6))}
        b = {f"t{int(i)}": float(w) for i, w in zip(rng.integers(0, 10, 6), rng.uniform(0, 3, 6))}
        assert cosine(a, b) == cosine(b, a)


@pytest.mark.parametrize("c", [1e-300, 1e-160, 1e-9, 0.5, 3.0, 1e9, 1e160, 1e200, 1e300])
def test_cosine_is_scale_invariant(rng, c):
    for _ in range(100):
        a = {f"t{int(i)}": float(w) for i, w in zip(rng.integers(0, 8, 5), rng.uniform(0.01, 3, 5))}
        b = {f"t{int(i)}": float(w) for i, w in zip(rng.integers(0, 8, 5), rng.uniform(0.01, 3, 5))}
        base = cosine(a, b)
        assert cosine({t: c * w for t, w in a.items()}, b) == pytest.approx(base, abs=1e-12)
        assert cosine(a, {t: c * w for t, w in b.items()}) == pytest.approx(base, abs=1e-12)
        scaled = {t: c * w for t, w in a.items()}
        assert cosine(scaled, scaled) == 1.0


def test_cosine_with_huge_weights():
    assert cosine({"a": 1e200}, {"a": 1.0, "b": 1.0}) == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_idf_decreases_as_document_frequency_grows(rng):
    for _ in range(100):
        docs = _random_corpus(rng, max_docs=40, vocab=8)
        corpus = CorpusIndex.from_documents(Document(str(i), d) for i, d in enumerate(docs))
        terms = sorted(corpus.df)
        for t1 in terms:
            for t2 in terms:
                if corpus.df[t1] < corpus.df[t2]:
                    assert idf(t1, corpus) > idf(t2, corpus)


def test_tfidf_vector_omits_zero_weights():
    corpus = CorpusIndex.from_documents([Document("1", ("x", "y")), Document("2", ("x",))])
    assert tfidf_vector(Document("q", ("x", "y")), corpus) == {"y": pytest.approx(0.5 * math.log(2))}


# ---------------------------
# Persistence
# ---------------------------

def test_index_roundtrip(tmp_path):
    from lib.artifacts import write_json

    corpus = CorpusIndex.from_documents([Document("1", ("b", "a")), Document("2", ("a",))], scope="users")
    write_json(tmp_path / "index.json", corpus.to_dict())
    assert load_index(tmp_path / "index.json") == corpus
    assert dict(Counter(corpus.df)) == {"a": 2, "b": 1}


@pytest.mark.parametrize("raw", [[], {"m": 0, "df": {}}, {"m": 2, "df": {"a": 3}}, {"m": 2, "df": []}])
def test_index_from_bad_dict(raw):
    with pytest.raises(SchemaError):
        CorpusIndex.from_dict(raw)
