import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tagforge.corpus import Post
from tagforge.vocab import (
    TagVocabulary,
    VocabularyError,
    build_vocab,
    count_tags,
    decode_top_k,
    encode_labels,
    filter_post,
    load_vocab,
    rank_indices,
    save_vocab,
)


def make_post(tags, pid=1):
    return Post(
        id=pid,
        created_at="2018-01-01T00:00:00",
        title="t",
        description="d",
        code="",
        tags=tuple(tags),
    )


class TestCountTags:
    def test_multiset_counts(self):
        counts = count_tags([make_post(["a", "b"]), make_post(["a"], 2)])
        assert counts == {"a": 2, "b": 1}

    def test_empty_stream(self):
        assert count_tags([]) == {}

    def test_partitioned_merge_matches(self):
        posts = [make_post(["a", "b"]), make_post(["b", "c"], 2), make_post(["c"], 3)]
        whole = count_tags(posts)
        merged = count_tags(posts[:1])
        merged.update(count_tags(posts[1:]))
        assert merged == whole


class TestBuildVocab:
    def test_threshold_boundary_is_inclusive(self):
        vocab = build_vocab({"a": 50, "b": 49}, 50)
        assert vocab.names == ("a",)
        assert vocab.size == 1

    def test_descending_count_order(self):
        vocab = build_vocab({"a": 5, "b": 7}, 1)
        assert vocab.index("b") == 0
        assert vocab.index("a") == 1

    def test_tie_broken_by_name(self):
        vocab = build_vocab({"zz": 3, "aa": 3}, 1)
        assert vocab.names == ("aa", "zz")

    def test_empty_vocabulary_is_an_error(self):
        with pytest.raises(VocabularyError):
            build_vocab({}, 50)
        with pytest.raises(VocabularyError):
            build_vocab({"a": 10}, 50)

    def test_deterministic_serialization(self, tmp_path):
        counts = {"a": 9, "b": 9, "c": 50}
        one, two = tmp_path / "one.txt", tmp_path / "two.txt"
        save_vocab(build_vocab(counts, 5), one)
        save_vocab(build_vocab(dict(reversed(list(counts.items()))), 5), two)
        assert one.read_bytes() == two.read_bytes()

    def test_save_load_roundtrip(self, tmp_path):
        vocab = build_vocab({"a": 5, "b": 7, "c": 5}, 5)
        path = tmp_path / "vocab.txt"
        save_vocab(vocab, path)
        loaded = load_vocab(path)
        assert loaded == vocab
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "theta=5 L=3"


class TestFilterPost:
    VOCAB = TagVocabulary(threshold=2, names=("common1", "common2"), counts=(9, 5))

    def test_rare_tags_removed(self):
        post = filter_post(make_post(["common1", "rare1"]), self.VOCAB)
        assert post.tags == ("common1",)

    def test_rare_only_post_dropped(self):
        assert filter_post(make_post(["rare1", "rare2"]), self.VOCAB) is None

    def test_all_common_unchanged(self):
        post = make_post(["common1", "common2"])
        assert filter_post(post, self.VOCAB) is post


class TestEncodeLabels:
    VOCAB = TagVocabulary(threshold=1, names=("a", "b", "c"), counts=(3, 2, 1))

    def test_single_tag(self):
        assert encode_labels(["a"], self.VOCAB).tolist() == [1.0, 0.0, 0.0]

    def test_two_tags(self):
        assert encode_labels(["a", "c"], self.VOCAB).tolist() == [1.0, 0.0, 1.0]

    def test_empty_rejected(self):
        with pytest.raises(VocabularyError):
            encode_labels([], self.VOCAB)

    def test_unknown_tag_rejected(self):
        with pytest.raises(VocabularyError):
            encode_labels(["nope"], self.VOCAB)


class TestDecodeTopK:
    VOCAB = TagVocabulary(
        threshold=1,
        names=("t0", "t1", "t2", "t3", "t4", "t5"),
        counts=(6, 5, 4, 3, 2, 1),
    )

    def test_sorted_descending(self):
        scores = [0.9, 0.1, 0.5, 0.2, 0.05, 0.3]
        assert decode_top_k(scores, self.VOCAB, 2) == [("t0", 0.9), ("t2", 0.5)]

    def test_tie_broken_by_ascending_index(self):
        scores = [0.5, 0.5, 0.1, 0.1, 0.1, 0.1]
        assert decode_top_k(scores, self.VOCAB, 1) == [("t0", 0.5)]

    def test_k_out_of_range(self):
        scores = [0.1] * 6
        with pytest.raises(VocabularyError):
            decode_top_k(scores, self.VOCAB, 6)
        with pytest.raises(VocabularyError):
            decode_top_k(scores, self.VOCAB, 0)

    def test_label_roundtrip(self):
        labels = encode_labels(["t1", "t4"], self.VOCAB)
        decoded = decode_top_k(labels, self.VOCAB, int(labels.sum()))
        assert {name for name, _ in decoded} == {"t1", "t4"}


@given(
    scores=st.lists(st.floats(0, 1, allow_nan=False), min_size=5, max_size=30),
    k1=st.integers(1, 5),
    k2=st.integers(1, 5),
)
def test_top_k_prefix_property(scores, k1, k2):
    if k1 > k2:
        k1, k2 = k2, k1
    assert rank_indices(scores, k1) == rank_indices(scores, k2)[:k1]


@given(
    st.dictionaries(
        st.text(alphabet="abcdef", min_size=1, max_size=4),
        st.integers(1, 100),
        min_size=1,
        max_size=20,
    ),
    st.integers(1, 50),
)
def test_filtered_posts_keep_invariants(counts, theta):
    if not any(c >= theta for c in counts.values()):
        with pytest.raises(VocabularyError):
            build_vocab(counts, theta)
        return
    vocab = build_vocab(counts, theta)
    assert all(c >= theta for c in vocab.counts)
    assert list(vocab.counts) == sorted(vocab.counts, reverse=True)
    for name in counts:
        post = filter_post(make_post([name]), vocab)
        if post is not None:
            assert all(t in vocab for t in post.tags)
