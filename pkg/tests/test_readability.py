import pytest
from hypothesis import given, strategies as st

from qcpd.readability import (
    READABILITY_NAMES,
    TextStats,
    count_sentences,
    count_syllables,
    easy_words,
    information_noise,
    readability_features,
    stopwords,
    words,
)

FEATURE = {name: i for i, name in enumerate(READABILITY_NAMES)}


def score(text, name):
    return readability_features(text)[FEATURE[name]]


def test_word_lists_shipped():
    assert len(stopwords()) == 174
    assert {"the", "on", "and"} <= stopwords()
    assert len(easy_words()) > 2900
    assert "cat" in easy_words()


def test_flesch_fixture():
    assert score("The cat sat.", "flesch_reading_ease") == pytest.approx(119.19, abs=0.01)


def test_fixture_by_formula():
    st_ = TextStats.of("The cat sat.")
    assert (st_.n_words, st_.n_sentences, st_.n_syllables) == (3, 1, 3)
    assert score("The cat sat.", "flesch_kincaid_grade") == pytest.approx(0.39 * 3 + 11.8 - 15.59)
    assert score("The cat sat.", "automated_readability_index") == pytest.approx(
        4.71 * 9 / 3 + 0.5 * 3 - 21.43)
    assert score("The cat sat.", "coleman_liau_index") == pytest.approx(
        0.0588 * 300 - 0.296 * 100 / 3 - 15.8)


def test_smog_without_polysyllables():
    text = " ".join(["The dog ran home."] * 30)
    assert score(text, "smog_index") == pytest.approx(3.1291, abs=1e-3)


def test_empty_text_all_zero():
    assert readability_features("") == [0.0] * 9
    assert readability_features("  ...  ") == [0.0] * 9


def test_difficult_words_types():
    text = "Photosynthesis photosynthesis chlorophyll is in a leaf. 1234 abc"
    # distinct types > 2 chars outside the easy list: photosynthesis, chlorophyll, abc
    assert score(text, "difficult_words") == 3.0


def test_dale_chall_adjustment():
    st_ = TextStats.of("Photosynthesis requires chlorophyll.")
    pct = 100.0 * st_.n_difficult_tokens / st_.n_words
    assert pct > 5
    assert score("Photosynthesis requires chlorophyll.", "dale_chall") == pytest.approx(
        0.1579 * pct + 0.0496 * 3 + 3.6365)


def test_linsear_branches():
    # short sentence: r = 3 -> r/2 - 1
    assert score("The cat sat.", "linsear_write") == pytest.approx(0.5)
    long = " ".join(["word"] * 25) + "."
    assert score(long, "linsear_write") == pytest.approx(12.5)


@pytest.mark.parametrize("word,n", [("cat", 1), ("table", 2), ("make", 1), ("beautiful", 3),
                                    ("the", 1), ("rhythm", 1), ("agree", 2), ("x", 1),
                                    ("encyclopedia", 5)])
def test_syllables(word, n):
    assert count_syllables(word) == n


@pytest.mark.parametrize("text,n", [("One. Two! Three?", 3), ("No terminator", 1),
                                    ("Dr. Who... yes", 3), ("Wait...!", 1), ("3.14 is pi.", 1),
                                    ("", 0)])
def test_sentences(text, n):
    assert count_sentences(text) == n


def test_words_tokenizer():
    assert words("Don't stop, it's 2019’s best!") == ["Don't", "stop", "it's", "2019’s", "best"]


def test_information_noise():
    assert information_noise("the cat sat on the mat") == pytest.approx(0.5)
    assert information_noise("") == 0.0
    assert information_noise("cat", frozenset()) == 1.0


paragraph = st.lists(st.sampled_from(["The", "quick", "brown", "fox", "jumps", "over",
                                      "extraordinary", "dog", "beautifully", "."]),
                     min_size=1, max_size=40).map(" ".join)


@given(paragraph, st.integers(2, 5))
def test_rate_invariance_under_repetition(text, k):
    text = text.rstrip(" .") + "."
    if not words(text):
        return
    one = readability_features(text)
    many = readability_features(" ".join([text] * k))
    for name, a, b in zip(READABILITY_NAMES, one, many):
        if name != "difficult_words":
            assert b == pytest.approx(a, rel=1e-9, abs=1e-9), name
    assert one[FEATURE["difficult_words"]] == many[FEATURE["difficult_words"]]


@given(st.text(max_size=200))
def test_total_on_arbitrary_text(text):
    vals = readability_features(text)
    assert len(vals) == 9
    assert all(v == v and abs(v) < float("inf") for v in vals)
    assert 0.0 <= information_noise(text) <= 1.0
