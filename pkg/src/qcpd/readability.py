"""Readability scores and the information-noise ratio for plain text.

All scores are rate based (per word or per sentence), so repeating a text
verbatim leaves them unchanged. Empty text scores 0 everywhere.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

_WORD = re.compile(r"[A-Za-z0-9]+(?:['’][A-Za-z]+)*")
_SENT_END = re.compile(r"[.!?]+(?=\s|$)")
_VOWELS = re.compile(r"[aeiouy]+")

READABILITY_NAMES = (
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "automated_readability_index",
    "coleman_liau_index",
    "gunning_fog",
    "smog_index",
    "difficult_words",
    "dale_chall",
    "linsear_write",
)


def _load_words(name: str) -> frozenset[str]:
    text = resources.files("qcpd").joinpath("data", name).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


@lru_cache(maxsize=None)
def easy_words() -> frozenset[str]:
    """The Dale-Chall list of familiar words."""
    return _load_words("easy_words.txt")


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    return _load_words("stopwords.txt")


def words(text: str) -> list[str]:
    return _WORD.findall(text)


def count_sentences(text: str) -> int:
    """Sentence-final punctuation runs that close at least one word.

    Text with words but no terminator counts as one sentence.
    """
    n, pos = 0, 0
    for m in _SENT_END.finditer(text):
        if _WORD.search(text, pos, m.start()):
            n += 1
        pos = m.end()
    if _WORD.search(text, pos):
        n += 1
    return n


def count_syllables(word: str) -> int:
    """Vowel-group count with a silent final ``e``; at least 1."""
    w = re.sub(r"[^a-z]", "", word.lower())
    if not w:
        return 1
    n = len(_VOWELS.findall(w))
    if n > 1 and w.endswith("e") and not w.endswith(("le", "ee", "ye", "ie")):
        n -= 1
    return max(1, n)


def _is_difficult(word: str) -> bool:
    w = word.lower().replace("’", "'")
    return len(w) > 2 and any(ch.isalpha() for ch in w) and w not in easy_words()


@dataclass(frozen=True)
class TextStats:
    n_words: int
    n_sentences: int
    n_syllables: int
    n_letters: int
    n_polysyllables: int
    n_difficult_tokens: int
    n_difficult_types: int

    @classmethod
    def of(cls, text: str) -> "TextStats":
        ws = words(text)
        syl = [count_syllables(w) for w in ws]
        diff = [w.lower() for w in ws if _is_difficult(w)]
        return cls(
            n_words=len(ws),
            n_sentences=count_sentences(text) if ws else 0,
            n_syllables=sum(syl),
            n_letters=sum(sum(ch.isalnum() for ch in w) for w in ws),
            n_polysyllables=sum(1 for s in syl if s >= 3),
            n_difficult_tokens=len(diff),
            n_difficult_types=len(set(diff)),
        )


def flesch_reading_ease(st: TextStats) -> float:
    return 206.835 - 1.015 * st.n_words / st.n_sentences - 84.6 * st.n_syllables / st.n_words


def flesch_kincaid_grade(st: TextStats) -> float:
    return 0.39 * st.n_words / st.n_sentences + 11.8 * st.n_syllables / st.n_words - 15.59


def automated_readability_index(st: TextStats) -> float:
    return 4.71 * st.n_letters / st.n_words + 0.5 * st.n_words / st.n_sentences - 21.43


def coleman_liau_index(st: TextStats) -> float:
    letters_per_100 = 100.0 * st.n_letters / st.n_words
    sentences_per_100 = 100.0 * st.n_sentences / st.n_words
    return 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8


def gunning_fog(st: TextStats) -> float:
    return 0.4 * (st.n_words / st.n_sentences + 100.0 * st.n_polysyllables / st.n_words)


def smog_index(st: TextStats) -> float:
    return 1.043 * math.sqrt(st.n_polysyllables * 30.0 / st.n_sentences) + 3.1291


def dale_chall(st: TextStats) -> float:
    pct = 100.0 * st.n_difficult_tokens / st.n_words
    score = 0.1579 * pct + 0.0496 * st.n_words / st.n_sentences
    if pct > 5.0:
        score += 3.6365
    return score


def linsear_write(st: TextStats) -> float:
    # easy words (< 3 syllables) weigh 1, hard words 3, per sentence
    easy = st.n_words - st.n_polysyllables
    r = (easy + 3.0 * st.n_polysyllables) / st.n_sentences
    return r / 2.0 if r > 20 else r / 2.0 - 1.0


def readability_features(text: str) -> list[float]:
    """The nine readability scores in fixed order (see ``READABILITY_NAMES``).

    ``difficult_words`` is the number of distinct word types longer than two
    characters that are missing from the familiar-word list; numbers are
    never difficult. Dale-Chall uses the difficult-token percentage.
    """
    st = TextStats.of(text)
    if st.n_words == 0:
        return [0.0] * len(READABILITY_NAMES)
    return [
        flesch_reading_ease(st),
        flesch_kincaid_grade(st),
        automated_readability_index(st),
        coleman_liau_index(st),
        gunning_fog(st),
        smog_index(st),
        float(st.n_difficult_types),
        dale_chall(st),
        linsear_write(st),
    ]


def information_noise(text: str, stop: frozenset[str] | None = None) -> float:
    """Share of tokens that survive stopword removal; 0 for empty text."""
    stop = stopwords() if stop is None else stop
    toks = [w.lower().replace("’", "'") for w in words(text)]
    if not toks:
        return 0.0
    return sum(1 for t in toks if t not in stop) / len(toks)
