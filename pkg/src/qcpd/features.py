"""The 34 monthly quality indicators and the per-article feature series.

Columns (1-based feature ids):

* F1-F6 contribution: distinct / newly seen / unregistered editors on the
  talk page (F1-F3) and on the main page (F4-F6).
* F7-F14 activity: mean and variance of inter-revision gaps in days for
  main (F7, F8) and talk (F9, F10); talk revisions per month and per week
  (F11, F12); main revisions per month and per week (F13, F14).
* F15-F25 content of the latest main revision: bytes, refs, categories,
  wikilinks, citation templates, other templates, images per byte,
  infobox flag, level-2 and level-3+ headings, information-noise ratio.
* F26-F34 readability, in the order of ``readability.READABILITY_NAMES``.

Contribution and activity features describe the month itself (zero in a
month without edits); content features are a snapshot carried forward
through months without a main revision.
"""
from __future__ import annotations

import logging
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    MonthCalendar,
    PageHistory,
    QualityClass,
    QualityLabelEvent,
    Revision,
    ground_truth_changepoints,
)
from .readability import READABILITY_NAMES, information_noise, readability_features
from .wikitext import MarkerCounts, parse_wikitext_markers, plain_text

log = logging.getLogger(__name__)

N_FEATURES = 34
FEATURE_NAMES = tuple(f"F{i}" for i in range(1, N_FEATURES + 1))
FEATURE_DESCRIPTIONS = (
    "distinct registered editors (talk)",
    "new registered editors (talk)",
    "distinct unregistered editors (talk)",
    "distinct registered editors (main)",
    "new registered editors (main)",
    "distinct unregistered editors (main)",
    "mean days between main revisions",
    "variance of days between main revisions",
    "mean days between talk revisions",
    "variance of days between talk revisions",
    "talk revisions per month",
    "talk revisions per week",
    "main revisions per month",
    "main revisions per week",
    "article length in bytes",
    "references",
    "categories",
    "wikilinks",
    "citation templates",
    "non-citation templates",
    "images per byte",
    "infobox present",
    "level-2 headings",
    "level-3+ headings",
    "information-noise ratio",
) + READABILITY_NAMES


def _span(a: int, b: int) -> tuple[int, ...]:
    return tuple(range(a, b + 1))


BASE_GROUPS: dict[str, tuple[int, ...]] = {
    "Gc": _span(1, 6),
    "Ga": _span(7, 14),
    "Gp": _span(15, 34),
    "G1": _span(26, 34),
    "G2": _span(15, 25),
    "G3": _span(15, 25) + (32,),
    "G4": _span(15, 21) + (23, 24),
    "G5": _span(15, 21) + (23, 24, 32),
    "G6": _span(9, 14),
    "G7": _span(9, 14) + (32,),
    "G8": _span(9, 14) + (32,) + _span(1, 6),
    "all": _span(1, 34),
}

_GROUP_TOKEN = re.compile(r"([+-])?\s*([A-Za-z][A-Za-z0-9]*)")


def resolve_group(name: str) -> tuple[int, ...]:
    """Sorted 1-based feature ids of a group expression.

    Accepts base names (``Gc``, ``G3``, ``all``), single features (``F32``),
    unions with ``+`` and removals with ``-``: ``Gc+Ga``, ``Gp-F32``.
    """
    expr = name.replace(" ", "").replace("⊕", "+")
    if not expr:
        raise ValueError("empty feature group")
    members: set[int] = set()
    pos = 0
    for m in _GROUP_TOKEN.finditer(expr):
        if m.start() != pos:
            raise ValueError(f"unknown feature group: {name!r}")
        pos = m.end()
        sign, tok = m.group(1) or "+", m.group(2)
        if tok in BASE_GROUPS:
            ids = set(BASE_GROUPS[tok])
        elif re.fullmatch(r"F([1-9]|[12][0-9]|3[0-4])", tok):
            ids = {int(tok[1:])}
        else:
            raise ValueError(f"unknown feature group: {name!r}")
        members = members | ids if sign == "+" else members - ids
    if pos != len(expr) or not members:
        raise ValueError(f"unknown feature group: {name!r}")
    return tuple(sorted(members))


def group_columns(name: str) -> list[int]:
    """0-based matrix columns for a group expression."""
    return [i - 1 for i in resolve_group(name)]


@dataclass(frozen=True)
class ArticleSeries:
    article_id: str
    calendar: MonthCalendar
    matrix: np.ndarray
    valid: np.ndarray
    ground_truth: tuple[int, ...] = ()
    latest_class: QualityClass | None = None
    feature_names: tuple[str, ...] = field(default=FEATURE_NAMES)

    def __post_init__(self):
        if self.matrix.shape[0] != self.calendar.n_months:
            raise ValueError("matrix rows must equal the number of calendar months")
        if self.valid.shape != (self.calendar.n_months,):
            raise ValueError("valid mask has the wrong shape")

    @property
    def first_valid(self) -> int:
        """1-based index of the first valid month (the creation bookend)."""
        idx = np.flatnonzero(self.valid)
        if idx.size == 0:
            raise ValueError(f"{self.article_id}: no valid months")
        return int(idx[0]) + 1

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())

    def detection_matrix(self, columns: Sequence[int] | None = None) -> np.ndarray:
        """Valid rows (and optionally a column subset) as detectors see them."""
        m = self.matrix[self.valid]
        return m if columns is None else m[:, list(columns)]

    def select(self, columns: Sequence[int]) -> "ArticleSeries":
        cols = list(columns)
        return ArticleSeries(self.article_id, self.calendar, self.matrix[:, cols],
                             self.valid, self.ground_truth, self.latest_class,
                             tuple(self.feature_names[c] for c in cols))


# -- per-month feature blocks --------------------------------------------------

def _month_of(revs: Sequence[Revision], cal: MonthCalendar) -> list[int]:
    return [cal.raw_index(r.timestamp) for r in revs]


def _editor_block(revs, months, m):
    seen_before = {r.editor_id for r, k in zip(revs, months) if k < m and r.registered}
    reg = {r.editor_id for r, k in zip(revs, months) if k == m and r.registered}
    unreg = {r.editor_id for r, k in zip(revs, months) if k == m and not r.registered}
    return [float(len(reg)), float(len(reg - seen_before)), float(len(unreg))]


def contribution_features(history: PageHistory, cal: MonthCalendar, m: int) -> list[float]:
    """F1..F6 for month ``m``.

    A "new" editor is a registered editor with no edit on the same page
    (talk or main) in any earlier month.
    """
    talk, main = history.talk_revisions, history.main_revisions
    return (_editor_block(talk, _month_of(talk, cal), m)
            + _editor_block(main, _month_of(main, cal), m))


def _gap_stats(revs, months, m):
    gaps = [(b.timestamp - a.timestamp).total_seconds() / 86400.0
            for a, b, k in zip(revs, revs[1:], months[1:]) if k == m]
    if len(gaps) < 2:
        return [0.0, 0.0]
    arr = np.asarray(gaps)
    return [float(arr.mean()), float(arr.var())]


def activity_features(history: PageHistory, cal: MonthCalendar, m: int) -> list[float]:
    """F7..F14 for month ``m``.

    A gap belongs to the month of its later revision. Weekly counts are the
    monthly count divided by ``days_in_month / 7``.
    """
    main, talk = history.main_revisions, history.talk_revisions
    mm, tm = _month_of(main, cal), _month_of(talk, cal)
    weeks = cal.days_in_month(m) / 7.0
    n_talk = sum(1 for k in tm if k == m)
    n_main = sum(1 for k in mm if k == m)
    return (_gap_stats(main, mm, m) + _gap_stats(talk, tm, m)
            + [float(n_talk), n_talk / weeks, float(n_main), n_main / weeks])


def content_features(markers: MarkerCounts, text: str) -> list[float]:
    """F15..F25 from a revision's markers and its plain text."""
    b = markers.byte_length
    return [
        float(b),
        float(markers.refs),
        float(markers.categories),
        float(markers.wikilinks),
        float(markers.citation_templates),
        float(markers.noncitation_templates),
        markers.images / b if b else 0.0,
        1.0 if markers.has_infobox else 0.0,
        float(markers.level2_headings),
        float(markers.level3plus_headings),
        information_noise(text),
    ]


def revision_content_features(wikitext: str) -> list[float]:
    """F15..F34 of one revision."""
    text = plain_text(wikitext)
    return content_features(parse_wikitext_markers(wikitext), text) + readability_features(text)


# -- series assembly -------------------------------------------------------------

def _editor_rows(revs, months, n):
    out = np.zeros((n, 3))
    seen: set[str] = set()
    by_month: dict[int, list[Revision]] = {}
    for r, k in zip(revs, months):
        by_month.setdefault(k, []).append(r)
    for k in sorted(by_month):
        rs = by_month[k]
        reg = {r.editor_id for r in rs if r.registered}
        if 1 <= k <= n:
            unreg = {r.editor_id for r in rs if not r.registered}
            out[k - 1] = (len(reg), len(reg - seen), len(unreg))
        seen |= reg
    return out


def _activity_rows(revs, months, n):
    out = np.zeros((n, 3))  # mean gap, var gap, count
    gaps: dict[int, list[float]] = {}
    for a, b, k in zip(revs, revs[1:], months[1:]):
        gaps.setdefault(k, []).append((b.timestamp - a.timestamp).total_seconds() / 86400.0)
    for k, g in gaps.items():
        if 1 <= k <= n and len(g) >= 2:
            arr = np.asarray(g)
            out[k - 1, 0] = arr.mean()
            out[k - 1, 1] = arr.var()
    for k in months:
        if 1 <= k <= n:
            out[k - 1, 2] += 1
    return out


def build_series(history: PageHistory, labels: Sequence[QualityLabelEvent],
                 cal: MonthCalendar) -> ArticleSeries:
    """Monthly 34-feature matrix, validity mask and ground-truth change points.

    Months before the creation month are invalid (zero rows). Ground-truth
    points falling on or before the first valid month coincide with the
    segmentation bookend and are dropped.
    """
    if not history.main_revisions:
        raise ValueError(f"{history.article_id}: no main-page revisions")
    n = cal.n_months
    created = max(1, cal.raw_index(history.creation_time))
    if created > n:
        raise ValueError(f"{history.article_id}: created after the calendar window")
    valid = np.zeros(n, dtype=bool)
    valid[created - 1:] = True

    main, talk = history.main_revisions, history.talk_revisions
    mm, tm = _month_of(main, cal), _month_of(talk, cal)
    mat = np.zeros((n, N_FEATURES))
    mat[:, 0:3] = _editor_rows(talk, tm, n)
    mat[:, 3:6] = _editor_rows(main, mm, n)
    main_act = _activity_rows(main, mm, n)
    talk_act = _activity_rows(talk, tm, n)
    weeks = np.array([cal.days_in_month(k) / 7.0 for k in range(1, n + 1)])
    mat[:, 6:8] = main_act[:, :2]
    mat[:, 8:10] = talk_act[:, :2]
    mat[:, 10] = talk_act[:, 2]
    mat[:, 11] = talk_act[:, 2] / weeks
    mat[:, 12] = main_act[:, 2]
    mat[:, 13] = main_act[:, 2] / weeks

    # latest main revision at or before each month, carried forward
    cache: dict[int, list[float]] = {}
    for k in range(created, n + 1):
        j = bisect_right(mm, k) - 1
        if j < 0:
            continue
        if j not in cache:
            cache[j] = revision_content_features(main[j].wikitext)
        mat[k - 1, 14:] = cache[j]
    mat[~valid] = 0.0

    first = created
    gt = tuple(p for p in ground_truth_changepoints(labels, cal) if p > first)
    latest = labels[-1].merged_class if labels else None
    return ArticleSeries(history.article_id, cal, mat, valid, gt, latest)


# -- corpus-level analyses -------------------------------------------------------

@dataclass
class Correlation:
    matrix: np.ndarray
    constant_features: list[str]
    monthly_means: np.ndarray


def correlation_matrix(corpus: Sequence[ArticleSeries]) -> Correlation:
    """Pearson correlation between features of the cross-article monthly mean.

    Each feature is averaged over the articles valid in each month, giving
    one series per feature; correlations against a constant series are 0.
    """
    if len(corpus) < 2:
        raise ValueError("correlation needs at least two articles")
    cal = corpus[0].calendar
    if any(s.calendar != cal for s in corpus):
        raise ValueError("articles must share a calendar")
    stack = np.stack([np.where(s.valid[:, None], s.matrix, np.nan) for s in corpus])
    have = np.any(~np.isnan(stack[:, :, 0]), axis=0)
    with np.errstate(invalid="ignore"):
        means = np.nanmean(stack[:, have, :], axis=0)
    centered = means - means.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    const = norms <= 1e-12 * np.maximum(1.0, np.abs(means).max(axis=0))
    safe = np.where(const, 1.0, norms)
    r = (centered.T @ centered) / np.outer(safe, safe)
    r[const, :] = 0.0
    r[:, const] = 0.0
    r = np.clip(r, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    names = list(corpus[0].feature_names)
    return Correlation(r, [names[i] for i in np.flatnonzero(const)], means)


@dataclass
class WindowMeans:
    means: np.ndarray  # features x window
    change_index: int  # 0-based position of the change month in the window
    n_articles: int
    skipped: list[str]


def change_window_means(corpus: Iterable[ArticleSeries], window: int = 24,
                        pick: Callable[[ArticleSeries], int | None] | None = None) -> WindowMeans:
    """Average each feature over articles aligned on a change point.

    The window holds ``window`` consecutive months with the change month at
    position ``window // 2``. ``pick`` chooses the change month of an
    article (default: its first ground-truth point). Articles without a
    point or without a full valid window are skipped with a warning.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    before = window // 2
    rows, skipped, width = [], [], None
    for s in corpus:
        width = s.matrix.shape[1]
        q = pick(s) if pick is not None else (s.ground_truth[0] if s.ground_truth else None)
        lo = None if q is None else q - before
        if q is None or lo < 1 or lo + window - 1 > s.calendar.n_months \
                or not s.valid[lo - 1:lo - 1 + window].all():
            log.warning("%s: no full %d-month window around a change point", s.article_id, window)
            skipped.append(s.article_id)
            continue
        rows.append(s.matrix[lo - 1:lo - 1 + window])
    if not rows:
        return WindowMeans(np.zeros((width or N_FEATURES, window)), before, 0, skipped)
    return WindowMeans(np.mean(np.stack(rows), axis=0).T, before, len(rows), skipped)
