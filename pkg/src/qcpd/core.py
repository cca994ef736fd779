"""Canonical data model: revisions, quality labels and the monthly calendar.

Month indices are 1-based throughout the package. A change point is the
index of the first month of the new segment.
"""
from __future__ import annotations

import calendar as _calendar
import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence


class PageKind(str, enum.Enum):
    MAIN = "main"
    TALK = "talk"


class QualityClass(enum.IntEnum):
    """Merged quality class. Integer value is the rank, higher is better."""

    SS = 0
    BC = 1
    AGA = 2
    FA = 3


RAW_CLASSES = ("FA", "A", "GA", "B", "C", "Start", "Stub")

_MERGE = {
    "FA": QualityClass.FA,
    "A": QualityClass.AGA,
    "GA": QualityClass.AGA,
    "B": QualityClass.BC,
    "C": QualityClass.BC,
    "Start": QualityClass.SS,
    "Stub": QualityClass.SS,
}

# canonical raw label for each merged class
CANONICAL_RAW = {
    QualityClass.FA: "FA",
    QualityClass.AGA: "GA",
    QualityClass.BC: "B",
    QualityClass.SS: "Start",
}


class UnknownQualityClass(ValueError):
    def __init__(self, token):
        super().__init__(f"unrecognized quality class: {token!r}")
        self.token = token


def merge_quality_class(raw: str | QualityClass) -> QualityClass:
    """Map one of the seven assessment classes onto the four merged classes.

    Already-merged classes pass through unchanged, as do their names
    (``"AGA"``, ``"BC"``, ``"SS"``).
    """
    if isinstance(raw, QualityClass):
        return raw
    try:
        return _MERGE[raw]
    except (KeyError, TypeError):
        pass
    if isinstance(raw, str) and raw in QualityClass.__members__:
        return QualityClass[raw]
    raise UnknownQualityClass(raw)


def normalize_raw_class(token: str) -> str | None:
    """Case/whitespace-insensitive lookup of a raw class name, or None."""
    t = token.strip().lower()
    for raw in RAW_CLASSES:
        if raw.lower() == t:
            return raw
    return None


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 / MediaWiki timestamp into an aware UTC datetime."""
    s = value.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Revision:
    timestamp: datetime
    editor_id: str
    registered: bool
    page_kind: PageKind
    wikitext: str = ""

    def __post_init__(self):
        if not self.editor_id:
            raise ValueError("editor_id must be non-empty")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")


@dataclass(frozen=True)
class PageHistory:
    article_id: str
    main_revisions: tuple[Revision, ...]
    talk_revisions: tuple[Revision, ...] = ()
    creation_time: datetime | None = None

    def __post_init__(self):
        object.__setattr__(self, "main_revisions", tuple(self.main_revisions))
        object.__setattr__(self, "talk_revisions", tuple(self.talk_revisions))
        for revs in (self.main_revisions, self.talk_revisions):
            for a, b in zip(revs, revs[1:]):
                if b.timestamp < a.timestamp:
                    raise ValueError(f"{self.article_id}: revisions out of order")
        firsts = [r[0].timestamp for r in (self.main_revisions, self.talk_revisions) if r]
        if self.creation_time is None:
            if firsts:
                object.__setattr__(self, "creation_time", min(firsts))
        elif firsts and self.creation_time > min(firsts):
            raise ValueError(f"{self.article_id}: creation_time after first revision")

    @classmethod
    def from_revisions(cls, article_id: str, revisions: Iterable[Revision]) -> "PageHistory":
        """Split mixed revisions by page kind, stably sorted by timestamp."""
        revs = sorted(revisions, key=lambda r: r.timestamp)
        return cls(
            article_id,
            tuple(r for r in revs if r.page_kind is PageKind.MAIN),
            tuple(r for r in revs if r.page_kind is PageKind.TALK),
        )


@dataclass(frozen=True)
class QualityLabelEvent:
    timestamp: datetime
    raw_class: str
    merged_class: QualityClass = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "merged_class", merge_quality_class(self.raw_class))


@dataclass(frozen=True)
class MonthCalendar:
    """A run of consecutive calendar months, indexed 1..n_months."""

    start_year: int = 2006
    start_month: int = 7
    n_months: int = 156

    def __post_init__(self):
        if self.n_months < 2:
            raise ValueError("n_months must be >= 2")
        if not 1 <= self.start_month <= 12:
            raise ValueError("start_month must be in 1..12")

    @classmethod
    def ending(cls, year: int, month: int, n_months: int = 156) -> "MonthCalendar":
        k = year * 12 + (month - 1) - (n_months - 1)
        return cls(k // 12, k % 12 + 1, n_months)

    @classmethod
    def parse(cls, start: str, n_months: int = 156) -> "MonthCalendar":
        """Build from a ``YYYY-MM`` start string."""
        y, m = start.split("-")
        return cls(int(y), int(m), n_months)

    @property
    def label(self) -> str:
        return f"{self.start_year:04d}-{self.start_month:02d}"

    def _ordinal(self, year: int, month: int) -> int:
        return (year * 12 + month - 1) - (self.start_year * 12 + self.start_month - 1) + 1

    def raw_index(self, dt: datetime) -> int:
        """1-based month index, possibly outside 1..n_months."""
        dt = dt.astimezone(timezone.utc)
        return self._ordinal(dt.year, dt.month)

    def index(self, dt: datetime) -> int | None:
        i = self.raw_index(dt)
        return i if 1 <= i <= self.n_months else None

    def year_month(self, index: int) -> tuple[int, int]:
        k = self.start_year * 12 + self.start_month - 1 + index - 1
        return k // 12, k % 12 + 1

    def month_start(self, index: int) -> datetime:
        y, m = self.year_month(index)
        return datetime(y, m, 1, tzinfo=timezone.utc)

    def days_in_month(self, index: int) -> int:
        y, m = self.year_month(index)
        return _calendar.monthrange(y, m)[1]


DEFAULT_CALENDAR = MonthCalendar.ending(2019, 6, 156)


def validate_changepoints(points: Iterable[int], n_months: int) -> tuple[int, ...]:
    pts = tuple(int(p) for p in points)
    for a, b in zip(pts, pts[1:]):
        if b <= a:
            raise ValueError(f"change points not strictly increasing: {pts}")
    if pts and (pts[0] <= 1 or pts[-1] > n_months):
        raise ValueError(f"change points outside (1, {n_months}]: {pts}")
    return pts


def bin_monthly(history: PageHistory, cal: MonthCalendar,
                kind: PageKind = PageKind.MAIN) -> list[Revision | None]:
    """Latest revision of each month, or None; list position 0 is month 1.

    Equal timestamps resolve to the later element in input order.
    """
    revs = history.main_revisions if kind is PageKind.MAIN else history.talk_revisions
    out: list[Revision | None] = [None] * cal.n_months
    for rev in revs:
        i = cal.index(rev.timestamp)
        if i is None:
            continue
        cur = out[i - 1]
        if cur is None or rev.timestamp >= cur.timestamp:
            out[i - 1] = rev
    return out


def ground_truth_changepoints(events: Sequence[QualityLabelEvent],
                              cal: MonthCalendar) -> tuple[int, ...]:
    """Months in which the merged quality class switched.

    The first assessment is not a change. Several switches inside one month
    collapse to a single point. Switches outside the calendar window update
    the running class but emit nothing; month 1 is never emitted since it is
    the segmentation bookend.
    """
    points: list[int] = []
    prev = None
    for ev in events:
        cls = ev.merged_class
        if prev is not None and cls != prev:
            i = cal.index(ev.timestamp)
            if i is not None and i > 1 and (not points or points[-1] != i):
                points.append(i)
        prev = cls
    return tuple(points)


def monthly_classes(events: Sequence[QualityLabelEvent],
                    cal: MonthCalendar) -> list[QualityClass | None]:
    """Merged class in force at the end of each month (None before the first label)."""
    out: list[QualityClass | None] = [None] * cal.n_months
    cur = None
    j = 0
    evs = list(events)
    for m in range(1, cal.n_months + 1):
        while j < len(evs) and cal.raw_index(evs[j].timestamp) <= m:
            cur = evs[j].merged_class
            j += 1
        out[m - 1] = cur
    return out
