"""Temporal patterns of quality-label sequences.

Classifies label sequences (promotion, demotion, both, no change), collects
transition timing statistics and finds cyclic switches such as
``BC -> SS -> BC``.
"""
from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Sequence

from .core import QualityClass, QualityLabelEvent

RAPID_TURNAROUND_DAYS = 15.0


class TrajectoryKind(str, enum.Enum):
    ONLY_PROMOTION = "OnlyPromotion"
    ONLY_DEMOTION = "OnlyDemotion"
    BOTH = "Both"
    NO_CHANGE = "NoChange"


@dataclass(frozen=True)
class QualityTrajectory:
    article_id: str
    labeled: tuple[tuple[datetime, QualityClass], ...]
    creation_time: datetime | None = None

    def __post_init__(self):
        object.__setattr__(self, "labeled", tuple(self.labeled))
        for (a, _), (b, _) in zip(self.labeled, self.labeled[1:]):
            if b <= a:
                raise ValueError(f"{self.article_id}: label instants must increase")

    @classmethod
    def from_events(cls, article_id: str, events: Iterable[QualityLabelEvent],
                    creation_time: datetime | None = None) -> "QualityTrajectory":
        """Build from label events; same-instant events keep the last one."""
        pairs: list[tuple[datetime, QualityClass]] = []
        for ev in events:
            if pairs and pairs[-1][0] == ev.timestamp:
                pairs[-1] = (ev.timestamp, ev.merged_class)
            else:
                pairs.append((ev.timestamp, ev.merged_class))
        return cls(article_id, tuple(pairs), creation_time)


@dataclass(frozen=True)
class CyclicSwitch:
    class_sequence: tuple[QualityClass, ...]
    start: datetime
    end: datetime

    @property
    def length(self) -> int:
        return len(self.class_sequence)

    @property
    def turnaround(self) -> float:
        """Days from the first to the last label of the switch."""
        return (self.end - self.start).total_seconds() / 86400.0


@dataclass
class TransitionStat:
    from_class: QualityClass
    to_class: QualityClass
    count: int = 0
    avg_days: float = 0.0
    sd_days: float = 0.0

    @property
    def hops(self) -> int:
        return abs(int(self.from_class) - int(self.to_class))


def dedupe(labeled: Sequence[tuple[datetime, QualityClass]]):
    """Drop consecutive repeats, keeping the first instant of each run."""
    out: list[tuple[datetime, QualityClass]] = []
    for t, c in labeled:
        if not out or out[-1][1] != c:
            out.append((t, c))
    return out


def classify_trajectory(t: QualityTrajectory) -> TrajectoryKind:
    if not t.labeled:
        raise ValueError(f"{t.article_id}: empty label sequence")
    seq = [c for _, c in dedupe(t.labeled)]
    if len(seq) <= 1:
        return TrajectoryKind.NO_CHANGE
    ups = any(b > a for a, b in zip(seq, seq[1:]))
    downs = any(b < a for a, b in zip(seq, seq[1:]))
    if ups and downs:
        return TrajectoryKind.BOTH
    return TrajectoryKind.ONLY_PROMOTION if ups else TrajectoryKind.ONLY_DEMOTION


def transition_gaps(t: QualityTrajectory):
    """(from, to, days) for each adjacent pair of the deduplicated sequence."""
    d = dedupe(t.labeled)
    return [(a[1], b[1], (b[0] - a[0]).total_seconds() / 86400.0)
            for a, b in zip(d, d[1:])]


@dataclass
class _Moments:
    # Welford accumulator, mergeable so per-article work can be folded
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "_Moments") -> "_Moments":
        if other.n == 0:
            return _Moments(self.n, self.mean, self.m2)
        if self.n == 0:
            return _Moments(other.n, other.mean, other.m2)
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return _Moments(n, mean, m2)


def transition_stats(corpus: Iterable[QualityTrajectory],
                     kinds: Iterable[TrajectoryKind] | None = None) -> list[TransitionStat]:
    """Per (from, to) pair: count, mean and population SD of elapsed days.

    A path SS -> BC -> FA contributes once to SS -> BC and once to BC -> FA.
    ``kinds`` restricts the corpus to trajectories of those kinds.
    """
    wanted = set(kinds) if kinds is not None else None
    acc: dict[tuple[QualityClass, QualityClass], _Moments] = defaultdict(_Moments)
    for t in corpus:
        if wanted is not None and classify_trajectory(t) not in wanted:
            continue
        for a, b, days in transition_gaps(t):
            acc[(a, b)].add(days)
    out = []
    for (a, b), m in sorted(acc.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        sd = math.sqrt(m.m2 / m.n) if m.n else 0.0
        out.append(TransitionStat(a, b, m.n, m.mean, sd))
    return out


def find_cyclic_switches(t: QualityTrajectory) -> list[CyclicSwitch]:
    """Minimal cycles returning to their starting class, from every start index."""
    d = dedupe(t.labeled)
    out = []
    for i in range(len(d)):
        for j in range(i + 2, len(d)):
            if d[j][1] == d[i][1]:
                out.append(CyclicSwitch(tuple(c for _, c in d[i:j + 1]), d[i][0], d[j][0]))
                break
    return out


@dataclass
class SwitchHistograms:
    by_length: dict[int, int] = field(default_factory=dict)
    switches_per_article: dict[int, int] = field(default_factory=dict)
    articles_with_switch: int = 0
    articles_by_length: dict[int, int] = field(default_factory=dict)
    rapid_switches: int = 0
    rapid_articles: int = 0
    rapid_by_length: dict[int, int] = field(default_factory=dict)
    mean_turnaround_days: float = 0.0
    top_sequences: list[tuple[tuple[str, ...], int]] = field(default_factory=list)


def switch_histograms(corpus: Iterable[QualityTrajectory],
                      rapid_days: float = RAPID_TURNAROUND_DAYS) -> SwitchHistograms:
    """Switch counts by length, per article, and for turnarounds under ``rapid_days``.

    ``switches_per_article`` only counts articles with at least one switch.
    ``rapid_articles`` counts articles whose fastest switch is under the
    threshold.
    """
    by_length: Counter = Counter()
    per_article: Counter = Counter()
    articles_by_length: Counter = Counter()
    rapid_by_length: Counter = Counter()
    sequences: Counter = Counter()
    n_art = rapid_sw = rapid_art = 0
    total_turn = 0.0
    n_sw = 0
    for t in corpus:
        sw = find_cyclic_switches(t)
        if not sw:
            continue
        n_art += 1
        per_article[len(sw)] += 1
        for length in {s.length for s in sw}:
            articles_by_length[length] += 1
        for s in sw:
            by_length[s.length] += 1
            sequences[tuple(c.name for c in s.class_sequence)] += 1
            total_turn += s.turnaround
            n_sw += 1
            if s.turnaround < rapid_days:
                rapid_sw += 1
                rapid_by_length[s.length] += 1
        if min(s.turnaround for s in sw) < rapid_days:
            rapid_art += 1
    return SwitchHistograms(
        by_length=dict(sorted(by_length.items())),
        switches_per_article=dict(sorted(per_article.items())),
        articles_with_switch=n_art,
        articles_by_length=dict(sorted(articles_by_length.items())),
        rapid_switches=rapid_sw,
        rapid_articles=rapid_art,
        rapid_by_length=dict(sorted(rapid_by_length.items())),
        mean_turnaround_days=total_turn / n_sw if n_sw else 0.0,
        top_sequences=sorted(sequences.items(), key=lambda kv: (-kv[1], kv[0])),
    )


def first_assessment_delay(corpus: Iterable[QualityTrajectory]):
    """For no-change articles: per class count, mean and SD of days from creation
    to the first assessment. Articles without a creation time are skipped."""
    acc: dict[QualityClass, _Moments] = defaultdict(_Moments)
    for t in corpus:
        if t.creation_time is None or classify_trajectory(t) is not TrajectoryKind.NO_CHANGE:
            continue
        first_t, cls = t.labeled[0]
        acc[cls].add((first_t - t.creation_time).total_seconds() / 86400.0)
    return {c: (m.n, m.mean, math.sqrt(m.m2 / m.n) if m.n else 0.0)
            for c, m in sorted(acc.items(), reverse=True)}


def class_flow(corpus: Iterable[QualityTrajectory], t0: datetime, t1: datetime):
    """Counts of (class at t0, class at t1) pairs, for alluvial-style plots.

    Articles unlabeled at ``t0`` are reported with ``None`` as source class.
    """
    flows: Counter = Counter()
    for t in corpus:
        def at(when):
            cur = None
            for ts, c in t.labeled:
                if ts > when:
                    break
                cur = c
            return cur
        end = at(t1)
        if end is None:
            continue
        flows[(at(t0), end)] += 1
    return dict(flows)


def trajectory_report(corpus: Sequence[QualityTrajectory]) -> dict:
    """JSON-ready summary: kind counts, transition tables, switch histograms."""
    kinds = Counter(classify_trajectory(t).value for t in corpus)

    def table(stats):
        return [{"from": s.from_class.name, "to": s.to_class.name, "hops": s.hops,
                 "count": s.count, "avg_days": s.avg_days, "sd_days": s.sd_days}
                for s in stats]

    h = switch_histograms(corpus)
    return {
        "schema_version": 1,
        "n_articles": len(corpus),
        "kinds": {k.value: kinds.get(k.value, 0) for k in TrajectoryKind},
        "transitions": {
            "all": table(transition_stats(corpus)),
            "only_promotion": table(transition_stats(corpus, [TrajectoryKind.ONLY_PROMOTION])),
            "only_demotion": table(transition_stats(corpus, [TrajectoryKind.ONLY_DEMOTION])),
        },
        "no_change_first_assessment": [
            {"class": c.name, "count": n, "mean_days": mu, "sd_days": sd}
            for c, (n, mu, sd) in first_assessment_delay(corpus).items()
        ],
        "switches": {
            "by_length": {str(k): v for k, v in h.by_length.items()},
            "articles_by_length": {str(k): v for k, v in h.articles_by_length.items()},
            "switches_per_article": {str(k): v for k, v in h.switches_per_article.items()},
            "articles_with_switch": h.articles_with_switch,
            "rapid_threshold_days": RAPID_TURNAROUND_DAYS,
            "rapid_switches": h.rapid_switches,
            "rapid_articles": h.rapid_articles,
            "rapid_by_length": {str(k): v for k, v in h.rapid_by_length.items()},
            "mean_turnaround_days": h.mean_turnaround_days,
            "top_sequences": [{"sequence": list(s), "count": n} for s, n in h.top_sequences[:10]],
        },
    }
