"""Experiment harness: splits, synthetic corpora, corpus detection, tuning, ablation."""
from __future__ import annotations

import logging
import math
import random
import zlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import MonthCalendar, QualityClass
from .cpd import DetectorConfig, hybrid_report, run_detector
from .evaluation import EvalReport, aggregate_report, evaluate_article
from .features import ArticleSeries, group_columns, resolve_group

log = logging.getLogger(__name__)


# -- splits -----------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusSplit:
    train: tuple[str, ...]
    test: tuple[str, ...]
    ratio: float = 0.8


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _class_key(s) -> str:
    cls = s.latest_class if isinstance(s, ArticleSeries) else s[1]
    if cls is None:
        return "none"
    return QualityClass(cls).name


def split_train_test(corpus: Sequence, ratio: float = 0.8, seed: int = 0) -> CorpusSplit:
    """Stratified shuffle split by latest merged class.

    ``corpus`` holds :class:`ArticleSeries` or ``(article_id, class)`` pairs.
    Each class sends ``round(n * (1 - ratio))`` articles to the test side;
    classes with fewer than two articles stay entirely in train.
    """
    if not 0 < ratio <= 1:
        raise ValueError("ratio must lie in (0, 1]")
    if ratio == 1:
        log.warning("train ratio 1.0: the test set is empty")
    strata: dict[str, list[str]] = {}
    for item in corpus:
        aid = item.article_id if isinstance(item, ArticleSeries) else item[0]
        strata.setdefault(_class_key(item), []).append(aid)
    rng = random.Random(seed)
    train, test = [], []
    for key in sorted(strata):
        ids = sorted(strata[key])
        if len(ids) < 2:
            log.warning("class %s has %d article(s); all go to train", key, len(ids))
            train.extend(ids)
            continue
        rng.shuffle(ids)
        k = _round_half_up(len(ids) * (1 - ratio))
        test.extend(ids[:k])
        train.extend(ids[k:])
    return CorpusSplit(tuple(sorted(train)), tuple(sorted(test)), ratio)


def subset(corpus: Iterable[ArticleSeries], ids: Iterable[str]) -> list[ArticleSeries]:
    keep = set(ids)
    return [s for s in corpus if s.article_id in keep]


def filter_corpus(corpus: Iterable[ArticleSeries], min_changepoints: int = 1,
                  latest_class: QualityClass | str | None = None) -> list[ArticleSeries]:
    """Articles with at least ``min_changepoints`` true points (and a given latest class)."""
    if isinstance(latest_class, str):
        latest_class = QualityClass[latest_class.upper()]
    return [s for s in corpus
            if len(s.ground_truth) >= min_changepoints
            and (latest_class is None or s.latest_class == latest_class)]


# -- synthetic data ----------------------------------------------------------------

@dataclass
class SynthSpec:
    """Piecewise-constant mean plus Gaussian noise.

    ``breaks`` are 1-based first months of each new regime. When ``means``
    is None the regime means are drawn from the seed: each new regime moves
    every dimension by ``shift`` noise units with a random sign.
    """

    n_months: int = 156
    dims: int = 34
    breaks: tuple[int, ...] = ()
    means: np.ndarray | None = None
    noise: float = 1.0
    shift: float = 5.0
    seed: int = 0
    min_size: int = 2
    article_id: str = "synth-0"
    calendar_start: str | None = None

    def validate(self) -> None:
        if self.n_months < 2 or self.dims < 1:
            raise ValueError("need n_months >= 2 and dims >= 1")
        if self.noise < 0:
            raise ValueError("noise scale must be >= 0")
        edges = [1, *self.breaks, self.n_months + 1]
        for a, b in zip(edges, edges[1:]):
            if b - a < self.min_size:
                raise ValueError(f"breaks {self.breaks} violate min spacing {self.min_size}")
        if self.means is not None and np.shape(self.means) != (len(self.breaks) + 1, self.dims):
            raise ValueError("means must have shape (n_regimes, dims)")


def synth_generate(spec: SynthSpec) -> ArticleSeries:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n_reg = len(spec.breaks) + 1
    if spec.means is None:
        signs = rng.choice((-1.0, 1.0), size=(n_reg - 1, spec.dims))
        steps = np.vstack([np.zeros((1, spec.dims)), spec.shift * (spec.noise or 1.0) * signs])
        means = np.cumsum(steps, axis=0)
    else:
        means = np.asarray(spec.means, dtype=float)
    edges = [0, *[b - 1 for b in spec.breaks], spec.n_months]
    mat = np.empty((spec.n_months, spec.dims))
    for r, (a, b) in enumerate(zip(edges, edges[1:])):
        mat[a:b] = means[r]
    if spec.noise > 0:
        mat = mat + spec.noise * rng.standard_normal(mat.shape)
    cal = (MonthCalendar.parse(spec.calendar_start, spec.n_months) if spec.calendar_start
           else MonthCalendar.ending(2019, 6, spec.n_months))
    names = tuple(f"F{i}" for i in range(1, spec.dims + 1))
    return ArticleSeries(spec.article_id, cal, mat, np.ones(spec.n_months, dtype=bool),
                         tuple(spec.breaks), None, names)


def random_breaks(rng: np.random.Generator, n_months: int, k: int, min_gap: int) -> tuple[int, ...]:
    """``k`` sorted breaks in 2..n_months, each segment at least ``min_gap`` long.

    Sampled uniformly over admissible configurations by the stars-and-bars
    reduction: draw ``k`` distinct slots from the slack left after reserving
    ``min_gap`` months per segment, then spread them back out.
    """
    free = n_months - (k + 1) * min_gap
    if free < 0:
        raise ValueError("too many breaks for the series length")
    slots = np.sort(rng.choice(free + k, size=k, replace=False))
    return tuple(int(1 + (i + 1) * min_gap + s - i) for i, s in enumerate(slots))


def synth_corpus(n_articles: int, n_months: int = 156, dims: int = 34, n_breaks: int = 3,
                 min_gap: int = 20, shift: float = 5.0, noise: float = 1.0, seed: int = 0,
                 calendar_start: str | None = None) -> list[ArticleSeries]:
    """Independent synthetic articles; article ``i`` depends only on ``(seed, i)``."""
    out = []
    classes = list(QualityClass)
    for i in range(n_articles):
        rng = np.random.default_rng([seed, i])
        breaks = random_breaks(rng, n_months, n_breaks, min_gap) if n_breaks else ()
        spec = SynthSpec(n_months, dims, breaks, None, noise, shift,
                         int(rng.integers(2**32)), min(2, min_gap),
                         f"synth-{i:04d}", calendar_start)
        s = synth_generate(spec)
        out.append(replace(s, latest_class=classes[i % len(classes)]))
    return out


# -- corpus detection and evaluation ---------------------------------------------------

def article_seed(seed: int, article_id: str) -> int:
    """Per-article seed; independent of corpus order."""
    return (zlib.crc32(article_id.encode("utf-8")) ^ (seed * 0x9E3779B1)) & 0xFFFFFFFF


def _columns(series: ArticleSeries, features: str | None) -> list[int] | None:
    if features is None or features == "all":
        return None
    cols = group_columns(features)
    if max(cols) >= series.matrix.shape[1]:
        raise ValueError(f"feature group {features!r} needs {max(cols) + 1} columns, "
                         f"series has {series.matrix.shape[1]}")
    return cols


def detect_series(series: ArticleSeries, config: DetectorConfig,
                  features: str | None = None, scale: str = "none"):
    """Detect on the valid rows of one article; points are calendar months."""
    x = series.detection_matrix(_columns(series, features))
    if scale == "zscore":
        sd = x.std(axis=0)
        x = (x - x.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    elif scale != "none":
        raise ValueError(f"unknown scaling {scale!r}")
    offset = series.first_valid - 1
    pts, meta = run_detector(x, config, seed=article_seed(config.seed, series.article_id))
    return tuple(p + offset for p in pts), meta


def detect_corpus(corpus: Sequence[ArticleSeries], config: DetectorConfig,
                  features: str | None = None, scale: str = "none"):
    """Predictions and per-article metadata for every article."""
    preds, meta = {}, {}
    for s in corpus:
        preds[s.article_id], meta[s.article_id] = detect_series(s, config, features, scale)
    return preds, meta


def evaluate_corpus(corpus: Sequence[ArticleSeries], predictions: Mapping[str, Sequence[int]],
                    margin: int = 5, label: str = "", covering_op: str = "max") -> EvalReport:
    """Per-article metrics over each article's valid span, then unweighted means."""
    rows = []
    for s in corpus:
        if s.article_id not in predictions:
            raise KeyError(f"no prediction for article {s.article_id!r}")
        rows.append(evaluate_article(s.article_id, s.ground_truth, predictions[s.article_id],
                                     s.calendar.n_months, margin, s.first_valid, covering_op))
    return aggregate_report(rows, margin, label)


# -- tuning ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TuneGrid:
    pen_values: tuple[float, ...] = tuple(float(v) for v in range(1, 9))
    min_sizes: tuple[int, ...] = (2, 5, 10, 15, 20)
    n_bkps: tuple[int, ...] = tuple(range(1, 9))
    objective: str = "covering"

    def __post_init__(self):
        if not (self.pen_values and self.min_sizes and self.n_bkps):
            raise ValueError("tuning grids must be nonempty")
        if self.objective not in ("covering", "precision", "recall"):
            raise ValueError(f"unknown objective {self.objective!r}")

    def points(self, algorithm: str) -> list[dict]:
        """Grid points for one detector, smallest parameter first."""
        if algorithm == "pelt":
            return [{"pen": v} for v in sorted(self.pen_values)]
        if algorithm == "binseg":
            return [{"n_bkps": v} for v in sorted(self.n_bkps)]
        return [{"min_size": v} for v in sorted(self.min_sizes)]


@dataclass
class TuneResult:
    best: DetectorConfig
    best_score: float
    leaderboard: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"best": self.best.to_dict(), "best_score": self.best_score,
                "leaderboard": self.leaderboard}


def tune_hyperparameters(train: Sequence[ArticleSeries], grid: TuneGrid,
                         base: DetectorConfig, features: str | None = None,
                         margin: int = 5, min_changepoints: int = 1,
                         scale: str = "none") -> TuneResult:
    """Grid search on the training articles.

    Only articles with at least ``min_changepoints`` true points are scored.
    The highest mean objective wins; ties keep the smaller parameter.
    """
    scored = filter_corpus(train, min_changepoints)
    if not scored:
        raise ValueError("no training articles satisfy the change-point filter")
    best, best_score, board = None, -math.inf, []
    for params in grid.points(base.algorithm):
        cfg = replace(base, **params)
        preds, _ = detect_corpus(scored, cfg, features, scale)
        rep = evaluate_corpus(scored, preds, margin)
        score = getattr(rep, grid.objective)
        board.append({"params": params, "covering": rep.covering,
                      "precision": rep.precision, "recall": rep.recall})
        if score > best_score:
            best, best_score = cfg, score
    board.sort(key=lambda r: -r[grid.objective])  # stable: ties stay in grid order
    return TuneResult(best, best_score, board)


# -- ablation ---------------------------------------------------------------------------

def run_ablation(corpus: Sequence[ArticleSeries], groups: Sequence[str],
                 configs: Mapping[str, DetectorConfig], margin: int = 5,
                 scale: str = "none", hybrid: bool = True) -> list[dict]:
    """One row per (group, detector), plus HYBRID rows when all three detectors run."""
    for g in groups:
        resolve_group(g)  # reject unknown names before any work
    rows = []
    for g in groups:
        reports = {}
        for name, cfg in configs.items():
            preds, _ = detect_corpus(corpus, cfg, g, scale)
            rep = evaluate_corpus(corpus, preds, margin, label=name)
            reports[name] = rep
            rows.append(_row(g, name, rep))
        if hybrid and all(d in reports for d in ("binseg", "ecp", "pelt")):
            for mode in ("aggregate", "per_article"):
                rows.append(_row(g, f"hybrid-{mode}", hybrid_report(reports, mode)))
    return rows


def _row(group: str, detector: str, rep: EvalReport) -> dict:
    return {"group": group, "detector": detector, "n_columns": len(resolve_group(group)),
            "covering": rep.covering, "precision": rep.precision, "recall": rep.recall}
