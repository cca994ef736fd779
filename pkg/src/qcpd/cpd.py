"""Offline multivariate change-point detectors.

All detectors take an ``(N, d)`` array and return change points as 1-based
row indices of the first row of each new segment, so a split between rows
10 and 11 is reported as ``11``.

PELT and the exhaustive oracle minimise

    sum(segment costs) + pen * (number of change points)

BinSeg greedily applies the best single split ``n_bkps`` times, and ECP is
the E-Divisive energy-distance procedure with a permutation test.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .evaluation import EvalReport, aggregate_report

log = logging.getLogger(__name__)

ALGORITHMS = ("binseg", "pelt", "ecp")


def _as_2d(series) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError("series must be 1-D or 2-D")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def _prefix2d(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[1:, 1:] = mat.cumsum(axis=0).cumsum(axis=1)
    return out


def sq_distances(x: np.ndarray) -> np.ndarray:
    sq = (x * x).sum(axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def median_heuristic_gamma(x: np.ndarray) -> float:
    """1 / median pairwise squared distance; 1.0 when that median is 0."""
    x = _as_2d(x)
    if x.shape[0] < 2:
        return 1.0
    d = sq_distances(x)[np.triu_indices(x.shape[0], 1)]
    med = float(np.median(d))
    return 1.0 / med if med > 0 else 1.0


class SegmentCost:
    """Kernel within-segment scatter ``sum_i k(y_i, y_i) - sum_ij k(y_i, y_j) / n``.

    After :meth:`fit`, :meth:`error` is O(1) through prefix sums of the Gram
    matrix. Segments are 0-based half-open ``[a, b)``.
    """

    kind = "kernel"

    def gram(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def fit(self, series) -> "SegmentCost":
        x = _as_2d(series)
        k = self.gram(x)
        self.n_samples = x.shape[0]
        self.diag_ = np.concatenate(([0.0], np.cumsum(np.diag(k))))
        self.gram_ = _prefix2d(k)
        return self

    def error(self, a: int, b: int) -> float:
        if b <= a:
            raise ValueError(f"empty segment [{a}, {b})")
        return kernels._pykernels.segment_cost(self.diag_, self.gram_, a, b)

    def params(self) -> dict:
        return {"kind": self.kind}


class RBFCost(SegmentCost):
    """Gaussian-kernel cost; ``gamma=None`` picks the median heuristic per series."""

    kind = "rbf"

    def __init__(self, gamma: float | None = None):
        if gamma is not None and not gamma > 0:
            raise ValueError("gamma must be positive")
        self.gamma = gamma
        self.gamma_ = gamma

    def gram(self, x):
        self.gamma_ = median_heuristic_gamma(x) if self.gamma is None else self.gamma
        return np.exp(-self.gamma_ * sq_distances(x))

    def params(self):
        return {"kind": self.kind, "gamma": self.gamma_,
                "gamma_rule": "median" if self.gamma is None else "fixed"}


class L2Cost(SegmentCost):
    """Sum of squared deviations from the segment mean (linear kernel)."""

    kind = "l2"

    def gram(self, x):
        return x @ x.T


def make_cost(kind: str | SegmentCost = "rbf", gamma: float | None = None) -> SegmentCost:
    if isinstance(kind, SegmentCost):
        return kind
    kind = kind.lower()
    if kind == "rbf":
        return RBFCost(gamma)
    if kind == "l2":
        return L2Cost()
    raise ValueError(f"unknown cost {kind!r}")


def cost_rbf(series, i: int, j: int, gamma: float | None = None) -> float:
    """RBF cost of rows ``i .. j-1`` (1-based); gamma defaults to the median heuristic."""
    x = _as_2d(series)
    if not 1 <= i < j <= x.shape[0] + 1:
        raise ValueError(f"invalid segment [{i}, {j})")
    return RBFCost(gamma).fit(x).error(i - 1, j - 1)


def _fitted(series, cost) -> SegmentCost:
    c = make_cost(cost)
    c.fit(series)
    return c


def _to_points(bkps: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(b) + 1 for b in bkps)


# -- detectors -------------------------------------------------------------------

def detect_pelt(series, cost: str | SegmentCost = "rbf", pen: float = 1.0,
                min_size: int = 2) -> tuple[int, ...]:
    """Exact penalized segmentation (linear penalty) with PELT pruning."""
    if not pen > 0:
        raise ValueError("pen must be positive")
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    if math.isinf(pen):
        return ()
    c = _fitted(series, cost)
    bkps, _ = kernels.impl().pelt(c.diag_, c.gram_, float(pen), int(min_size))
    return _to_points(bkps)


def detect_binseg(series, cost: str | SegmentCost = "rbf", n_bkps: int = 1,
                  min_size: int = 2) -> tuple[int, ...]:
    """Greedy binary segmentation with exactly ``n_bkps`` splits when possible.

    Each round splits the segment whose best split has the largest cost
    reduction; ties go to the smallest index. A constant series therefore
    still receives its forced split at the first admissible position.
    """
    if n_bkps < 1:
        raise ValueError("n_bkps must be >= 1")
    x = _as_2d(series)
    n = x.shape[0]
    if n < 2 * min_size:
        log.warning("series of length %d too short for binary segmentation", n)
        return ()
    if n_bkps >= n:
        raise ValueError("n_bkps must be smaller than the series length")
    c = _fitted(x, cost)
    k = kernels.impl()
    best = {(0, n): k.best_split(c.diag_, c.gram_, 0, n, min_size)}
    bkps: list[int] = []
    for _ in range(n_bkps):
        seg, choice = None, None
        for s in sorted(best):
            gain, pos = best[s]
            if pos < 0:
                continue
            if choice is None or gain > choice[0] or (gain == choice[0] and pos < choice[1]):
                seg, choice = s, (gain, pos)
        if seg is None:
            break
        a, b = seg
        pos = choice[1]
        del best[seg]
        bkps.append(pos)
        best[(a, pos)] = k.best_split(c.diag_, c.gram_, a, pos, min_size)
        best[(pos, b)] = k.best_split(c.diag_, c.gram_, pos, b, min_size)
    return _to_points(sorted(bkps))


@dataclass
class ECPResult:
    points: tuple[int, ...]
    p_values: list[float] = field(default_factory=list)
    statistics: list[float] = field(default_factory=list)


def _best_over(k, P, segments, min_size):
    best = (-math.inf, -1, None)
    for seg in segments:
        stat, tau, _ = k.energy_best(P, seg[0], seg[1], min_size)
        if tau >= 0 and stat > best[0]:
            best = (stat, tau, seg)
    return best


def ecp_divisive(series, min_size: int = 5, permutations: int = 199, alpha: float = 0.05,
                 exponent: float = 1.0, seed: int | np.random.Generator = 0,
                 max_points: int | None = None) -> ECPResult:
    """E-Divisive with the full result (points plus test p-values).

    At each round the split with the largest scaled energy divergence over
    all current segments is tested by permuting rows within each segment
    ``permutations`` times; it is kept when the permutation p-value
    ``(1 + #{perm stat >= observed}) / (permutations + 1)`` is below
    ``alpha``.
    """
    if min_size < 2:
        raise ValueError("min_size must be >= 2 for energy statistics")
    if not 0 < exponent <= 2:
        raise ValueError("exponent must lie in (0, 2]")
    x = _as_2d(series)
    n = x.shape[0]
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    result = ECPResult(())
    if n < 2 * min_size:
        return result
    dist = np.sqrt(sq_distances(x)) ** exponent
    P = _prefix2d(dist)
    k = kernels.impl()
    segments = [(0, n)]
    found: list[int] = []
    while max_points is None or len(found) < max_points:
        stat, tau, seg = _best_over(k, P, segments, min_size)
        if seg is None:
            break
        exceed = 0
        for _ in range(permutations):
            perm = np.concatenate([a + rng.permutation(b - a) for a, b in segments])
            Pp = _prefix2d(dist[np.ix_(perm, perm)])
            if _best_over(k, Pp, segments, min_size)[0] >= stat:
                exceed += 1
        p = (exceed + 1) / (permutations + 1)
        result.p_values.append(p)
        result.statistics.append(stat)
        if not p < alpha:
            break
        found.append(tau)
        segments.remove(seg)
        segments.extend([(seg[0], tau), (tau, seg[1])])
        segments.sort()
    result.points = _to_points(sorted(found))
    return result


def detect_ecp(series, min_size: int = 5, permutations: int = 199, alpha: float = 0.05,
               seed: int | np.random.Generator = 0, exponent: float = 1.0) -> tuple[int, ...]:
    return ecp_divisive(series, min_size, permutations, alpha, exponent, seed).points


# -- exhaustive oracle -----------------------------------------------------------

ORACLE_MAX_N = 30


@dataclass
class Segmentation:
    points: tuple[int, ...]
    segments: list[tuple[int, int]]  # 1-based inclusive (first, last)
    cost: float


def segments_from_points(points: Sequence[int], n: int) -> list[tuple[int, int]]:
    edges = [1, *points, n + 1]
    return [(a, b - 1) for a, b in zip(edges, edges[1:])]


def oracle_optimal_segmentation(series, cost: str | SegmentCost = "rbf", pen: float = 1.0,
                                min_size: int = 2) -> Segmentation:
    """Unpruned O(N^2) dynamic programme over every admissible last split.

    Plain Python on purpose; it is the independent check for ``detect_pelt``
    and only accepts short series.
    """
    x = _as_2d(series)
    n = x.shape[0]
    if n > ORACLE_MAX_N:
        raise ValueError(f"oracle limited to N <= {ORACLE_MAX_N}")
    c = _fitted(x, cost)
    if n < min_size:
        return Segmentation((), [(1, n)] if n else [], 0.0)
    f = [math.inf] * (n + 1)
    prev = [0] * (n + 1)
    f[0] = -pen
    for s in range(min_size, n + 1):
        for t in range(0, s - min_size + 1):
            if 0 < t < min_size or math.isinf(f[t]):
                continue
            v = (f[t] + c.error(t, s)) + pen
            if v < f[s]:
                f[s], prev[s] = v, t
    bkps = []
    s = n
    while s > 0:
        s = prev[s]
        if s > 0:
            bkps.append(s)
    pts = _to_points(sorted(bkps))
    return Segmentation(pts, segments_from_points(pts, n), f[n])


def penalized_cost(series, points: Sequence[int], cost: str | SegmentCost = "rbf",
                   pen: float = 1.0) -> float:
    """Objective value of an arbitrary segmentation (1-based points)."""
    x = _as_2d(series)
    c = _fitted(x, cost)
    edges = [0, *[p - 1 for p in points], x.shape[0]]
    return sum(c.error(a, b) for a, b in zip(edges, edges[1:])) + pen * len(points)


# -- configuration and ensemble ----------------------------------------------------

@dataclass
class DetectorConfig:
    algorithm: str = "pelt"
    cost: str = "rbf"
    gamma: float | None = None
    n_bkps: int = 1
    pen: float = 1.0
    min_size: int | None = None
    permutations: int = 199
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        self.algorithm = self.algorithm.lower()
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")

    @property
    def effective_min_size(self) -> int:
        if self.min_size is not None:
            return self.min_size
        return 5 if self.algorithm == "ecp" else 2

    def hyperparameters(self) -> dict:
        if self.algorithm == "binseg":
            return {"n_bkps": self.n_bkps, "cost": self.cost, "min_size": self.effective_min_size}
        if self.algorithm == "pelt":
            return {"pen": self.pen, "cost": self.cost, "min_size": self.effective_min_size}
        return {"min_size": self.effective_min_size, "permutations": self.permutations,
                "alpha": self.alpha}

    def to_dict(self) -> dict:
        return asdict(self)


def run_detector(series, config: DetectorConfig, seed: int | None = None):
    """Apply ``config`` to one series; returns ``(points, metadata)``."""
    x = _as_2d(series)
    meta: dict = {}
    if config.algorithm == "ecp":
        s = config.seed if seed is None else seed
        pts = detect_ecp(x, config.effective_min_size, config.permutations, config.alpha, seed=s)
        meta["seed"] = s
        return pts, meta
    cost = make_cost(config.cost, config.gamma)
    if config.algorithm == "pelt":
        pts = detect_pelt(x, cost, config.pen, config.effective_min_size)
    else:
        pts = detect_binseg(x, cost, config.n_bkps, config.effective_min_size)
    if hasattr(cost, "params") and hasattr(cost, "diag_"):
        meta.update(cost.params())
    return pts, meta


HYBRID_DETECTORS = ("binseg", "ecp", "pelt")
_METRICS = ("covering", "precision", "recall")


def hybrid_report(reports: Mapping[str, EvalReport], mode: str = "aggregate") -> EvalReport:
    """Best-of-three evaluation ensemble; an upper bound, not a detector.

    ``aggregate`` takes, per metric, the maximum of the three corpus means.
    ``per_article`` takes the per-article maximum of each metric and then
    averages, which can exceed every individual mean.
    """
    missing = [d for d in HYBRID_DETECTORS if d not in reports]
    if missing:
        raise ValueError(f"missing detector reports: {missing}")
    reps = [reports[d] for d in HYBRID_DETECTORS]
    if mode == "aggregate":
        vals = {m: max(getattr(r, m) for r in reps) for m in _METRICS}
        return EvalReport(margin=reps[0].margin, rows=[], label="hybrid-aggregate",
                          n=reps[0].n_articles, **vals)
    if mode != "per_article":
        raise ValueError(f"unknown hybrid mode {mode!r}")
    by_id = [{row.article_id: row for row in r.rows} for r in reps]
    ids = list(by_id[0])
    if any(set(b) != set(ids) for b in by_id[1:]):
        raise ValueError("detector reports cover different articles")
    rows = []
    for aid in ids:
        rs = [b[aid] for b in by_id]
        best = max(rs, key=lambda r: r.covering)
        rows.append(best.replace(
            covering=max(r.covering for r in rs),
            precision=max(r.precision for r in rs),
            recall=max(r.recall for r in rs),
        ))
    return aggregate_report(rows, margin=reps[0].margin, label="hybrid-per-article")
