"""Segmentation metrics: Jaccard covering and margin-matched precision/recall."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence


def jaccard(s: Iterable[int], s2: Iterable[int]) -> float:
    a, b = set(s), set(s2)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def partition(points: Sequence[int], n: int, start: int = 1) -> list[range]:
    """Segments of months ``start..n`` induced by change points."""
    inner = [p for p in points if start < p <= n]
    edges = [start, *inner, n + 1]
    return [range(a, b) for a, b in zip(edges, edges[1:])]


def _interval_jaccard(a: range, b: range) -> float:
    inter = max(0, min(a.stop, b.stop) - max(a.start, b.start))
    return inter / (len(a) + len(b) - inter)


def covering(gt: Sequence[int], pred: Sequence[int], n: int, start: int = 1,
             op: str = "max") -> float:
    """Covering of the ground-truth partition by the predicted one.

    ``op="min"`` swaps the inner maximum for a minimum; it exists only to
    reproduce that reading of the metric and is not a useful score.
    """
    if n < start:
        raise ValueError("empty timeline")
    pick = max if op == "max" else min if op == "min" else None
    if pick is None:
        raise ValueError(f"unknown covering op {op!r}")
    g_parts = partition(gt, n, start)
    p_parts = partition(pred, n, start)
    total = sum(len(s) * pick(_interval_jaccard(s, s2) for s2 in p_parts) for s in g_parts)
    return total / (n - start + 1)


def match_true_positives(gt: Sequence[int], pred: Sequence[int], margin: int) -> list[tuple[int, int]]:
    """One-to-one matching of true and predicted points within ``margin``.

    True points are taken in increasing order and each takes the smallest
    unused prediction inside its window. This yields a maximum-cardinality
    matching (earliest-deadline rule on intervals of equal width).
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    preds = sorted(set(pred))
    used = [False] * len(preds)
    out = []
    j0 = 0
    for g in sorted(set(gt)):
        while j0 < len(preds) and (used[j0] or preds[j0] < g - margin):
            j0 += 1
        j = j0
        while j < len(preds) and used[j]:
            j += 1
        if j < len(preds) and abs(preds[j] - g) <= margin:
            used[j] = True
            out.append((g, preds[j]))
    return out


def _pr(n_tp: int, n_gt: int, n_pred: int) -> tuple[float, float]:
    if n_pred == 0:
        p = 1.0 if n_gt == 0 else 0.0
    else:
        p = n_tp / n_pred
    r = 1.0 if n_gt == 0 else n_tp / n_gt
    return p, r


def precision_recall(gt: Sequence[int], pred: Sequence[int], margin: int) -> tuple[float, float]:
    """Precision and recall of ``pred`` against ``gt`` with one-to-one matching.

    Empty prediction: precision 1 only if ``gt`` is empty as well, else 0.
    Empty ground truth: recall 1.
    """
    tp = len(match_true_positives(gt, pred, margin))
    return _pr(tp, len(set(gt)), len(set(pred)))


def labels_to_changepoints(classes: Sequence, start: int = 1) -> tuple[int, ...]:
    """Months where a per-month class sequence switches value.

    ``classes[0]`` is month ``start``; any per-revision classifier's monthly
    output can be scored this way.
    """
    return tuple(start + i for i in range(1, len(classes)) if classes[i] != classes[i - 1])


@dataclass(frozen=True)
class ArticleEval:
    article_id: str
    covering: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    n_months: int = 0

    def replace(self, **changes) -> "ArticleEval":
        return dataclasses.replace(self, **changes)


def evaluate_article(article_id: str, gt: Sequence[int], pred: Sequence[int], n: int,
                     margin: int = 5, start: int = 1, covering_op: str = "max") -> ArticleEval:
    gt_s, pred_s = sorted(set(gt)), sorted(set(pred))
    tp = len(match_true_positives(gt_s, pred_s, margin))
    p, r = _pr(tp, len(gt_s), len(pred_s))
    return ArticleEval(article_id, covering(gt_s, pred_s, n, start, covering_op), p, r,
                       tp, len(pred_s) - tp, len(gt_s) - tp, n - start + 1)


@dataclass
class EvalReport:
    covering: float
    precision: float
    recall: float
    margin: int
    rows: list[ArticleEval] = field(default_factory=list)
    tp: int = 0
    fp: int = 0
    fn: int = 0
    label: str = ""
    n: int | None = None  # article count when rows are not kept

    @property
    def n_articles(self) -> int:
        return self.n if self.n is not None else len(self.rows)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "margin": self.margin,
            "n_articles": self.n_articles,
            "mean": {"covering": self.covering, "precision": self.precision,
                     "recall": self.recall},
            "totals": {"tp": self.tp, "fp": self.fp, "fn": self.fn},
            "articles": [dataclasses.asdict(r) for r in self.rows],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        rows = [ArticleEval(**r) for r in d.get("articles", [])]
        t = d.get("totals", {})
        return cls(d["mean"]["covering"], d["mean"]["precision"], d["mean"]["recall"],
                   d["margin"], rows, t.get("tp", 0), t.get("fp", 0), t.get("fn", 0),
                   d.get("label", ""), None if rows else d.get("n_articles"))


def aggregate_report(rows: Sequence[ArticleEval], margin: int = 5, label: str = "") -> EvalReport:
    """Unweighted means over articles; per-article rows are kept."""
    rows = list(rows)
    if not rows:
        raise ValueError("no article reports to aggregate")
    # fsum keeps the mean independent of article order
    n = len(rows)
    return EvalReport(
        covering=math.fsum(r.covering for r in rows) / n,
        precision=math.fsum(r.precision for r in rows) / n,
        recall=math.fsum(r.recall for r in rows) / n,
        margin=margin,
        rows=rows,
        tp=sum(r.tp for r in rows),
        fp=sum(r.fp for r in rows),
        fn=sum(r.fn for r in rows),
        label=label,
    )
