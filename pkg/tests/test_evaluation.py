import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linear_sum_assignment

from qcpd.evaluation import (
    ArticleEval,
    EvalReport,
    aggregate_report,
    covering,
    evaluate_article,
    jaccard,
    labels_to_changepoints,
    match_true_positives,
    partition,
    precision_recall,
)


def test_covering_hand_value():
    # segments {1..5},{6..10} vs {1..3},{4..10}: (5*3/5 + 5*5/7) / 10
    assert covering([6], [4], 10) == pytest.approx(0.657142857142857, abs=1e-12)


def test_covering_perfect_and_empty():
    assert covering([4, 8], [4, 8], 12) == 1.0
    assert covering([], [], 12) == 1.0
    assert covering([6], [], 10) == pytest.approx(0.5)


def test_covering_start_offset():
    # timeline 3..10 is a fresh 8-month timeline
    assert covering([8], [6], 10, start=3) == pytest.approx(covering([6], [4], 8))


def test_covering_min_variant_is_worse():
    assert covering([6], [4, 8], 10, op="min") < covering([6], [4, 8], 10)
    with pytest.raises(ValueError):
        covering([6], [4], 10, op="mean")


def test_partition_ignores_out_of_range():
    assert partition([1, 4, 11], 10) == [range(1, 4), range(4, 11)]


def test_jaccard_edges():
    assert jaccard([], []) == 1.0
    assert jaccard([1, 2], [2, 3]) == pytest.approx(1 / 3)


def test_precision_recall_fixture():
    assert precision_recall([10, 50], [12, 30, 53], 5) == (2 / 3, 1.0)


def test_no_double_counting():
    assert match_true_positives([10], [10, 11], 5) == [(10, 10)]
    r = evaluate_article("a", [10], [10, 11], 60)
    assert (r.tp, r.fp, r.fn) == (1, 1, 0)


def test_degenerate_pr():
    assert precision_recall([], [], 5) == (1.0, 1.0)
    assert precision_recall([7], [], 5) == (0.0, 0.0)
    assert precision_recall([], [7], 5) == (0.0, 1.0)


def test_nearest_matching_is_not_optimal_but_ours_is():
    # nearest-first would pair 5 with 7 and leave 10 unmatched
    assert len(match_true_positives([5, 10], [2, 7], 3)) == 2


def _max_matching(gt, pred, margin):
    if not gt or not pred:
        return 0
    g, p = sorted(set(gt)), sorted(set(pred))
    ok = np.array([[abs(a - b) <= margin for b in p] for a in g])
    rows, cols = linear_sum_assignment(-ok.astype(float))
    return int(ok[rows, cols].sum())


def test_matching_cardinality_against_assignment_solver():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        n = int(rng.integers(10, 80))
        gt = sorted(set(rng.integers(2, n, size=rng.integers(0, 8)).tolist()))
        pred = sorted(set(rng.integers(2, n, size=rng.integers(0, 10)).tolist()))
        margin = int(rng.integers(0, 8))
        pairs = match_true_positives(gt, pred, margin)
        assert len(pairs) == _max_matching(gt, pred, margin)
        assert len({a for a, _ in pairs}) == len(pairs) == len({b for _, b in pairs})
        assert all(abs(a - b) <= margin for a, b in pairs)


points = st.lists(st.integers(2, 60), max_size=8, unique=True).map(sorted)


@given(points, points)
def test_covering_bounds_and_identity(gt, pred):
    c = covering(gt, pred, 60)
    assert 0.0 < c <= 1.0
    assert covering(gt, gt, 60) == 1.0


@given(points, points, st.integers(0, 10))
def test_pr_bounds(gt, pred, m):
    p, r = precision_recall(gt, pred, m)
    assert 0 <= p <= 1 and 0 <= r <= 1


@given(points, points, st.integers(0, 10))
def test_margin_monotone(gt, pred, m):
    assert len(match_true_positives(gt, pred, m)) <= len(match_true_positives(gt, pred, m + 1))


def test_labels_to_changepoints():
    assert labels_to_changepoints(["a", "a", "b", "b", "a"]) == (3, 5)
    assert labels_to_changepoints(["x", "y"], start=4) == (5,)


def test_aggregate_and_roundtrip():
    rows = [evaluate_article("a", [6], [4], 10), evaluate_article("b", [], [], 10)]
    rep = aggregate_report(rows, 5, "demo")
    assert rep.covering == pytest.approx((0.657142857142857 + 1.0) / 2)
    assert rep.precision == 1.0 and rep.recall == 1.0  # |6-4| <= 5
    again = EvalReport.from_dict(rep.to_dict())
    assert again == rep
    with pytest.raises(ValueError):
        aggregate_report([])


def test_aggregate_order_independent():
    rng = np.random.default_rng(0)
    rows = [ArticleEval(str(i), *rng.random(3), 0, 0, 0) for i in range(200)]
    a = aggregate_report(rows)
    b = aggregate_report(rows[::-1])
    assert (a.covering, a.precision, a.recall) == (b.covering, b.precision, b.recall)
