from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from qcpd.core import (
    DEFAULT_CALENDAR,
    MonthCalendar,
    PageHistory,
    PageKind,
    QualityClass,
    QualityLabelEvent,
    Revision,
    UnknownQualityClass,
    bin_monthly,
    format_timestamp,
    ground_truth_changepoints,
    merge_quality_class,
    monthly_classes,
    normalize_raw_class,
    parse_timestamp,
    validate_changepoints,
)

from conftest import rev, ts


def utc(y, m, d=1, h=0):
    return datetime(y, m, d, h, tzinfo=timezone.utc)


@pytest.mark.parametrize("raw,merged", [
    ("FA", QualityClass.FA), ("A", QualityClass.AGA), ("GA", QualityClass.AGA),
    ("B", QualityClass.BC), ("C", QualityClass.BC), ("Start", QualityClass.SS),
    ("Stub", QualityClass.SS),
])
def test_merge_table(raw, merged):
    assert merge_quality_class(raw) is merged


def test_merge_order_and_unknown():
    assert QualityClass.FA > QualityClass.AGA > QualityClass.BC > QualityClass.SS
    with pytest.raises(UnknownQualityClass) as e:
        merge_quality_class("List")
    assert e.value.token == "List"


@pytest.mark.parametrize("token,raw", [(" start ", "Start"), ("ga", "GA"), ("STUB", "Stub"),
                                       ("list", None), ("", None)])
def test_normalize(token, raw):
    assert normalize_raw_class(token) == raw


def test_default_calendar_window():
    cal = DEFAULT_CALENDAR
    assert cal.n_months == 156
    assert cal.label == "2006-07"
    assert cal.year_month(156) == (2019, 6)
    assert cal.index(utc(2006, 7, 1)) == 1
    assert cal.index(utc(2019, 6, 30, 23)) == 156
    assert cal.index(utc(2019, 7, 1)) is None
    assert cal.index(utc(2006, 6, 30)) is None


def test_calendar_parse_and_days():
    cal = MonthCalendar.parse("2012-02", 3)
    assert cal.days_in_month(1) == 29
    assert cal.month_start(3) == utc(2012, 4, 1)
    with pytest.raises(ValueError):
        MonthCalendar(2000, 13, 5)


@given(st.integers(1990, 2030), st.integers(1, 12), st.integers(2, 400))
def test_calendar_ending_roundtrip(y, m, n):
    cal = MonthCalendar.ending(y, m, n)
    assert cal.year_month(n) == (y, m)
    assert cal.raw_index(cal.month_start(n)) == n


def test_timestamp_roundtrip():
    t = parse_timestamp("2012-03-04T05:06:07Z")
    assert t == datetime(2012, 3, 4, 5, 6, 7, tzinfo=timezone.utc)
    assert format_timestamp(t) == "2012-03-04T05:06:07Z"
    assert parse_timestamp("2012-03-04T07:06:07+02:00") == t


def test_revision_validation():
    with pytest.raises(ValueError):
        Revision(utc(2010, 1), "", True, PageKind.MAIN)
    with pytest.raises(ValueError):
        Revision(datetime(2010, 1, 1), "a", True, PageKind.MAIN)


def test_history_order_and_creation():
    a, b = rev(5), rev(1)
    with pytest.raises(ValueError):
        PageHistory("x", (a, b))
    h = PageHistory.from_revisions("x", [a, b, rev(0, kind=PageKind.TALK)])
    assert [r.timestamp for r in h.main_revisions] == [ts(1), ts(5)]
    assert h.creation_time == ts(0)


def test_bin_monthly_keeps_latest():
    cal = MonthCalendar(2010, 1, 3)
    h = PageHistory("x", (rev(0, "a"), rev(10, "b"), rev(40, "c")))
    bins = bin_monthly(h, cal)
    assert [r.editor_id if r else None for r in bins] == ["b", "c", None]


def test_bin_monthly_tie_goes_to_later_input():
    cal = MonthCalendar(2010, 1, 2)
    h = PageHistory("x", (rev(3, "first"), rev(3, "second")))
    assert bin_monthly(h, cal)[0].editor_id == "second"


def ev(y, m, raw, d=1):
    return QualityLabelEvent(utc(y, m, d), raw)


def test_ground_truth_rules():
    cal = MonthCalendar(2010, 1, 24)
    events = [ev(2010, 1, "Stub"), ev(2010, 3, "Start"),  # same merged class: no change
              ev(2010, 5, "B"), ev(2010, 5, "GA", 20),  # collapse in one month
              ev(2011, 2, "FA")]
    assert ground_truth_changepoints(events, cal) == (5, 14)


def test_ground_truth_outside_window_updates_state():
    cal = MonthCalendar(2010, 1, 12)
    events = [ev(2009, 5, "Stub"), ev(2009, 8, "B"), ev(2010, 4, "B"), ev(2010, 6, "FA"),
              ev(2011, 3, "Stub")]
    assert ground_truth_changepoints(events, cal) == (6,)


def test_ground_truth_never_month_one():
    cal = MonthCalendar(2010, 1, 12)
    assert ground_truth_changepoints([ev(2009, 1, "Stub"), ev(2010, 1, "FA")], cal) == ()


def test_monthly_classes():
    cal = MonthCalendar(2010, 1, 4)
    got = monthly_classes([ev(2010, 2, "Stub"), ev(2010, 3, "GA", 15)], cal)
    assert got == [None, QualityClass.SS, QualityClass.AGA, QualityClass.AGA]


def test_validate_changepoints():
    assert validate_changepoints([2, 5], 10) == (2, 5)
    for bad in ([5, 2], [1, 3], [3, 11], [4, 4]):
        with pytest.raises(ValueError):
            validate_changepoints(bad, 10)
