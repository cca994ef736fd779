"""Change-point detection of article quality from monthly edit-history features."""
from .core import DEFAULT_CALENDAR, MonthCalendar, PageHistory, QualityClass, QualityLabelEvent, Revision
from .cpd import DetectorConfig, detect_binseg, detect_ecp, detect_pelt, hybrid_report
from .evaluation import EvalReport, covering, precision_recall
from .features import ArticleSeries, build_series

__version__ = "0.1.0"

__all__ = [
    "ArticleSeries", "DEFAULT_CALENDAR", "DetectorConfig", "EvalReport", "MonthCalendar",
    "PageHistory", "QualityClass", "QualityLabelEvent", "Revision", "build_series", "covering",
    "detect_binseg", "detect_ecp", "detect_pelt", "hybrid_report", "precision_recall",
]
