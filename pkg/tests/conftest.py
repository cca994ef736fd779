import os
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import HealthCheck, settings

from qcpd.core import PageHistory, PageKind, Revision

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

T0 = datetime(2010, 1, 1, tzinfo=timezone.utc)


def ts(days: float, base: datetime = T0) -> datetime:
    return base + timedelta(days=days)


def rev(days, editor="alice", registered=True, kind=PageKind.MAIN, text=""):
    return Revision(ts(days), editor, registered, kind, text)


@pytest.fixture
def simple_history():
    main = [rev(0, "alice", text="Hello [[world]]."), rev(3, "bob"), rev(40, "1.2.3.4", False),
            rev(45, "carol", text="== A ==\nText. More text.")]
    talk = [rev(1, "alice", kind=PageKind.TALK), rev(50, "dave", kind=PageKind.TALK)]
    return PageHistory("Sample", tuple(main), tuple(talk))
