"""Backend selection for the numerical kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise, or
when ``QCPD_PURE_PYTHON=1`` is set, the numpy implementation in
``_pykernels`` is used. Both produce identical results.
"""
from __future__ import annotations

import contextlib
import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("QCPD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    _active = "cython"
else:
    _active = "python"


def available() -> list[str]:
    return sorted(_BACKENDS)


def active_name() -> str:
    return _active


def impl() -> ModuleType:
    return _BACKENDS[_active]


def get(name: str) -> ModuleType:
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available (have {available()})") from None


def set_backend(name: str) -> None:
    global _active
    get(name)
    _active = name


@contextlib.contextmanager
def using(name: str):
    """Temporarily switch the active backend."""
    old = _active
    set_backend(name)
    try:
        yield get(name)
    finally:
        set_backend(old)
