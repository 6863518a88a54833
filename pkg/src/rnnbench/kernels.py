"""Kernel backend selection.

Two interchangeable backends implement the hot loops:

* ``rnnbench._kernels_py`` — pure Python, always available.
* ``rnnbench._kernels_cy`` — the same loops compiled with Cython, used
  automatically when the extension was built.

Both execute identical floating-point operations in identical order, so
switching backends never changes a single bit of any result — only the
wall-clock time.  The test suite enforces this.

Set ``RNNBENCH_KERNELS=python`` (or ``cython``) to force a backend at
import time; ``set_backend()`` switches at runtime.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:  # extension not built; pure Python carries the load
    _kernels_cy = None

_BY_NAME = {"python": _kernels_py}
if _kernels_cy is not None:
    _BY_NAME["cython"] = _kernels_cy

_ALIASES = {"py": "python", "pure": "python", "cy": "cython",
            "compiled": "cython", "c": "cython"}


def _resolve(name: str) -> str:
    key = _ALIASES.get(name.strip().lower(), name.strip().lower())
    if key not in ("python", "cython"):
        raise ValueError(f"unknown kernel backend {name!r}; use python or cython")
    if key not in _BY_NAME:
        raise RuntimeError(
            "the compiled kernel backend was requested but is not built; "
            "reinstall the package with Cython available or use python"
        )
    return key


_forced = os.environ.get("RNNBENCH_KERNELS", "")
if _forced:
    _active_name = _resolve(_forced)
elif _kernels_cy is not None:
    _active_name = "cython"
else:
    _active_name = "python"


def active():
    """The module providing the kernels currently in use."""
    return _BY_NAME[_active_name]


def active_name() -> str:
    return _active_name


def available() -> tuple:
    """Names of the backends importable in this installation."""
    return tuple(sorted(_BY_NAME))


def set_backend(name: str) -> str:
    """Switch backends process-wide; returns the resolved name."""
    global _active_name
    _active_name = _resolve(name)
    return _active_name
