"""Byte-stable JSON output.

The stdlib encoder formats floats with shortest-repr, which is
deterministic but inconsistent with the CSV exports; artifacts here pin
floats to 17 significant digits everywhere so a value prints the same
in every file.  Keys are emitted sorted.  Non-finite floats are a hard
error: artifacts must round-trip through any JSON parser.

Reading back uses plain ``json.loads``.
"""

from __future__ import annotations

import json
from math import isfinite


def format_float(x: float) -> str:
    """17-significant-digit decimal, exact for float64 round-trips."""
    if not isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def dumps(obj, indent: int = 2) -> str:
    out = []
    _emit(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def _emit(obj, out: list, indent: int, depth: int) -> None:
    pad = " " * (indent * (depth + 1))
    close_pad = " " * (indent * depth)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for pos, key in enumerate(keys):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {key!r}")
            out.append(pad)
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(": ")
            _emit(obj[key], out, indent, depth + 1)
            out.append(",\n" if pos < len(keys) - 1 else "\n")
        out.append(close_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for pos, item in enumerate(obj):
            out.append(pad)
            _emit(item, out, indent, depth + 1)
            out.append(",\n" if pos < len(obj) - 1 else "\n")
        out.append(close_pad + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def loads(text: str):
    return json.loads(text)
