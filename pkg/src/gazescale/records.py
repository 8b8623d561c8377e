"""Helpers for strict JSON record handling.

Every serialized record in this package is written with the same canonical
encoder and read back with strict key checking, so that saving and loading
is byte-stable and typos in hand-edited files fail loudly instead of being
silently ignored.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable, Mapping, Sequence

from .errors import ParseError


def canonical_dumps(record: Mapping[str, Any]) -> str:
    """Serialize a record to its canonical single-line JSON form.

    Floats use repr, which round-trips exactly, so re-serializing a loaded
    record reproduces the original bytes.
    """
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "),
                      allow_nan=False)


def check_keys(record: Mapping[str, Any], allowed: Iterable[str],
               context: str, line: int = 0) -> None:
    if not isinstance(record, Mapping):
        raise ParseError(f"{context}: expected an object, got "
                         f"{type(record).__name__}", line=line)
    unknown = set(record) - set(allowed)
    if unknown:
        names = ", ".join(sorted(unknown))
        raise ParseError(f"{context}: unknown key(s): {names}", line=line)


def get_number(record: Mapping[str, Any], key: str, context: str,
               line: int = 0) -> float:
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{context}: {key} must be a number", line=line)
    value = float(value)
    if not math.isfinite(value):
        raise ParseError(f"{context}: {key} must be finite", line=line)
    return value


def as_vec3_list(value: Any, context: str, line: int = 0) -> list[float]:
    if (not isinstance(value, Sequence) or isinstance(value, (str, bytes))
            or len(value) != 3):
        raise ParseError(f"{context}: expected a 3-element array", line=line)
    out = []
    for component in value:
        if isinstance(component, bool) or not isinstance(component, (int, float)):
            raise ParseError(f"{context}: components must be numbers", line=line)
        component = float(component)
        if not math.isfinite(component):
            raise ParseError(f"{context}: components must be finite", line=line)
        out.append(component)
    return out
