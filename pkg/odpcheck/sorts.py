from __future__ import annotations

from enum import Enum
from typing import Union

Value = Union[int, bool, str]


class Sort(str, Enum):
    INT = "int"
    BOOL = "bool"
    STRING = "string"


def sort_of(value: Value) -> Sort:
    # bool first: bool is a subclass of int
    if isinstance(value, bool):
        return Sort.BOOL
    if isinstance(value, int):
        return Sort.INT
    if isinstance(value, str):
        return Sort.STRING
    raise TypeError(f"not a model value: {value!r}")


def default_value(sort: Sort) -> Value:
    return {Sort.INT: 0, Sort.BOOL: False, Sort.STRING: ""}[sort]


def same_value(a: Value, b: Value) -> bool:
    """Equality that does not confuse ``True`` with ``1``."""
    return sort_of(a) is sort_of(b) and a == b
