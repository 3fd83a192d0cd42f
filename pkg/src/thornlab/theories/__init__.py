"""Decision procedures for the three shipped theories."""
from __future__ import annotations

from .base import (
    INFINITE,
    NotClosedError,
    SolutionCount,
    Theory,
    TheoryError,
    TypeDesc,
    TypeExhaustedError,
    default_vars,
)
from .dlo import DloTheory
from .eq import EqTheory
from .erel import ErelTheory

_THEORIES: dict[str, Theory] = {}


def get_theory(name: str | Theory) -> Theory:
    if isinstance(name, Theory):
        return name
    key = name.lower()
    if key not in _THEORIES:
        cls = {"eq": EqTheory, "dlo": DloTheory, "erel": ErelTheory}.get(key)
        if cls is None:
            raise TheoryError(f"unknown theory {name!r} (expected eq, dlo or erel)")
        _THEORIES[key] = cls()
    return _THEORIES[key]


EQ = "eq"
DLO = "dlo"
EREL = "erel"

__all__ = [
    "DLO",
    "EQ",
    "EREL",
    "INFINITE",
    "NotClosedError",
    "SolutionCount",
    "Theory",
    "TheoryError",
    "TypeDesc",
    "TypeExhaustedError",
    "default_vars",
    "get_theory",
]
