"""Guard against binary floats leaking into exact arithmetic.

The exact paths (continued fractions, field arithmetic, interval
endpoints) accept ints, Fractions and exact string/rational forms only.
When the guard is armed, any float operand raises instead of being
silently coerced.  Arm it in tests to prove a code path is float-free.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from fractions import Fraction

_state = threading.local()


class PoisonedFloat(TypeError):
    """A float reached an exact-arithmetic chokepoint while the guard was armed."""


def armed() -> bool:
    return getattr(_state, "armed", False)


@contextmanager
def poisoned_floats():
    """Context manager: raise PoisonedFloat on any float entering exact code."""
    prev = armed()
    _state.armed = True
    try:
        yield
    finally:
        _state.armed = prev


def as_fraction(x) -> Fraction:
    """Coerce to Fraction; under the guard, floats are rejected.

    Accepts int, Fraction, "p/q" / decimal strings, and anything
    Fraction itself accepts (except float/complex when armed).
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if armed():
            raise PoisonedFloat(f"float {x!r} reached exact arithmetic")
        return Fraction(x)
    if isinstance(x, complex):
        raise TypeError("complex has no exact Fraction form")
    return Fraction(x)


def check_exact(x):
    """Raise under the guard if x is a float; return x unchanged."""
    if isinstance(x, float) and armed():
        raise PoisonedFloat(f"float {x!r} reached exact arithmetic")
    return x
