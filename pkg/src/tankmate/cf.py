"""Certainty-factor algebra over the belief range [0, 1].

Degrees of compatibility only ever accumulate as belief; disbelief is a
low value, so the mixed-sign rules of older diagnostic shells are not
needed here.
"""

from __future__ import annotations

from typing import Iterable


def _check(value: float, what: str = "certainty factor") -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{what} out of range [0, 1]: {value!r}")
    return float(value)


def cf_combine(a: float, b: float) -> float:
    """Combine two independent pieces of supporting evidence.

    a + b*(1-a): commutative, associative, 0 is the identity, 1 absorbs,
    and the result never drops below max(a, b).
    """
    a = _check(a)
    b = _check(b)
    return a + b * (1.0 - a)


def cf_conjunction(cfs: Iterable[float]) -> float:
    """Belief in a conjunction of premises: the weakest one."""
    values = [_check(c) for c in cfs]
    if not values:
        raise ValueError("cf_conjunction of no values")
    return min(values)
