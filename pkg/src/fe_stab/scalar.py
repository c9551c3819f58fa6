"""Exact/float scalar helpers.

Exact scalars are :class:`fractions.Fraction` (ints are promoted), float
scalars are Python floats. A computation stays in one mode; mixing is an
error rather than a silent coercion.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational, Real
from typing import Union

from .errors import ModeMismatch

Scalar = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-12


def mode_of(value) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Rational):
        return EXACT
    if isinstance(value, Real):
        return FLOAT
    raise TypeError(f"not a real scalar: {value!r}")


def common_mode(*values) -> str:
    """Return the shared mode of ``values`` or raise :class:`ModeMismatch`."""
    modes = {mode_of(v) for v in values}
    if len(modes) > 1:
        raise ModeMismatch(f"mixed exact and float scalars: {values!r}")
    return modes.pop() if modes else EXACT


def as_scalar(value) -> Scalar:
    """Normalise ints/Rationals to Fraction and other reals to float."""
    if mode_of(value) == EXACT:
        return Fraction(value)
    return float(value)


def parse_scalar(value) -> Scalar:
    """Parse a config value.

    Strings are read exactly (``"3/16"``, ``"0.25"``, ``"-2"``); JSON ints
    are exact; JSON floats stay floats.
    """
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse scalar {value!r}") from exc
    return as_scalar(value)


def to_fraction(value) -> Fraction:
    """Exact rational value of an exact scalar or a (finite) float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"non-finite value {value!r}")
    return Fraction(value)


def scalar_to_json(value):
    """Fractions serialise as ``"p/q"`` strings, floats as shortest repr."""
    if value is None:
        return None
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return float(value)


def isclose(a, b, rel_tol=DEFAULT_REL_TOL, abs_tol=DEFAULT_ABS_TOL) -> bool:
    if mode_of(a) == EXACT and mode_of(b) == EXACT:
        return Fraction(a) == Fraction(b)
    return math.isclose(float(a), float(b), rel_tol=rel_tol, abs_tol=abs_tol)


def pow2(k: int, exact: bool = True) -> Scalar:
    """2**k for any integer k, exact or as a float."""
    if exact:
        return Fraction(2) ** k
    return math.ldexp(1.0, k)


def scale_pow2(value: Scalar, k: int) -> Scalar:
    """value * 2**k without leaving the value's mode."""
    if mode_of(value) == EXACT:
        return Fraction(value) * Fraction(2) ** k
    return math.ldexp(float(value), k)
