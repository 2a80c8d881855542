"""Directed-rounding helpers for float64 bounds.

Bounds are carried as exact :class:`fractions.Fraction` values and only
turned into floats at the end, rounding in the safe direction.
"""
from __future__ import annotations

import math
import sys
from fractions import Fraction

EPS = sys.float_info.epsilon
#: unit roundoff for round-to-nearest binary64
UNIT = Fraction(EPS) / 2

# rational enclosure of pi (40 significant digits)
PI_LO = Fraction("3.141592653589793238462643383279502884197")
PI_HI = Fraction("3.141592653589793238462643383279502884198")


def up(value) -> float:
    """Smallest float >= ``value``."""
    q = Fraction(value)
    x = float(q)
    if Fraction(x) < q:
        x = math.nextafter(x, math.inf)
    return x


def down(value) -> float:
    """Largest float <= ``value``."""
    q = Fraction(value)
    x = float(q)
    if Fraction(x) > q:
        x = math.nextafter(x, -math.inf)
    return x


def sqrt_up(n) -> Fraction:
    """Rational upper bound on sqrt(n), exact when n is a perfect square."""
    q = Fraction(n)
    s = Fraction(math.sqrt(float(q)))
    while s * s < q:
        s = Fraction(math.nextafter(float(s), math.inf))
    return s


def gamma(n: int) -> Fraction:
    """Higham's gamma_n = n u / (1 - n u)."""
    nu = n * UNIT
    if nu >= 1:
        raise ValueError(f"gamma_{n} undefined: n*u >= 1")
    return nu / (1 - nu)
