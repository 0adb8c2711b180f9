"""Exact Gaussian-rational scalars.

A :class:`GaussianRational` is ``a/b + (c/d) i`` with both parts stored as
reduced :class:`fractions.Fraction`.  Floating-point work elsewhere in the
package uses plain Python ``complex``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

__all__ = ["GaussianRational", "Number", "as_scalar", "parse_fraction", "format_fraction", "I", "ZERO", "ONE"]

Number = Union["GaussianRational", int, Fraction]


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re: Rational | int | str = 0, im: Rational | int | str = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def _make(cls, re: Fraction, im: Fraction) -> "GaussianRational":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational._make(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational._make(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational._make(self.re * other, self.im * other)
        o = _coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        return GaussianRational._make(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussianRational._make(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational._make(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return ONE / (self ** -k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._make(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # comparisons / conversions -----------------------------------------

    def __eq__(self, other):
        o = _coerce(other)
        if o is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussianRational({format_fraction(self.re)!r}, {format_fraction(self.im)!r})"

    def __str__(self):
        if self.im == 0:
            return format_fraction(self.re)
        if self.re == 0:
            return f"{format_fraction(self.im)}i"
        sign = "+" if self.im > 0 else "-"
        return f"{format_fraction(self.re)}{sign}{format_fraction(abs(self.im))}i"

    def to_json(self) -> dict:
        return {"re": format_fraction(self.re), "im": format_fraction(self.im)}

    @classmethod
    def from_json(cls, data: dict) -> "GaussianRational":
        return cls(parse_fraction(data.get("re", "0")), parse_fraction(data.get("im", "0")))


def _coerce(x) -> GaussianRational | None:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational._make(Fraction(x), Fraction(0))
    return None


def as_scalar(x) -> GaussianRational:
    """Coerce an int, Fraction, GaussianRational or exact-valued complex."""
    o = _coerce(x)
    if o is not None:
        return o
    if isinstance(x, complex):
        return GaussianRational(Fraction(x.real), Fraction(x.imag))
    if isinstance(x, float):
        return GaussianRational(Fraction(x))
    raise TypeError(f"cannot convert {type(x).__name__} to GaussianRational")


def parse_fraction(text: str | int) -> Fraction:
    """Parse ``"a/b"`` or ``"a"``; decimals are rejected."""
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if "." in s or "e" in s.lower():
        raise ValueError(f"decimal-free fraction expected, got {text!r}")
    return Fraction(s)


def format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)
