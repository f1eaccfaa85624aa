"""Coefficient arithmetic for polynomial terms.

Coefficients are either exact Gaussian rationals (:class:`RationalComplex`)
or ordinary Python complex numbers.  Arithmetic between two exact values
stays exact; anything mixed with a float demotes to ``complex``.  Commutator
rewriting only ever multiplies coefficients by integers, so expressions
entered with rational literals canonicalize without rounding.
"""

from __future__ import annotations

from fractions import Fraction

#: Magnitude below which a floating-point coefficient is treated as zero.
ZERO_TOL = 1e-12

_EXACT_TYPES = (int, Fraction)


class RationalComplex:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, other):
        if isinstance(other, RationalComplex):
            return RationalComplex(self.re + other.re, self.im + other.im)
        if isinstance(other, _EXACT_TYPES):
            return RationalComplex(self.re + other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, RationalComplex):
            return RationalComplex(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, _EXACT_TYPES):
            return RationalComplex(self.re * other, self.im * other)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, _EXACT_TYPES):
            return RationalComplex(self.re / other, self.im / other)
        if isinstance(other, RationalComplex):
            d = other.re * other.re + other.im * other.im
            if d == 0:
                raise ZeroDivisionError("division by zero coefficient")
            return self * RationalComplex(other.re / d, -other.im / d)
        if isinstance(other, (float, complex)):
            return complex(self) / other
        return NotImplemented

    def __rtruediv__(self, other):
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("division by zero coefficient")
        inv = RationalComplex(self.re / d, -self.im / d)
        return inv * other

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = RationalComplex(1, 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return RationalComplex(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im != 0:
            raise ValueError("coefficient has a nonzero imaginary part")
        return float(self.re)

    def __abs__(self):
        return abs(complex(self))

    def __eq__(self, other):
        if isinstance(other, RationalComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, _EXACT_TYPES):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash(complex(self))

    def __repr__(self):
        return f"RationalComplex({self.re!r}, {self.im!r})"


def exact(value) -> RationalComplex:
    """Build an exact coefficient from ints, Fractions or decimal strings."""
    if isinstance(value, RationalComplex):
        return value
    return RationalComplex(Fraction(value))


def as_scalar(value):
    """Normalize a user-supplied coefficient to RationalComplex or complex."""
    if isinstance(value, RationalComplex):
        return value
    if isinstance(value, _EXACT_TYPES):
        return RationalComplex(value)
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(value, (float, complex)):
        return complex(value)
    raise TypeError(f"unsupported coefficient type {type(value)!r}")


def conj_scalar(value):
    if isinstance(value, RationalComplex):
        return value.conjugate()
    return complex(value).conjugate()


def is_exact(value) -> bool:
    return isinstance(value, RationalComplex)


def is_zero(value, tol: float = ZERO_TOL) -> bool:
    """Exact zero test for exact coefficients, |.| <= tol for floats."""
    if isinstance(value, RationalComplex):
        return value.re == 0 and value.im == 0
    return abs(value) <= tol


def scalars_close(a, b, tol: float = ZERO_TOL) -> bool:
    if isinstance(a, RationalComplex) and isinstance(b, RationalComplex):
        return a == b
    return abs(complex(a) - complex(b)) <= tol


def format_scalar(value) -> str:
    """Human-readable coefficient, used by the polynomial pretty-printers."""
    if isinstance(value, RationalComplex):
        re, im = value.re, value.im
        if im == 0:
            return _format_fraction(re)
        if re == 0:
            return _format_fraction(im) + "i"
        sign = "+" if im > 0 else "-"
        return f"({_format_fraction(re)}{sign}{_format_fraction(abs(im))}i)"
    z = complex(value)
    if z.imag == 0:
        return _format_float(z.real)
    if z.real == 0:
        return _format_float(z.imag) + "i"
    sign = "+" if z.imag >= 0 else "-"
    return f"({_format_float(z.real)}{sign}{_format_float(abs(z.imag))}i)"


def _format_fraction(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _format_float(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)
