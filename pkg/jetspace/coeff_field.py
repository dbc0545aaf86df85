"""
Exact arithmetic in Q(i) = Q[i]/(i^2 + 1).

Every coefficient the engine touches is a GaussianRational: a pair of
reduced fractions. Values are immutable and hashable so they can be used as
dictionary keys and shared between worker processes.
"""

from fractions import Fraction
from math import isqrt
from numbers import Rational
from typing import Optional, Tuple, Union

from jetspace.errors import FieldDivisionError, PolynomialSyntaxError

Scalar = Union[int, Fraction, 'GaussianRational']


class GaussianRational:
    __slots__ = ('_re', '_im')

    def __init__(self, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0):
        # Fraction already keeps gcd = 1 and a positive denominator
        object.__setattr__(self, '_re', Fraction(re))
        object.__setattr__(self, '_im', Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @property
    def re(self) -> Fraction:
        return self._re

    @property
    def im(self) -> Fraction:
        return self._im

    @classmethod
    def coerce(cls, value: Scalar) -> 'GaussianRational':
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Rational)):
            return cls(Fraction(value))
        if isinstance(value, str):
            return parse_gaussian(value)
        raise TypeError(f"cannot coerce {value!r} to GaussianRational")

    def is_zero(self) -> bool:
        return self._re == 0 and self._im == 0

    def is_one(self) -> bool:
        return self._re == 1 and self._im == 0

    def is_real(self) -> bool:
        return self._im == 0

    def __bool__(self):
        return not self.is_zero()

    # arithmetic

    def __add__(self, other):
        try:
            other = _lift(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self._re + other._re, self._im + other._im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = _lift(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self._re - other._re, self._im - other._im)

    def __rsub__(self, other):
        try:
            other = _lift(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __neg__(self):
        return GaussianRational(-self._re, -self._im)

    def __pos__(self):
        return self

    def __mul__(self, other):
        try:
            other = _lift(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self._re * other._re - self._im * other._im,
                                self._re * other._im + self._im * other._re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = _lift(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        try:
            other = _lift(other)
        except TypeError:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = ONE
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self) -> 'GaussianRational':
        return GaussianRational(self._re, -self._im)

    def norm(self) -> Fraction:
        return self._re * self._re + self._im * self._im

    def inverse(self) -> 'GaussianRational':
        n = self.norm()
        if n == 0:
            raise FieldDivisionError("inverse of zero in Q(i)")
        return GaussianRational(self._re / n, -self._im / n)

    def sqrt(self) -> Optional['GaussianRational']:
        """Exact square root in Q(i), or None when there is none.

        The returned root has positive real part, or positive imaginary
        part when the real part is zero.
        """
        if self.is_zero():
            return ZERO
        modulus = _rational_sqrt(self.norm())
        if modulus is None:
            return None
        x = _rational_sqrt((self._re + modulus) / 2)
        y = _rational_sqrt((modulus - self._re) / 2)
        if x is None or y is None:
            return None
        if self._im < 0:
            y = -y
        root = GaussianRational(x, y)
        if root * root != self:
            return None
        return root

    # comparison and hashing

    def __eq__(self, other):
        try:
            other = _lift(other)
        except TypeError:
            return NotImplemented
        return self._re == other._re and self._im == other._im

    def __hash__(self):
        if self._im == 0:
            return hash(self._re)
        return hash((self._re, self._im))

    def sort_key(self) -> Tuple[Fraction, Fraction]:
        return (self._re, self._im)

    # text

    def __str__(self):
        if self._im == 0:
            return str(self._re)
        imag = _imag_text(self._im)
        if self._re == 0:
            return imag
        if self._im < 0:
            return f"{self._re}-{_imag_text(-self._im)}"
        return f"{self._re}+{imag}"

    def __repr__(self):
        return f"GaussianRational({str(self)!r})"

    def needs_parens(self) -> bool:
        return self._re != 0 and self._im != 0

    def __reduce__(self):
        return (GaussianRational, (self._re, self._im))


def _lift(value) -> GaussianRational:
    if isinstance(value, str):
        raise TypeError("strings are not coerced in arithmetic")
    return GaussianRational.coerce(value)


def _imag_text(im: Fraction) -> str:
    if im == 1:
        return "i"
    if im == -1:
        return "-i"
    return f"{im}*i"


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn != num or rd * rd != den:
        return None
    return Fraction(rn, rd)


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def gq_add(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return a + b


def gq_sub(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return a - b


def gq_mul(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return a * b


def gq_inv(a: GaussianRational) -> GaussianRational:
    """Multiplicative inverse via conjugate over norm; zero raises FieldDivisionError."""
    return a.inverse()


def parse_gaussian(text: str) -> GaussianRational:
    """Parse constants such as `-2*i`, `1/2+i/3` or `(1+i)/2`.

    Shares the polynomial grammar, so any variable in the text is an error.
    """
    from jetspace.multipoly import parse_polynomial

    poly = parse_polynomial(text)
    if not poly.is_constant():
        raise PolynomialSyntaxError("constant expected", text, 0)
    return poly.constant_coefficient()
