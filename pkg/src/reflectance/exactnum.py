"""Exact rational and univariate polynomial arithmetic.

Rationals are :class:`fractions.Fraction` values, which are kept in lowest
terms with a positive denominator after every operation.  ``Rat`` is an alias
so signatures read in the vocabulary of the rest of the package.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rat = Fraction
RatLike = Union[Fraction, int, str]

_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def rat(value: RatLike, den: int | None = None) -> Fraction:
    """Build an exact rational from an int, a Fraction or a ``"num/den"`` string."""
    if den is not None:
        return Fraction(int(value), den)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot build an exact rational from {type(value).__name__}")


def parse_rat(text: object, field: str = "value") -> Fraction:
    """Parse ``"num/den"`` or ``"n"`` (or a JSON integer) into a Fraction.

    Decimal and float literals are rejected; ``field`` is used in the message.
    """
    if isinstance(text, bool):
        raise ValueError(f"{field}: expected an exact rational, got a boolean")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ValueError(
            f"{field}: decimal literal {text!r} rejected; write it as \"num/den\""
        )
    if not isinstance(text, str):
        raise ValueError(f"{field}: expected a \"num/den\" string, got {type(text).__name__}")
    m = _RAT_RE.match(text)
    if m is None:
        raise ValueError(f"{field}: {text!r} is not an exact rational of the form \"num/den\"")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"{field}: zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def format_rat(q: Fraction) -> str:
    """Canonical string form: ``"213/266"``, or ``"3"`` for integers."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def rat_arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    """Apply ``op`` in {add, sub, mul, div}; division by zero raises ZeroDivisionError."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError(f"division of {format_rat(a)} by zero")
        return Fraction(a) / b
    raise ValueError(f"unknown operation {op!r}")


def binom(n: int, k: int) -> int:
    """Binomial coefficient; zero when ``k > n`` (and for negative ``k``)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def beta_fn(a: int, b: int) -> Fraction:
    """Exact beta function for positive integers: (a-1)!(b-1)!/(a+b-1)!."""
    if a < 1 or b < 1:
        raise ValueError(f"beta_fn needs positive integer arguments, got ({a}, {b})")
    return Fraction(math.factorial(a - 1) * math.factorial(b - 1), math.factorial(a + b - 1))


def _trim(coeffs: Iterable[Fraction]) -> tuple[Fraction, ...]:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


class Poly:
    """Dense univariate polynomial with exact rational coefficients.

    ``coeffs[k]`` is the coefficient of ``x**k``.  The zero polynomial has an
    empty coefficient tuple; otherwise the leading coefficient is nonzero.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[RatLike] = ()):
        self._coeffs = _trim(rat(c) for c in coeffs)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._coeffs

    @classmethod
    def constant(cls, c: RatLike) -> Poly:
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c: RatLike = 1) -> Poly:
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self._coeffs) - 1

    def is_zero(self) -> bool:
        return not self._coeffs

    def __add__(self, other: Poly) -> Poly:
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._coeffs, other._coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([x + (b[k] if k < len(b) else 0) for k, x in enumerate(a)])

    def __neg__(self) -> Poly:
        return Poly(-c for c in self._coeffs)

    def __sub__(self, other: Poly) -> Poly:
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def scale(self, c: RatLike) -> Poly:
        c = rat(c)
        return Poly(c * x for x in self._coeffs)

    def __mul__(self, other: Poly | Fraction | int) -> Poly:
        if isinstance(other, (Fraction, int)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self._coeffs, other._coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Poly:
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result, base = Poly([1]), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __call__(self, x: RatLike) -> Fraction:
        x = rat(x)
        acc = Fraction(0)
        for c in reversed(self._coeffs):
            acc = acc * x + c
        return acc

    def antiderivative(self) -> Poly:
        """Antiderivative with zero constant term."""
        return Poly([0] + [c / (k + 1) for k, c in enumerate(self._coeffs)])

    def integrate(self, lo: RatLike, hi: RatLike) -> Fraction:
        F = self.antiderivative()
        return F(hi) - F(lo)

    def __repr__(self) -> str:
        return f"Poly([{', '.join(format_rat(c) for c in self._coeffs)}])"

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        out = ""
        for k, c in enumerate(self._coeffs):
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            mag = format_rat(abs(c))
            body = mono if (mono and abs(c) == 1) else (f"({mag}){mono}" if mono and "/" in mag else mag + mono)
            if not out:
                out = ("-" if c < 0 else "") + body
            else:
                out += (" - " if c < 0 else " + ") + body
        return out


def poly_integral_01(p: Poly) -> Fraction:
    """Exact integral of ``p`` over [0, 1]: sum of coeffs[k]/(k+1)."""
    return sum((c / (k + 1) for k, c in enumerate(p.coeffs)), Fraction(0))


def lcm_of_denominators(values: Sequence[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out
