"""Exact scalars: rationals, places of Q, valuations and absolute values.

The coordinate domain is `fractions.Fraction`, which already keeps the
canonical form we rely on (gcd-reduced, positive denominator).  A `Place`
selects which absolute value is in force; the p-adic absolute value
p^(-v) is itself a rational, so all downstream comparisons stay exact.

This module also hosts the square-root toolbox used everywhere above it:
rational two-sided bounds of width <= 2^-40, and exact sign tests for
expressions of the form sqrt(a) + sqrt(b) - sqrt(c).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

Rat = Fraction

#: Default width for outward rational bounding of square roots.
SQRT_BOUND_BITS = 40


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Place:
    """Which absolute value of Q is in force.

    kind is "archimedean" or "p-adic"; prime is set only in the p-adic
    case and must be prime.
    """

    kind: str
    prime: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "archimedean":
            if self.prime is not None:
                raise ValueError("archimedean place carries no prime")
        elif self.kind == "p-adic":
            if self.prime is None or not _is_prime(self.prime):
                raise ValueError(f"p-adic place needs a prime, got {self.prime!r}")
        else:
            raise ValueError(f"unknown place kind {self.kind!r}")

    @property
    def is_padic(self) -> bool:
        return self.kind == "p-adic"

    def __str__(self) -> str:
        return "arch" if not self.is_padic else f"p:{self.prime}"


ARCH = Place("archimedean")


def padic(p: int) -> Place:
    return Place("p-adic", p)


def padic_valuation(x: Rat | int, p: int) -> int:
    """v_p(x) for nonzero rational x: x = p^v * (a/b) with p dividing neither a nor b."""
    if x == 0:
        raise ZeroDivisionError("valuation of zero undefined")
    x = Fraction(x)
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def abs_value(x: Rat | int, place: Place) -> Rat:
    """|x| at the given place, always an exact rational (p^-v in the p-adic case)."""
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    if not place.is_padic:
        return -x if x < 0 else x
    v = padic_valuation(x, place.prime)
    if v >= 0:
        return Fraction(1, place.prime**v)
    return Fraction(place.prime ** (-v))


def abs_sq(x: Rat | int, place: Place) -> Rat:
    """|x|^2 at the place (x^2 archimedean, p^-2v p-adic)."""
    a = abs_value(x, place)
    return a * a


# ---------------------------------------------------------------------------
# Square-root bounding and exact comparison.
#
# Quantities like distances are kept squared; when a statement genuinely
# involves sqrt's we either bound them outward to width 2^-40 or, for the
# frequent shape sqrt(a) + sqrt(b) vs sqrt(c), decide the sign exactly by
# squaring twice.
# ---------------------------------------------------------------------------


def sqrt_lower(q: Rat, bits: int = SQRT_BOUND_BITS) -> Rat:
    """Largest convenient rational l with l <= sqrt(q), within 2^-bits of it.

    Exact when q is a square of a rational.
    """
    if q < 0:
        raise ValueError("sqrt of negative rational")
    if q == 0:
        return Fraction(0)
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    # sqrt(n/d) = sqrt(n*d)/d; scale by 4^bits so the floor isqrt is tight.
    big = (n * d) << (2 * bits)
    return Fraction(isqrt(big), d << bits)


def sqrt_upper(q: Rat, bits: int = SQRT_BOUND_BITS) -> Rat:
    """Rational u with sqrt(q) <= u <= sqrt(q) + 2^-bits; exact on squares."""
    if q < 0:
        raise ValueError("sqrt of negative rational")
    if q == 0:
        return Fraction(0)
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    big = (n * d) << (2 * bits)
    r = isqrt(big)
    return Fraction(r + 1, d << bits)


def cmp_sqrt_sum(a: Rat, b: Rat, c: Rat) -> int:
    """Exact sign of (sqrt(a) + sqrt(b)) - sqrt(c) for nonnegative rationals.

    Decided purely over Q: sqrt(a)+sqrt(b) <= sqrt(c) iff
    a + b + 2*sqrt(a*b) <= c, and the remaining single square root is
    compared by squaring once more (signs tracked).
    """
    if a < 0 or b < 0 or c < 0:
        raise ValueError("negative input to cmp_sqrt_sum")
    # (sqrt(a)+sqrt(b))^2 = a + b + 2 sqrt(ab); compare with c.
    t = c - a - b
    ab4 = 4 * a * b
    if t < 0:
        return 1  # lhs^2 > c already from a+b > c
    # compare 2 sqrt(ab) with t >= 0: sign of 4ab - t^2
    s = ab4 - t * t
    if s > 0:
        return 1
    if s < 0:
        return -1
    return 0


def sqrt_sum_leq(a: Rat, b: Rat, c: Rat) -> bool:
    """sqrt(a) + sqrt(b) <= sqrt(c), exactly."""
    return cmp_sqrt_sum(a, b, c) <= 0


def sqrt_sum_lt(a: Rat, b: Rat, c: Rat) -> bool:
    """sqrt(a) + sqrt(b) < sqrt(c), exactly."""
    return cmp_sqrt_sum(a, b, c) < 0


def sqrt_leq_sqrt_sum(c: Rat, a: Rat, b: Rat) -> bool:
    """sqrt(c) <= sqrt(a) + sqrt(b), exactly."""
    return cmp_sqrt_sum(a, b, c) >= 0


def parse_rat(text: str) -> Rat:
    """Parse an exact rational literal "p/q" or "p" (no floats accepted)."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            d = int(den)
            if d == 0:
                raise ValueError
            return Fraction(int(num), d)
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed rational literal {text!r}") from None


def format_rat(x: Rat) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"
