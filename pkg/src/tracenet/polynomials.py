"""Exact integer polynomials and certified real root isolation.

Root isolation is done with Sturm sequences over exact rational arithmetic:
the returned enclosure is a mathematically certified interval, never the
output of a floating-point solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd


@dataclass(frozen=True)
class IntPolynomial:
    """Dense integer polynomial, constant term first, no trailing zeros."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def zero(cls) -> "IntPolynomial":
        return cls(())

    @classmethod
    def one(cls) -> "IntPolynomial":
        return cls((1,))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, k: int) -> int:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return 0

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coefficients), len(other.coefficients))
        return IntPolynomial(
            tuple(self.coefficient(k) + other.coefficient(k) for k in range(n))
        )

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-c for c in self.coefficients))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero or other.is_zero:
            return IntPolynomial.zero()
        out = [0] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            if a == 0:
                continue
            for j, b in enumerate(other.coefficients):
                out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def scale(self, factor: int) -> "IntPolynomial":
        return IntPolynomial(tuple(factor * c for c in self.coefficients))

    def __call__(self, x):
        acc = 0 if not isinstance(x, float) else 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(
            tuple(k * c for k, c in enumerate(self.coefficients) if k > 0)
        )

    def divide_exact(self, divisor: "IntPolynomial") -> "IntPolynomial":
        """Quotient self / divisor; raises if the division is not exact in Z[z]."""
        if divisor.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero:
            return IntPolynomial.zero()
        rem = list(self.coefficients)
        div = divisor.coefficients
        dn = len(div) - 1
        if len(rem) - 1 < dn:
            raise ValueError("inexact polynomial division")
        quot = [0] * (len(rem) - dn)
        for k in range(len(rem) - 1, dn - 1, -1):
            lead = rem[k]
            if lead == 0:
                continue
            q, r = divmod(lead, div[-1])
            if r != 0:
                raise ValueError("inexact polynomial division")
            quot[k - dn] = q
            for j in range(dn + 1):
                rem[k - dn + j] -= q * div[j]
        if any(rem):
            raise ValueError("inexact polynomial division")
        return IntPolynomial(tuple(quot))

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            mag = abs(c)
            if k == 0:
                term = str(mag)
            else:
                var = "z" if k == 1 else f"z^{k}"
                term = var if mag == 1 else f"{mag}{var}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(f"+ {term}" if c > 0 else f"- {term}")
        return " ".join(parts)


@dataclass(frozen=True)
class RootEnclosure:
    """Certified interval (low, high] containing the isolated root."""

    low: Fraction
    high: Fraction

    @property
    def midpoint(self) -> float:
        return float((self.low + self.high) / 2)

    @property
    def width(self) -> Fraction:
        return self.high - self.low

    def as_dict(self) -> dict:
        return {
            "low": str(self.low),
            "high": str(self.high),
            "midpoint": self.midpoint,
        }


def _content_normalize(coeffs: list[Fraction]) -> list[Fraction]:
    # Scale by a positive rational so the chain stays in small integers;
    # positive scaling never changes sign variations.
    num = 0
    den = 1
    for c in coeffs:
        num = gcd(num, abs(c.numerator))
        den = den * c.denominator // gcd(den, c.denominator)
    if num == 0:
        return coeffs
    factor = Fraction(den, num)
    return [c * factor for c in coeffs]


def _poly_rem(f: list[Fraction], g: list[Fraction]) -> list[Fraction]:
    rem = list(f)
    dn = len(g) - 1
    while len(rem) - 1 >= dn and any(rem):
        while rem and rem[-1] == 0:
            rem.pop()
        if len(rem) - 1 < dn:
            break
        q = rem[-1] / g[-1]
        shift = len(rem) - 1 - dn
        for j in range(dn + 1):
            rem[shift + j] -= q * g[j]
        rem.pop()
    while rem and rem[-1] == 0:
        rem.pop()
    return rem


def _poly_gcd(f: list[Fraction], g: list[Fraction]) -> list[Fraction]:
    a, b = list(f), list(g)
    while b:
        a, b = b, _poly_rem(a, b)
    return _content_normalize(a)


def _square_free_part(p: IntPolynomial) -> list[Fraction]:
    coeffs = [Fraction(c) for c in p.coefficients]
    deriv = [Fraction(c) for c in p.derivative().coefficients]
    if not deriv:
        return coeffs
    g = _poly_gcd(coeffs, deriv)
    if len(g) <= 1:
        return coeffs
    # Exact division coeffs / g.
    quot: list[Fraction] = [Fraction(0)] * (len(coeffs) - len(g) + 1)
    rem = list(coeffs)
    dn = len(g) - 1
    for k in range(len(rem) - 1, dn - 1, -1):
        q = rem[k] / g[-1]
        quot[k - dn] = q
        for j in range(dn + 1):
            rem[k - dn + j] -= q * g[j]
    return _content_normalize(quot)


def sturm_chain(p: IntPolynomial) -> list[list[Fraction]]:
    """Sturm chain of the square-free part of p."""
    p0 = _square_free_part(p)
    chain = [p0]
    if len(p0) > 1:
        p1 = [k * c for k, c in enumerate(p0) if k > 0]
        chain.append(_content_normalize(p1))
        while len(chain[-1]) > 1:
            rem = _poly_rem(chain[-2], chain[-1])
            if not rem:
                break
            chain.append(_content_normalize([-c for c in rem]))
    return chain


def _variations(chain: list[list[Fraction]], x: Fraction) -> int:
    signs = []
    for poly in chain:
        acc = Fraction(0)
        for c in reversed(poly):
            acc = acc * x + c
        if acc != 0:
            signs.append(1 if acc > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(p: IntPolynomial, low: Fraction, high: Fraction,
                chain: list[list[Fraction]] | None = None) -> int:
    """Number of distinct real roots of p in the half-open interval (low, high]."""
    if p.is_zero:
        raise ValueError("root counting needs a non-zero polynomial")
    if chain is None:
        chain = sturm_chain(p)
    low = Fraction(low)
    high = Fraction(high)
    if high <= low:
        return 0
    return _variations(chain, low) - _variations(chain, high)


_MAX_BISECTIONS = 4096


def smallest_root(p: IntPolynomial, low, high, tol: float) -> RootEnclosure:
    """Isolate the smallest root of p in (low, high] down to an interval of
    width <= tol.

    The returned enclosure satisfies two certified facts: it contains at
    least one root, and (low, enclosure.low] contains none.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    low = Fraction(low)
    high = Fraction(high)
    chain = sturm_chain(p)
    if count_roots(p, low, high, chain) < 1:
        raise ValueError(f"no root of {p} in ({low}, {high}]")
    a, b = low, high
    tol = Fraction(tol)
    for _ in range(_MAX_BISECTIONS):
        if b - a <= tol:
            return RootEnclosure(a, b)
        mid = (a + b) / 2
        if count_roots(p, a, mid, chain) >= 1:
            b = mid
        else:
            a = mid
    raise ValueError("bisection budget exhausted before reaching tolerance")
