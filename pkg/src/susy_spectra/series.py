"""Taylor coefficients of the modified logarithmic derivative f(x) = s/x - psi'/psi.

Substituting f = sum f_j x^j into f' = f^2 - (2s/x) f + E - V(x) and matching
powers of x gives

    (n + 1 + 2s) f_{n+1} = sum_{k=0}^{n} f_k f_{n-k} + source_n,   f_0 = 0,

with source = riccati_source(V, E). The denominator never vanishes, so the
odd sector needs no special casing.

When V contains only even powers, f is odd in x and f = x g(x^2) with

    (2n + 1 + 2s) g_n = sum_{k=0}^{n-1} g_k g_{n-1-k} + source_{2n}.

The "reduced" series is g_0, g_1, ...; on the half line these are the
coefficients f_1, f_3, f_5, ... with every even-index f_j zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpfr, mpq

from .core import ParitySector, PolynomialPotential, PotentialLabel, PrecisionContext, riccati_source
from .errors import ResourceLimit

MAX_EXACT_COUNT = 80
SERIES_GUARD_DIGITS = 20


def _to_mpq(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


class RationalPolynomial:
    """Dense polynomial in E with exact rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):
        c = [_to_mpq(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def constant(cls, value) -> "RationalPolynomial":
        return cls([value])

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        if not isinstance(other, RationalPolynomial):
            other = RationalPolynomial.constant(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return RationalPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial([-x for x in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, RationalPolynomial) else -_to_mpq(other))

    def __mul__(self, other):
        if not isinstance(other, RationalPolynomial):
            k = _to_mpq(other)
            return RationalPolynomial([x * k for x in self.coeffs])
        if self.is_zero() or other.is_zero():
            return RationalPolynomial()
        out = [mpq(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x == 0:
                continue
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, k):
        k = _to_mpq(k)
        return RationalPolynomial([x / k for x in self.coeffs])

    def __eq__(self, other):
        if not isinstance(other, RationalPolynomial):
            other = RationalPolynomial.constant(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, E):
        """Horner evaluation; exact for rational E, rounded for mpfr E."""
        acc = mpq(0) if not isinstance(E, mpfr) else mpfr(0)
        for c in reversed(self.coeffs):
            acc = acc * E + c
        return acc

    def __repr__(self):
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"


@dataclass(frozen=True)
class CoefficientSeries:
    """f_0 .. f_{count-1}, numeric at energy ``E`` or exact polynomials (``E is None``).

    With ``reduced`` the values are the x**2 coefficients g_0 .. g_{count-1}.
    """

    s: int
    potential: PotentialLabel
    values: tuple
    E: object = None
    reduced: bool = False

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def exact(self) -> bool:
        return self.E is None

    def at(self, E) -> tuple:
        """Evaluate exact-mode coefficients at E."""
        if not self.exact:
            raise TypeError("series is already numeric")
        return tuple(p(E) for p in self.values)


def _recur(source, s: int, count: int, zero, square_sum):
    f = [zero] * count
    for n in range(count - 1):
        acc = square_sum(f, n)
        if n < len(source):
            acc = acc + source[n]
        f[n + 1] = acc / (n + 1 + 2 * s)
    return f


def _recur_reduced(source, s: int, count: int, zero, convolution):
    g = [zero] * count
    for n in range(count):
        acc = convolution(g, n - 1) if n else zero
        if 2 * n < len(source):
            acc = acc + source[2 * n]
        g[n] = acc / (2 * n + 1 + 2 * s)
    return g


def _convolution(g, m, zero):
    # sum_{k=0}^{m} g_k g_{m-k}, using the symmetry of the terms
    half = zero
    for k in range((m + 1) // 2):
        half = half + g[k] * g[m - k]
    total = half * 2
    if m % 2 == 0:
        total = total + g[m // 2] * g[m // 2]
    return total


def _require_even(potential: PolynomialPotential):
    if not potential.is_even:
        raise ValueError(f"{potential.label.value} has odd powers; the x**2 series does not exist")


def _numeric_square_sum(f, n):
    # f_0 = 0 so the k = 0 and k = n terms vanish
    half = sum(f[k] * f[n - k] for k in range(1, (n + 1) // 2))
    total = 2 * half
    if n % 2 == 0:
        total = total + f[n // 2] * f[n // 2]
    return total


def series_coefficients(
    potential: PolynomialPotential,
    s,
    E,
    count: int,
    ctx: PrecisionContext,
    guard_digits: int = SERIES_GUARD_DIGITS,
    reduced: bool = False,
) -> CoefficientSeries:
    """Numeric f_j at fixed energy E in working precision.

    The recursion runs with ``guard_digits`` extra digits, and E enters at
    that precision too, so cancellation near a zero of some f_j does not
    show in the rounded result.
    """
    s = ParitySector.parse(s).s
    if count < 1:
        raise ValueError("count must be positive")
    inner = PrecisionContext(ctx.decimal_digits + guard_digits, ctx.root_tolerance)
    with inner.local():
        source = [mpfr(_to_mpq(c)) for c in riccati_source(potential, Fraction(0))]
        source[0] = source[0] + inner.real(E)
        if reduced:
            _require_even(potential)
            f = _recur_reduced(source, s, count, mpfr(0), lambda g, m: _convolution(g, m, mpfr(0)))
        else:
            f = _recur(source, s, count, mpfr(0), _numeric_square_sum)
    with ctx.local():
        f = [mpfr(v, ctx.bits) for v in f]
        E = ctx.real(E)
    return CoefficientSeries(s, potential.label, tuple(f), E, reduced)


def series_polynomials(
    potential: PolynomialPotential, s, count: int, max_count: int = MAX_EXACT_COUNT, reduced: bool = False
) -> CoefficientSeries:
    """Exact f_j(E) as rational polynomials in E."""
    s = ParitySector.parse(s).s
    if count < 1:
        raise ValueError("count must be positive")
    if count > max_count:
        raise ResourceLimit(f"exact series limited to {max_count} coefficients, asked for {count}")
    constants = riccati_source(potential, Fraction(0))
    source = [RationalPolynomial.constant(c) for c in constants]
    source[0] = source[0] + RationalPolynomial([0, 1])

    def square_sum(f, n):
        half = RationalPolynomial()
        for k in range(1, (n + 1) // 2):
            half = half + f[k] * f[n - k]
        total = half * 2
        if n % 2 == 0:
            total = total + f[n // 2] * f[n // 2]
        return total

    if reduced:
        _require_even(potential)
        zero = RationalPolynomial()
        f = _recur_reduced(source, s, count, zero, lambda g, m: _convolution(g, m, zero))
    else:
        f = _recur(source, s, count, RationalPolynomial(), square_sum)
    return CoefficientSeries(s, potential.label, tuple(f), None, reduced)
