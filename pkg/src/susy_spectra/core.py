"""Potentials, parity sectors, precision handling and the Riccati source term."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

import gmpy2
from gmpy2 import mpfr, mpq

# extra bits carried beyond the requested decimal digits
GUARD_BITS = 16


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision for all extended-real arithmetic.

    ``root_tolerance`` is an absolute bisection tolerance on the energy; it
    defaults to ``1e-25`` or to the loosest value the precision allows.
    """

    decimal_digits: int = 50
    root_tolerance: Fraction | None = None

    def __post_init__(self):
        if not isinstance(self.decimal_digits, int) or self.decimal_digits < 30:
            raise ValueError(f"decimal_digits must be an integer >= 30, got {self.decimal_digits!r}")
        floor = Fraction(1, 10 ** (self.decimal_digits - 10))
        tol = self.root_tolerance
        if tol is None:
            tol = max(Fraction(1, 10**25), floor)
        tol = Fraction(tol)
        if tol <= 0 or tol < floor:
            raise ValueError(
                f"root_tolerance must be positive and >= 1e-{self.decimal_digits - 10}, got {float(tol)!r}"
            )
        object.__setattr__(self, "root_tolerance", tol)

    @property
    def bits(self) -> int:
        return math.ceil(self.decimal_digits * math.log2(10)) + GUARD_BITS

    def local(self, extra_bits: int = 0):
        """Context manager switching gmpy2 to this precision."""
        return gmpy2.context(gmpy2.get_context(), precision=self.bits + extra_bits)

    def real(self, value) -> mpfr:
        """Convert ``value`` (int, Fraction, str, mpq, mpfr) at this precision."""
        with self.local():
            if isinstance(value, Fraction):
                value = mpq(value.numerator, value.denominator)
            return mpfr(value)

    def ulp(self, value) -> mpfr:
        with self.local():
            v = abs(mpfr(value))
            if v == 0:
                return mpfr(0)
            return mpfr(2) ** (gmpy2.get_exp(v) - self.bits)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.decimal_digits, self.root_tolerance)


class PotentialLabel(str, enum.Enum):
    SUSY_MINUS = "susy_minus"
    SUSY_PLUS = "susy_plus"
    QUARTIC = "quartic"
    CUSTOM = "custom"


def _freeze(coefficients: Mapping[int, object]) -> Mapping[int, Fraction]:
    cleaned = {}
    for k, c in sorted(coefficients.items()):
        if int(k) != k or k < 0:
            raise ValueError(f"powers must be non-negative integers, got {k!r}")
        c = Fraction(c)
        if c != 0:
            cleaned[int(k)] = c
    return MappingProxyType(cleaned)


@dataclass(frozen=True)
class PolynomialPotential:
    """V(x) = sum_k c_k x**k on x > 0, with exact rational coefficients."""

    coefficients: Mapping[int, Fraction]
    label: PotentialLabel = PotentialLabel.CUSTOM
    g: Fraction = Fraction(1)

    def __post_init__(self):
        coeffs = _freeze(self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "g", Fraction(self.g))
        object.__setattr__(self, "label", PotentialLabel(self.label))
        if not coeffs:
            raise ValueError("potential has no terms")
        top = max(coeffs)
        if top == 0 or coeffs[top] <= 0:
            raise ValueError("highest power must carry a positive coefficient (confining potential)")
        expected = _named_coefficients(self.label, self.g)
        if expected is not None and dict(coeffs) != expected:
            raise ValueError(f"coefficients {dict(coeffs)} do not match label {self.label.value}")

    @classmethod
    def susy_minus(cls, g=1) -> "PolynomialPotential":
        return cls(_named_coefficients(PotentialLabel.SUSY_MINUS, Fraction(g)), PotentialLabel.SUSY_MINUS, g)

    @classmethod
    def susy_plus(cls, g=1) -> "PolynomialPotential":
        return cls(_named_coefficients(PotentialLabel.SUSY_PLUS, Fraction(g)), PotentialLabel.SUSY_PLUS, g)

    @classmethod
    def quartic(cls) -> "PolynomialPotential":
        return cls({4: 1}, PotentialLabel.QUARTIC)

    @classmethod
    def named(cls, name: str) -> "PolynomialPotential":
        key = name.replace("-", "_")
        factories = {"susy_minus": cls.susy_minus, "susy_plus": cls.susy_plus, "quartic": cls.quartic}
        if key not in factories:
            raise ValueError(f"unknown potential {name!r}")
        return factories[key]()

    @property
    def degree(self) -> int:
        return max(self.coefficients)

    def coefficient(self, k: int) -> Fraction:
        return self.coefficients.get(k, Fraction(0))

    @property
    def is_even(self) -> bool:
        """Only even powers, so V is a polynomial in x**2."""
        return all(k % 2 == 0 for k in self.coefficients)

    def __call__(self, x):
        return sum(c * x**k for k, c in self.coefficients.items())


def _named_coefficients(label: PotentialLabel, g: Fraction):
    if label is PotentialLabel.SUSY_MINUS:
        return {1: -2 * g, 4: Fraction(1)}
    if label is PotentialLabel.SUSY_PLUS:
        return {1: 2 * g, 4: Fraction(1)}
    if label is PotentialLabel.QUARTIC:
        return {4: Fraction(1)}
    return None


@dataclass(frozen=True)
class ParitySector:
    """Even (s=0: psi'(0)=0) or odd (s=1: psi(0)=0) states on the half line."""

    s: int

    def __post_init__(self):
        if self.s not in (0, 1):
            raise ValueError(f"parity s must be 0 or 1, got {self.s!r}")

    @property
    def name(self) -> str:
        return "even" if self.s == 0 else "odd"

    @property
    def boundary(self) -> str:
        if self.s == 0:
            return "psi(0) != 0, psi'(0) = 0"
        return "psi(0) = 0, psi'(0) != 0"

    @classmethod
    def parse(cls, value) -> "ParitySector":
        if isinstance(value, ParitySector):
            return value
        if value in ("even", "e"):
            return EVEN
        if value in ("odd", "o"):
            return ODD
        return cls(int(value))


EVEN = ParitySector(0)
ODD = ParitySector(1)


class Hamiltonian(str, enum.Enum):
    H_MINUS = "H_minus"
    H_PLUS = "H_plus"
    QUARTIC = "quartic"


@dataclass(frozen=True, order=True)
class SpectrumLabel:
    hamiltonian: Hamiltonian
    n: int
    parity: ParitySector = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hamiltonian", Hamiltonian(self.hamiltonian))
        if self.n < 0:
            raise ValueError("state index must be non-negative")
        parity = self.parity if self.parity is not None else ParitySector(self.n % 2)
        if parity.s != self.n % 2:
            raise ValueError(f"state n={self.n} must have parity s={self.n % 2}")
        object.__setattr__(self, "parity", parity)

    def __str__(self):
        return f"{self.hamiltonian.value}[{self.n}]"


def riccati_source(potential: PolynomialPotential, E) -> list:
    """Taylor coefficients of E - V(x): ``[E - c_0, -c_1, ..., -c_m]``.

    Entries beyond index 0 are exact Fractions; index 0 keeps the type of ``E``.
    """
    out = [-potential.coefficient(k) for k in range(potential.degree + 1)]
    out[0] = E + out[0] if out[0] else E
    return out
