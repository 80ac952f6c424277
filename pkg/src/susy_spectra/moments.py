"""Moments M(n) = int_0^inf x**n exp(-2 x**3 / 3) dx in closed form.

Substituting u = 2x^3/3 gives M(n) = (1/3) (3/2)**((n+1)/3) Gamma((n+1)/3),
so every moment follows from Gamma(1/3), Gamma(2/3) and Gamma(1) = 1 through
M(n+3) = (n+1)/2 * M(n).
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr, mpq

from .core import PrecisionContext

_EXTRA_BITS = 32


def _closed_form(n: int) -> mpfr:
    a = mpq(n + 1, 3)
    return mpfr(mpq(3, 2)) ** mpfr(a) * gmpy2.gamma(mpfr(a)) / 3


def moment(n: int, ctx: PrecisionContext) -> mpfr:
    """M(n) at working precision, evaluated directly from the Gamma function."""
    if n < 0:
        raise ValueError(f"moment order must be non-negative, got {n}")
    if n == 2:
        return ctx.real(mpq(1, 2))
    with ctx.local(_EXTRA_BITS):
        value = _closed_form(n)
    return ctx.real(value)


@dataclass(frozen=True)
class MomentTable:
    values: tuple
    precision: PrecisionContext

    def __getitem__(self, n):
        if isinstance(n, int) and n < 0:
            raise IndexError(f"negative moment order {n}")
        return self.values[n]

    def __len__(self):
        return len(self.values)

    @property
    def n_max(self) -> int:
        return len(self.values) - 1


@functools.lru_cache(maxsize=64)
def _table(n_max: int, ctx: PrecisionContext) -> tuple:
    with ctx.local(_EXTRA_BITS):
        seeds = [_closed_form(0), _closed_form(1), mpfr(mpq(1, 2))]
        vals = seeds[: n_max + 1]
        for n in range(3, n_max + 1):
            vals.append(vals[n - 3] * (n - 2) / 2)
    return tuple(ctx.real(v) for v in vals)


def moment_table(n_max: int, ctx: PrecisionContext) -> MomentTable:
    """Moments M(0..n_max); cached so repeated requests return identical values."""
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    return MomentTable(_table(n_max, ctx), ctx)
