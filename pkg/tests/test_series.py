import math
import random
from fractions import Fraction

import pytest
from gmpy2 import mpfr, mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from susy_spectra.core import PolynomialPotential, PrecisionContext, riccati_source
from susy_spectra.errors import ResourceLimit
from susy_spectra.series import RationalPolynomial, series_coefficients, series_polynomials

POTENTIALS = ["susy_minus", "susy_plus", "quartic"]


@pytest.mark.parametrize("label", POTENTIALS)
def test_first_coefficients(label, ctx50):
    pot = PolynomialPotential.named(label)
    with ctx50.local():
        even = series_coefficients(pot, 0, "2.5", 4, ctx50).values
        odd = series_coefficients(pot, 1, "2.5", 4, ctx50).values
        assert even[0] == 0 and odd[0] == 0
        assert even[1] == mpfr("2.5")
        assert abs(odd[1] - mpfr("2.5") / 3) <= ctx50.ulp(odd[1])
    exact = series_polynomials(pot, 0, 3)
    assert exact.values[0].is_zero()
    assert exact.values[1] == RationalPolynomial([0, 1])


def test_exact_ground_state_series(ctx50, susy_minus):
    # psi = exp(-x^3/3) gives f(x) = x^2 exactly at E = 0
    values = series_coefficients(susy_minus, 0, 0, 30, ctx50).values
    assert values[2] == 1
    assert all(v == 0 for j, v in enumerate(values) if j != 2)


def test_hand_derived_odd_coefficient(susy_plus):
    f = series_polynomials(susy_plus, 1, 3).values
    assert f[2] == RationalPolynomial([Fraction(-1, 2)])


def test_numeric_matches_exact_quartic_f5(ctx50, quartic):
    exact = series_polynomials(quartic, 0, 6)
    E = mpq(7, 3)
    numeric = series_coefficients(quartic, 0, E, 6, ctx50).values
    with ctx50.local():
        assert abs(numeric[5] - mpfr(exact.values[5](E))) <= 5 * ctx50.ulp(numeric[5])


@pytest.mark.parametrize("label", POTENTIALS)
@pytest.mark.parametrize("s", [0, 1])
def test_cross_mode_consistency(label, s):
    ctx = PrecisionContext(50)
    pot = PolynomialPotential.named(label)
    exact = series_polynomials(pot, s, 40)
    rng = random.Random(f"{label}-{s}")
    for _ in range(5):
        E = mpq(rng.randint(-400, 4000), rng.randint(1, 97))
        numeric = series_coefficients(pot, s, E, 40, ctx).values
        with ctx.local():
            for j, (p, v) in enumerate(zip(exact.values, numeric)):
                want = mpfr(p(E))
                # the recursion accumulates a few roundings per order
                assert abs(v - want) <= 5 * (j + 1) * ctx.ulp(max(abs(want), abs(v))), (j, E)


@pytest.mark.parametrize("label", POTENTIALS)
@pytest.mark.parametrize("s", [0, 1])
def test_recursion_residual_is_exactly_zero(label, s):
    pot = PolynomialPotential.named(label)
    f = series_polynomials(pot, s, 30).values
    src = riccati_source(pot, Fraction(0))
    for n in range(29):
        lhs = f[n + 1] * (n + 1 + 2 * s)
        rhs = RationalPolynomial()
        for k in range(n + 1):
            rhs = rhs + f[k] * f[n - k]
        if n < len(src):
            rhs = rhs + src[n]
        if n == 0:
            rhs = rhs + RationalPolynomial([0, 1])
        assert (lhs - rhs).is_zero(), n


@pytest.mark.parametrize("label", POTENTIALS)
@pytest.mark.parametrize("s", [0, 1])
def test_degree_growth(label, s):
    f = series_polynomials(PolynomialPotential.named(label), s, 61).values
    for j, p in enumerate(f):
        assert p.degree <= math.ceil(j / 2), j


def test_resource_limit(quartic):
    with pytest.raises(ResourceLimit):
        series_polynomials(quartic, 0, 81)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.fractions(max_denominator=20, min_value=-10, max_value=10), min_size=1, max_size=5),
    st.lists(st.fractions(max_denominator=20, min_value=-10, max_value=10), min_size=1, max_size=5),
    st.fractions(max_denominator=50, min_value=-10, max_value=10),
)
def test_polynomial_arithmetic_evaluates_pointwise(p, q, x):
    P, Q = RationalPolynomial(p), RationalPolynomial(q)
    X = mpq(x.numerator, x.denominator)
    assert (P * Q)(X) == P(X) * Q(X)
    assert (P + Q)(X) == P(X) + Q(X)
    assert (P - Q)(X) == P(X) - Q(X)


@pytest.mark.parametrize("s", [0, 1])
def test_reduced_series_is_the_odd_half(quartic, s, ctx50):
    full = series_coefficients(quartic, s, "2.7", 41, ctx50).values
    reduced = series_coefficients(quartic, s, "2.7", 20, ctx50, reduced=True).values
    assert all(full[2 * j] == 0 for j in range(20))
    assert [full[2 * j + 1] for j in range(20)] == list(reduced)


@pytest.mark.parametrize("s", [0, 1])
def test_reduced_cross_mode(quartic, s, ctx50):
    exact = series_polynomials(quartic, s, 25, reduced=True)
    assert exact.values[0] == RationalPolynomial([0, mpq(1, 1 + 2 * s)])
    E = mpq(123, 17)
    numeric = series_coefficients(quartic, s, E, 25, ctx50, reduced=True).values
    with ctx50.local():
        for p, v in zip(exact.values, numeric):
            want = mpfr(p(E))
            assert abs(v - want) <= 5 * ctx50.ulp(want)


def test_reduced_needs_even_potential(susy_minus, ctx50):
    assert not susy_minus.is_even
    with pytest.raises(ValueError):
        series_coefficients(susy_minus, 0, 1, 5, ctx50, reduced=True)
    with pytest.raises(ValueError):
        series_polynomials(susy_minus, 0, 5, reduced=True)
