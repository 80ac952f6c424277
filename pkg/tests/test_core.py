from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from susy_spectra.core import (
    EVEN,
    ODD,
    Hamiltonian,
    ParitySector,
    PolynomialPotential,
    PotentialLabel,
    PrecisionContext,
    SpectrumLabel,
    riccati_source,
)


def test_named_potentials():
    assert dict(PolynomialPotential.susy_minus().coefficients) == {1: -2, 4: 1}
    assert dict(PolynomialPotential.susy_plus().coefficients) == {1: 2, 4: 1}
    assert dict(PolynomialPotential.quartic().coefficients) == {4: 1}
    assert dict(PolynomialPotential.susy_plus(g=3).coefficients) == {1: 6, 4: 1}
    assert PolynomialPotential.named("susy-minus").label is PotentialLabel.SUSY_MINUS


def test_label_must_match_coefficients():
    with pytest.raises(ValueError):
        PolynomialPotential({4: 1, 1: 2}, PotentialLabel.SUSY_MINUS)


def test_potential_must_confine():
    with pytest.raises(ValueError):
        PolynomialPotential({4: -1})
    with pytest.raises(ValueError):
        PolynomialPotential({0: 3})


@pytest.mark.parametrize(
    "potential, E, expected",
    [
        (PolynomialPotential.quartic(), 0, [0, 0, 0, 0, -1]),
        (PolynomialPotential.susy_minus(), 0, [0, 2, 0, 0, -1]),
        (PolynomialPotential.susy_plus(), 5, [5, -2, 0, 0, -1]),
    ],
)
def test_riccati_source(potential, E, expected):
    assert riccati_source(potential, E) == expected


def test_constant_term_shifts_energy():
    pot = PolynomialPotential({0: Fraction(1, 2), 2: 1})
    assert riccati_source(pot, Fraction(3)) == [Fraction(5, 2), 0, -1]


@given(st.fractions(min_value=-50, max_value=50))
def test_source_mirror_and_affinity(E):
    minus = riccati_source(PolynomialPotential.susy_minus(), E)
    plus = riccati_source(PolynomialPotential.susy_plus(), E)
    assert minus[1] == -plus[1]
    assert [minus[0]] + minus[2:] == [plus[0]] + plus[2:]
    shifted = riccati_source(PolynomialPotential.susy_minus(), E + 1)
    assert shifted[0] - minus[0] == 1 and shifted[1:] == minus[1:]


def test_parity_sector():
    assert EVEN.s == 0 and ODD.s == 1
    assert ParitySector.parse("odd") == ODD
    with pytest.raises(ValueError):
        ParitySector(2)
    assert "psi'(0) = 0" in EVEN.boundary


def test_spectrum_label_parity():
    label = SpectrumLabel(Hamiltonian.H_MINUS, 3)
    assert label.parity == ODD
    with pytest.raises(ValueError):
        SpectrumLabel(Hamiltonian.H_PLUS, 2, ODD)


def test_precision_context_limits():
    ctx = PrecisionContext(80)
    assert ctx.root_tolerance == Fraction(1, 10**25)
    assert ctx.bits >= 266
    assert PrecisionContext(30).root_tolerance == Fraction(1, 10**20)
    with pytest.raises(ValueError):
        PrecisionContext(29)
    with pytest.raises(ValueError):
        PrecisionContext(40, Fraction(1, 10**31))
    with pytest.raises(ValueError):
        PrecisionContext(40, 0)
