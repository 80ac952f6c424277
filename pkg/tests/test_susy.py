from fractions import Fraction

import pytest
from gmpy2 import mpfr

from susy_spectra.core import EVEN, ODD, Hamiltonian, PolynomialPotential, PrecisionContext, SpectrumLabel
from susy_spectra.errors import AmbiguousClassification
from susy_spectra.rayleigh_ritz import Level, SpectrumTable, variational_table
from susy_spectra.susy import (
    LabeledSpectrum,
    LabeledValue,
    classify_roots,
    degeneracy_report,
    interleaving_check,
)

CTX = PrecisionContext(40)

EVEN_COLUMN = [
    "0",
    "1.9695075137502948249",
    "5.5071777771459699676",
    "9.3942674378738914658",
    "13.858371936541300147",
    "18.645975633988444799",
    "23.8071859179857669",
    "29.23255455062149608",
    "34.94633571889061",
]
ODD_COLUMN = [
    "1.9695075137502948249",
    "5.5071777771459699676",
    "9.3942674378738914658",
    "13.858371936541300147",
    "18.645975633988444799",
    "23.807185917985766918",
    "29.2325545506214961",
    "34.9463357188906106",
]


def _values(column):
    with CTX.local():
        return [mpfr(v) for v in column]


@pytest.fixture(scope="module")
def tables():
    return (
        variational_table(PolynomialPotential.susy_minus(), [7], CTX),
        variational_table(PolynomialPotential.susy_plus(), [7], CTX),
    )


def test_even_labels(tables):
    spectrum = classify_roots(_values(EVEN_COLUMN[:4]), [], *tables)
    assert spectrum.labels() == [
        SpectrumLabel(Hamiltonian.H_MINUS, 0),
        SpectrumLabel(Hamiltonian.H_PLUS, 0),
        SpectrumLabel(Hamiltonian.H_MINUS, 2),
        SpectrumLabel(Hamiltonian.H_PLUS, 2),
    ]


def test_odd_labels(tables):
    spectrum = classify_roots([], _values(ODD_COLUMN[:3]), *tables)
    assert spectrum.labels() == [
        SpectrumLabel(Hamiltonian.H_MINUS, 1),
        SpectrumLabel(Hamiltonian.H_PLUS, 1),
        SpectrumLabel(Hamiltonian.H_MINUS, 3),
    ]


def test_empty_input(tables):
    spectrum = classify_roots([], [], *tables)
    assert len(spectrum) == 0
    assert degeneracy_report(spectrum).pairs == ()
    assert degeneracy_report(spectrum).max_residual is None


@pytest.mark.parametrize("scale", [Fraction(1, 10), 1, 10])
def test_classification_stable_under_tolerance(tables, scale):
    tol = Fraction(1, 10**6) * scale
    spectrum = classify_roots(_values(EVEN_COLUMN), _values(ODD_COLUMN), *tables, tol=tol)
    assert not spectrum.unclassified
    reference = classify_roots(_values(EVEN_COLUMN), _values(ODD_COLUMN), *tables)
    assert spectrum.labels() == reference.labels()


def test_labels_follow_parity(tables):
    spectrum = classify_roots(_values(EVEN_COLUMN), _values(ODD_COLUMN), *tables)
    for entry in spectrum.entries:
        assert entry.label.n % 2 == entry.label.parity.s


def test_golden_degeneracy(tables):
    spectrum = classify_roots(_values(EVEN_COLUMN), _values(ODD_COLUMN), *tables)
    report = degeneracy_report(spectrum)
    assert [p.n for p in report.pairs] == list(range(1, 9))
    # identical printed digits give exact zeros for n = 1 and n = 4
    assert report.pairs[0].residual == 0
    assert report.pairs[3].residual == 0
    assert list(spectrum.residuals) == report.residuals


def test_interleaving_on_golden_columns():
    assert interleaving_check(_values(EVEN_COLUMN), _values(ODD_COLUMN), Fraction(1, 10**15)) == [True] * 8


def test_interleaving_negative_control():
    odd = _values(ODD_COLUMN)
    with CTX.local():
        odd[2] += mpfr("1e-6")
    flags = interleaving_check(_values(EVEN_COLUMN), odd, Fraction(1, 10**15))
    assert flags[2] is False
    assert flags.count(False) == 1


def test_interleaving_trivial():
    assert interleaving_check([mpfr(0)], []) == []
    assert interleaving_check([], []) == []


def _table(levels):
    return SpectrumTable({7: tuple(levels)})


def test_ambiguous_when_alternation_disagrees():
    with CTX.local():
        # the second even root should be H_+ state 0, yet only the n = 2 bounds of
        # both partners sit just above it
        minus = _table([Level(0, EVEN, mpfr("1.0")), Level(2, EVEN, mpfr("4.0000001"))])
        plus = _table([Level(0, EVEN, mpfr("9.0")), Level(2, EVEN, mpfr("4.0000002"))])
        with pytest.raises(AmbiguousClassification):
            classify_roots([mpfr("1.0"), mpfr("4.0")], [], minus, plus)


def test_root_above_bound_is_unclassified():
    with CTX.local():
        minus = _table([Level(0, EVEN, mpfr("1.0"))])
        plus = _table([Level(0, EVEN, mpfr("2.0"))])
        spectrum = classify_roots([mpfr("1.5")], [], minus, plus)
        assert spectrum.unclassified and spectrum.entries[0].label is None


def test_labeled_spectrum_must_ascend():
    with pytest.raises(ValueError):
        LabeledSpectrum((LabeledValue(mpfr(2), None), LabeledValue(mpfr(1), None)))


def test_lookup_by_label(tables):
    spectrum = classify_roots(_values(EVEN_COLUMN), _values(ODD_COLUMN), *tables)
    assert spectrum.value("H_minus", 0) == 0
    assert spectrum.value(Hamiltonian.H_PLUS, 7) == _values(ODD_COLUMN)[7]
    assert spectrum.value(Hamiltonian.H_PLUS, 9) is None
