import pytest

from susy_spectra.core import PolynomialPotential, PrecisionContext


@pytest.fixture(scope="session")
def ctx50():
    return PrecisionContext(50)


@pytest.fixture(scope="session")
def ctx40():
    return PrecisionContext(40)


@pytest.fixture(scope="session")
def susy_minus():
    return PolynomialPotential.susy_minus()


@pytest.fixture(scope="session")
def susy_plus():
    return PolynomialPotential.susy_plus()


@pytest.fixture(scope="session")
def quartic():
    return PolynomialPotential.quartic()
