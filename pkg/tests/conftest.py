import pytest
from fractions import Fraction

from nijflow.cases import build_case, build_classical


@pytest.fixture(scope="session")
def case_a2():
    return build_case("A", 2, 1, Fraction(1, 2))


@pytest.fixture(scope="session")
def case_b2():
    return build_case("B", 2, 1, Fraction(1, 2))


@pytest.fixture(scope="session")
def case_a3():
    return build_case("A", 3, 1, Fraction(1, 2))


@pytest.fixture(scope="session")
def case_b3():
    return build_case("B", 3, 1, Fraction(1, 2))


@pytest.fixture(scope="session")
def su2():
    return build_classical("su", 2)


@pytest.fixture(scope="session")
def su3():
    return build_classical("su", 3)


@pytest.fixture(scope="session")
def su4():
    return build_classical("su", 4)


@pytest.fixture(scope="session")
def so6():
    return build_classical("so", 6)
