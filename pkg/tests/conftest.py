import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nilgeom.grading import build_graded_basis, generate_filtration
from nilgeom.osculating import osculating_algebra
from nilgeom.polyfield import parse_field

VARIABLES = ["x", "y"]
CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def worked_structure(N):
    """The depth-(1, N) two-family structure on R^2 from the worked example."""
    f1 = [parse_field("d/dx", VARIABLES), parse_field("d/dy", VARIABLES)]
    f2 = [parse_field("d/dx", VARIABLES),
          parse_field(f"x^{N - 1}*d/dy", VARIABLES)]
    return generate_filtration([((1, 0), f1), ((0, 1), f2)], (1, N), VARIABLES)


def heisenberg_structure():
    v = ["x", "y", "z"]
    fields = [parse_field("d/dx", v), parse_field("d/dy + x*d/dz", v)]
    return generate_filtration([((1,), fields)], (2,), v)


@pytest.fixture(scope="session")
def worked_n2():
    s = worked_structure(2)
    return s, build_graded_basis(s)


@pytest.fixture(scope="session")
def worked_n3():
    s = worked_structure(3)
    return s, build_graded_basis(s)


@pytest.fixture(scope="session")
def osc_n2_origin(worked_n2):
    s, b = worked_n2
    return osculating_algebra(s, b, [Fraction(0), Fraction(0)])


@pytest.fixture(scope="session")
def osc_n2_right(worked_n2):
    s, b = worked_n2
    return osculating_algebra(s, b, [Fraction(1), Fraction(0)])


@pytest.fixture(scope="session")
def osc_n3_origin(worked_n3):
    s, b = worked_n3
    return osculating_algebra(s, b, [Fraction(0), Fraction(0)])


@pytest.fixture(scope="session")
def osc_n3_right(worked_n3):
    s, b = worked_n3
    return osculating_algebra(s, b, [Fraction(1), Fraction(0)])
