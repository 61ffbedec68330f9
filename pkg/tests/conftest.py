import math

import pytest

from confrec import Moebius1D, Similarity1D, build_ifs, solve_gamma
from confrec.intervals import Interval

CANTOR_GAMMA = math.log(2.0) / math.log(3.0)
HALFQUARTER_GAMMA = math.log2((1.0 + math.sqrt(5.0)) / 2.0)
# own high-depth telescoped bisection oracle (see test_acceptance for the code)
GAUSS_GAMMA_ORACLE = 0.5312805063


@pytest.fixture(scope="session")
def cantor():
    return build_ifs([Similarity1D(1 / 3, 0.0), Similarity1D(1 / 3, 2 / 3)], osc=True)


@pytest.fixture(scope="session")
def halfquarter():
    return build_ifs([Similarity1D(0.5, 0.0), Similarity1D(0.25, 0.75)], osc=True)


@pytest.fixture(scope="session")
def gauss():
    return build_ifs(
        [Moebius1D(0, 1, 1, 1), Moebius1D(0, 1, 1, 2)],
        osc=True,
        domain=Interval(0.0, 1.0),
    )


@pytest.fixture(scope="session")
def cantor_gamma(cantor):
    return solve_gamma(cantor).gamma.mid


@pytest.fixture(scope="session")
def gauss_gamma(gauss):
    return solve_gamma(gauss, depth=12).gamma.mid
